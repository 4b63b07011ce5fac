"""squidmech: simulate and fit the spectra of a flux-tunable SQUID
resonator longitudinally coupled to a low frequency LC mode and driven on
its sideband."""

__version__ = "0.1.0"

from .circuit import (
    BiasPoint,
    DeviceParams,
    bare_coupling,
    bias_for_frequency,
    cooperativity,
    effective_coupling,
    josephson_inductance,
    kerr_constant,
    load_device,
    paper_device,
    resonator_frequency,
    stark_shift,
    zero_point_current,
    zero_point_flux,
)
from .constants import CONSTANTS, PHI0, PhysicalConstants
from .spectra import (
    CoupledModeParams,
    NoiseSpec,
    SpectrumTrace,
    normal_mode_frequencies,
    s21_bare,
    s21_coupled,
    synthesize_trace,
    synthesize_upconversion_trace,
    upconversion_power,
)

__all__ = [
    "__version__",
    "BiasPoint",
    "DeviceParams",
    "bare_coupling",
    "bias_for_frequency",
    "cooperativity",
    "effective_coupling",
    "josephson_inductance",
    "kerr_constant",
    "load_device",
    "paper_device",
    "resonator_frequency",
    "stark_shift",
    "zero_point_current",
    "zero_point_flux",
    "CONSTANTS",
    "PHI0",
    "PhysicalConstants",
    "CoupledModeParams",
    "NoiseSpec",
    "SpectrumTrace",
    "normal_mode_frequencies",
    "s21_bare",
    "s21_coupled",
    "synthesize_trace",
    "synthesize_upconversion_trace",
    "upconversion_power",
]
