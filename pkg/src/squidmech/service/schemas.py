"""Pydantic request/response models for the HTTP service.

Wire-level frequencies are ordinary Hz (suffix `_hz`); the device document
is the one SI-unit payload, mirroring the on-disk device JSON.
"""

from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..circuit import DeviceParams
from ..constants import PHI0, TWO_PI
from ..fitting.levmar import FitConfig, FitResult
from ..pipelines import PipelineReport, SweepConfig
from ..spectra import CoupledModeParams, SpectrumTrace


class DeviceModel(BaseModel):
    """Device constants in SI units (angular frequencies in rad/s)."""

    c_low: float
    omega_b: float
    loop_area: float
    wire_distance: float
    l_geo: float
    l_loop: float
    l_j0: float
    omega_a_max: float

    def to_device(self) -> DeviceParams:
        return DeviceParams(**self.model_dump())

    @classmethod
    def from_device(cls, dev: DeviceParams) -> "DeviceModel":
        return cls(c_low=dev.c_low, omega_b=dev.omega_b, loop_area=dev.loop_area,
                   wire_distance=dev.wire_distance, l_geo=dev.l_geo,
                   l_loop=dev.l_loop, l_j0=dev.l_j0, omega_a_max=dev.omega_a_max)


class CoupledModeModel(BaseModel):
    omega_a_hz: float
    omega_b_hz: float
    kappa_int_hz: float
    kappa_ext_hz: float
    gamma_hz: float
    g_hz: float
    theta_rad: float = 0.0

    def to_params(self) -> CoupledModeParams:
        return CoupledModeParams(
            omega_a=TWO_PI * self.omega_a_hz,
            omega_b=TWO_PI * self.omega_b_hz,
            kappa_int=TWO_PI * self.kappa_int_hz,
            kappa_ext=TWO_PI * self.kappa_ext_hz,
            gamma=TWO_PI * self.gamma_hz,
            g=TWO_PI * self.g_hz,
            theta=self.theta_rad,
        )


class TraceModel(BaseModel):
    """Wire form of a SpectrumTrace (Hz, split re/im)."""

    freq_hz: list[float]
    kind: Literal["complex_s21", "power"] = "complex_s21"
    re_s21: list[float] | None = None
    im_s21: list[float] | None = None
    power: list[float] | None = None
    drive_freq_hz: float | None = None
    drive_amp: float | None = None
    seed: int | None = None

    @classmethod
    def from_trace(cls, trace: SpectrumTrace) -> "TraceModel":
        base = {
            "freq_hz": (trace.probe_freqs / TWO_PI).tolist(),
            "kind": trace.kind,
            "drive_freq_hz": None if trace.drive_freq is None else trace.drive_freq / TWO_PI,
            "drive_amp": trace.drive_amp,
            "seed": trace.seed,
        }
        if trace.kind == "complex_s21":
            base["re_s21"] = trace.values.real.tolist()
            base["im_s21"] = trace.values.imag.tolist()
        else:
            base["power"] = trace.values.tolist()
        return cls(**base)

    def to_trace(self) -> SpectrumTrace:
        freqs = np.asarray(self.freq_hz, dtype=float) * TWO_PI
        if self.kind == "complex_s21":
            if self.re_s21 is None or self.im_s21 is None:
                raise ValueError("complex trace needs re_s21 and im_s21")
            values = np.asarray(self.re_s21, float) + 1j * np.asarray(self.im_s21, float)
        else:
            if self.power is None:
                raise ValueError("power trace needs the power column")
            values = np.asarray(self.power, dtype=float)
        return SpectrumTrace(
            probe_freqs=freqs, values=values, kind=self.kind,
            drive_freq=None if self.drive_freq_hz is None else TWO_PI * self.drive_freq_hz,
            drive_amp=self.drive_amp, seed=self.seed,
        )


class FitConfigModel(BaseModel):
    max_iterations: int = 200
    gradient_tolerance: float = 1e-4
    step_tolerance: float = 1e-12
    initial_damping: float = 1e-3
    damping_up: float = 10.0
    damping_down: float = 0.1

    def to_config(self) -> FitConfig:
        return FitConfig(**self.model_dump())


class FitResultModel(BaseModel):
    params: dict[str, float]
    std_errors: dict[str, float]
    residual_norm: float
    iterations: int
    converged: bool
    std_errors_reliable: bool

    @classmethod
    def from_result(cls, result: FitResult) -> "FitResultModel":
        return cls(**result.as_dict())


class SweepConfigModel(BaseModel):
    """Optional overrides for the pipeline grids (Hz / Phi0 domain)."""

    flux_points_phi0: list[float] | None = None
    drive_points_hz: list[float] | None = None
    drive_amplitudes: list[float] | None = None
    trace_points: int = 401
    trace_halfspan_linewidths: float = 5.0
    noise_sigma: float = 0.01
    seed: int = 0

    def to_sweep(self) -> SweepConfig:
        kwargs = {
            "trace_points": self.trace_points,
            "trace_halfspan_linewidths": self.trace_halfspan_linewidths,
            "noise_sigma": self.noise_sigma,
            "seed": self.seed,
        }
        if self.flux_points_phi0 is not None:
            kwargs["flux_points"] = np.asarray(self.flux_points_phi0, float) * PHI0
        if self.drive_points_hz is not None:
            kwargs["drive_points"] = np.asarray(self.drive_points_hz, float) * TWO_PI
        if self.drive_amplitudes is not None:
            kwargs["drive_amplitudes"] = np.asarray(self.drive_amplitudes, float)
        return SweepConfig(**kwargs)


class QuantityModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    name: str
    value_hz: float
    std_error_hz: float | None
    target: float
    provenance: str
    tolerance: float
    passed: bool = Field(alias="pass")


class PipelineReportModel(BaseModel):
    pipeline: str
    seed: int
    status: str
    quantities: list[QuantityModel]
    notes: list[str]
    duration_s: float | None

    @classmethod
    def from_report(cls, report: PipelineReport) -> "PipelineReportModel":
        return cls.model_validate(report.as_dict())


# ---- requests ----


class SimulateFluxSweepRequest(BaseModel):
    device: DeviceModel | None = None
    sweep: SweepConfigModel = SweepConfigModel()


class SimulateCrossingRequest(BaseModel):
    params: CoupledModeModel
    drive_freqs_hz: list[float]
    trace_points: int = 401
    trace_halfspan_linewidths: float = 5.0
    noise_sigma: float = 0.0
    seed: int = 0


class SimulateUpconversionRequest(BaseModel):
    params: CoupledModeModel
    omega_out_hz: float
    freq_min_hz: float
    freq_max_hz: float
    trace_points: int = 401
    noise_sigma: float = 0.0
    seed: int = 0
    drive_amp: float | None = None


class FitTraceRequest(BaseModel):
    trace: TraceModel
    config: FitConfigModel = FitConfigModel()
    init: dict[str, float] | None = None


class FitCrossingRequest(BaseModel):
    traces: list[TraceModel]
    config: FitConfigModel = FitConfigModel()
    init: dict[str, float] | None = None
    mode: Literal["joint", "per_trace"] = "joint"
    use_trace_scales: bool = True


class PowerLawPoint(BaseModel):
    alpha_d: float
    value_hz: float
    sigma_hz: float | None = None

    def as_tuple(self):
        if self.sigma_hz is None:
            return (self.alpha_d, self.value_hz)
        return (self.alpha_d, self.value_hz, self.sigma_hz)


class FitPowerLawsRequest(BaseModel):
    coupling: list[PowerLawPoint]
    stark: list[PowerLawPoint]


class PipelineRequest(BaseModel):
    device: DeviceModel | None = None
    sweep: SweepConfigModel = SweepConfigModel()
    include_traces: bool = False


class DeviceDeriveRequest(BaseModel):
    device: DeviceModel | None = None
    bias_target_hz: float = 5.408e9
    reference_gradient_hz_per_phi0: float = 1.7e9
    drive_amp: float = 19.2
    kappa_hz: float = 1.5e6
    gamma_hz: float = 300e3


class DeviceDerivation(BaseModel):
    i_zpf_a: float
    b_zpf_t: float
    phi_zpf_wb: float
    phi_zpf_uphi0: float
    omega_a_max_hz: float
    bias_omega_a_hz: float
    bias_phi_ext_phi0: float
    bias_gradient_ghz_per_phi0: float
    bias_kerr_hz: float
    g0_hz: float
    g0_reference_gradient_hz: float
    g_at_drive_hz: float
    stark_shift_hz: float
    cooperativity: float


class TraceSetResponse(BaseModel):
    traces: dict[str, TraceModel]


class PipelineResponse(BaseModel):
    report: PipelineReportModel
    traces: dict[str, TraceModel] | None = None


class HealthResponse(BaseModel):
    status: str
    version: str
