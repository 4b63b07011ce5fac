"""Closed-form lineshapes of the coupled two-mode system.

All functions accept scalar or ndarray probe frequencies (rad/s) and
broadcast. The central object is the side-coupled transmission

    S21 = i*kappa_int*(i*gamma/2 + d_b) /
          (g^2 - (i*gamma/2 + d_b)*(i*kappa/2 + d_a)) + exp(i*theta)

with d_a = omega_in - omega_a, d_b = omega_in - omega_d - omega_b and
kappa = kappa_int + kappa_ext. The exp(i*theta) background models the
asymmetric tails of a resonator side-coupled to a feedline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CoupledModeParams:
    """Spectroscopic parameter set of the driven two-mode system (rad/s).

    omega_a: high frequency resonance
    omega_b: low frequency resonance
    kappa_int, kappa_ext: internal / external loss of the high frequency mode
    gamma: intrinsic loss of the low frequency mode
    g: drive-enhanced coupling
    theta: background phase (radians)
    """

    omega_a: float
    omega_b: float
    kappa_int: float
    kappa_ext: float
    gamma: float
    g: float
    theta: float = 0.0

    def __post_init__(self):
        if self.kappa_int < 0.0 or self.kappa_ext < 0.0 or self.gamma < 0.0:
            raise ValueError("loss rates must be >= 0")
        if not self.kappa > 0.0:
            raise ValueError("total linewidth kappa_int + kappa_ext must be > 0")
        if not self.omega_b < self.omega_a:
            raise ValueError("expected omega_b < omega_a")

    @property
    def kappa(self) -> float:
        return self.kappa_int + self.kappa_ext

    def replace(self, **changes) -> "CoupledModeParams":
        from dataclasses import replace
        return replace(self, **changes)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian noise: std dev per quadrature, fixed seed."""

    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError("noise sigma must be >= 0")


@dataclass(frozen=True)
class SpectrumTrace:
    """One frequency sweep: probe grid (rad/s) and measured values.

    kind "complex_s21" stores complex transmission, kind "power" stores a
    real (dimensionless) power. drive_freq/drive_amp are optional metadata.
    """

    probe_freqs: np.ndarray
    values: np.ndarray
    kind: str = "complex_s21"
    drive_freq: float | None = None
    drive_amp: float | None = None
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "probe_freqs", np.asarray(self.probe_freqs, dtype=float))
        if self.kind == "complex_s21":
            object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        elif self.kind == "power":
            object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        else:
            raise ValueError(f"unknown trace kind {self.kind!r}")
        if self.probe_freqs.ndim != 1 or len(self.probe_freqs) == 0:
            raise ValueError("probe_freqs must be a non-empty 1d array")
        if np.any(np.diff(self.probe_freqs) <= 0.0):
            raise ValueError("probe_freqs must be strictly increasing")
        if self.values.shape != self.probe_freqs.shape:
            raise ValueError("values must have one entry per probe frequency")

    def __len__(self):
        return len(self.probe_freqs)


def coupled_denominator(delta_a, delta_b, kappa: float, gamma: float, g: float):
    # Shared by transmission and upconversion: g^2 - (i*gamma/2 + d_b)(i*kappa/2 + d_a).
    return g**2 - (0.5j * gamma + delta_b) * (0.5j * kappa + delta_a)


def s21_formula(omega_in, omega_d, omega_a, omega_b, kappa_int, kappa, gamma, g, theta):
    """Coupled transmission from raw rates (rad/s); no validation."""
    omega_in = np.asarray(omega_in, dtype=float)
    delta_a = omega_in - omega_a
    delta_b = omega_in - omega_d - omega_b
    num = 1j * kappa_int * (0.5j * gamma + delta_b)
    return num / coupled_denominator(delta_a, delta_b, kappa, gamma, g) + np.exp(1j * theta)


def s21_bare_formula(omega_in, omega_a, kappa_int, kappa, theta):
    """Bare notch transmission from raw rates (rad/s); no validation."""
    delta_a = np.asarray(omega_in, dtype=float) - omega_a
    return np.exp(1j * theta) - 1j * kappa_int / (delta_a + 0.5j * kappa)


def s21_coupled(omega_in, omega_d, p: CoupledModeParams):
    """Complex transmission of the driven coupled system.

    omega_in: probe frequency [rad/s], scalar or array
    omega_d: sideband drive frequency [rad/s]
    """
    return s21_formula(omega_in, omega_d, p.omega_a, p.omega_b,
                       p.kappa_int, p.kappa, p.gamma, p.g, p.theta)


def s21_bare(omega_in, p: CoupledModeParams):
    """Bare notch resonance: the exact g = 0 reduction of s21_coupled."""
    return s21_bare_formula(omega_in, p.omega_a, p.kappa_int, p.kappa, p.theta)


def upconversion_power(omega_in, p: CoupledModeParams, omega_out_fixed: float):
    """Normalized upconverted power versus input frequency.

    The output is held at omega_out_fixed (drive implied at omega_out -
    omega_in), so d_a = omega_out_fixed - omega_a and d_b = omega_in -
    omega_b. The conversion amplitude shares its denominator with
    s21_coupled; the trace is scaled to unit maximum. A zero-coupling
    system converts nothing and returns zeros.
    """
    delta_a = omega_out_fixed - p.omega_a
    delta_b = np.asarray(omega_in, dtype=float) - p.omega_b
    amp = p.g / coupled_denominator(delta_a, delta_b, p.kappa, p.gamma, p.g)
    power = np.abs(amp) ** 2
    peak = np.max(power)
    if peak == 0.0:
        return np.zeros_like(power)
    return power / peak


def normal_mode_frequencies(p: CoupledModeParams, omega_d: float) -> np.ndarray:
    """Complex eigenvalues of the coupled-mode matrix, sorted by real part.

    Matrix [[omega_a - i*kappa/2, g], [g, omega_d + omega_b - i*gamma/2]];
    at resonance with kappa = gamma the real-part splitting is exactly 2g.
    """
    m = np.array(
        [[p.omega_a - 0.5j * p.kappa, p.g],
         [p.g, omega_d + p.omega_b - 0.5j * p.gamma]],
        dtype=complex,
    )
    ev = np.linalg.eigvals(m)
    return ev[np.argsort(ev.real)]


def synthesize_trace(grid, omega_d: float, p: CoupledModeParams,
                     noise: NoiseSpec = NoiseSpec()) -> SpectrumTrace:
    """Evaluate s21_coupled on a grid and add seeded complex Gaussian noise."""
    grid = np.asarray(grid, dtype=float)
    values = s21_coupled(grid, omega_d, p)
    if noise.sigma > 0.0:
        rng = np.random.default_rng(noise.seed)
        values = values + noise.sigma * (
            rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        )
    return SpectrumTrace(probe_freqs=grid, values=values, kind="complex_s21",
                         drive_freq=omega_d, seed=noise.seed)


def synthesize_upconversion_trace(grid, p: CoupledModeParams, omega_out_fixed: float,
                                  noise: NoiseSpec = NoiseSpec(),
                                  drive_amp: float | None = None) -> SpectrumTrace:
    """Normalized upconversion band on a grid plus seeded real Gaussian noise."""
    grid = np.asarray(grid, dtype=float)
    power = upconversion_power(grid, p, omega_out_fixed)
    if noise.sigma > 0.0:
        rng = np.random.default_rng(noise.seed)
        power = power + noise.sigma * rng.standard_normal(grid.shape)
    return SpectrumTrace(probe_freqs=grid, values=power, kind="power",
                         drive_freq=None, drive_amp=drive_amp, seed=noise.seed)
