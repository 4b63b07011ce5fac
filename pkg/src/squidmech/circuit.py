"""Lumped-element model of the coupled-resonator device.

Maps the geometric and electrical constants of the circuit (capacitances,
inductances, SQUID loop area, coupling-wire distance) to the spectroscopic
quantities of the coupled system:

* zero-point current and flux of the low frequency LC mode,
  I_zpf = sqrt(hbar * omega_b^3 * C / 2),
  Phi_zpf = A * mu0 * I_zpf / (2 pi d)
* flux-dependent resonance of the SQUID resonator,
  omega_a(phi) = 1 / sqrt((L_geo + L_J(phi)) * C_a)
  with L_J(phi) = L_J0 / |cos(pi phi / Phi0)| and the loop flux phi obtained
  from the applied flux by a self-consistent screening equation
  phi = phi_ext - L_loop * I_circ(phi)
* bare coupling g0 = Phi_zpf * |d omega_a / d Phi_ext|, the drive-enhanced
  coupling g = g0 * alpha_d, the self-Kerr constant
  K = E_c (L_J / L_tot)^3 / hbar with E_c = e^2 omega_a^2 L_tot / 2,
  the Stark shift 2 K alpha_d^2, and the cooperativity 4 g^2 / (kappa gamma).

All quantities are SI with angular frequencies; every function here is pure
and every value object immutable, so evaluation is safe from any thread.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .constants import E_CHARGE, HBAR, MU0, PHI0, TWO_PI


class FluxSingularityError(ValueError):
    """Flux too close to the half-quantum divergence of the SQUID inductance."""


class ScreeningConvergenceError(RuntimeError):
    """Self-consistent loop-flux iteration failed to converge."""

    def __init__(self, message, iterations):
        super().__init__(f"{message} (after {iterations} iterations)")
        self.iterations = iterations


# Refuse to evaluate L_J within this distance (in units of Phi0) of half flux.
DEFAULT_FLUX_CLAMP = 0.02

# Damped fixed-point iteration for the screening equation.
SCREENING_TOL = 1e-12          # in units of Phi0
SCREENING_MAX_ITER = 200
SCREENING_DAMPING = 0.7


DEVICE_FIELDS = (
    "c_low", "omega_b", "loop_area", "wire_distance",
    "l_geo", "l_loop", "l_j0", "omega_a_max",
)


@dataclass(frozen=True)
class DeviceParams:
    """Electrical and geometric constants of the physical circuit (SI).

    c_low          capacitance of the low frequency resonator [F]
    omega_b        low frequency resonance [rad/s]
    loop_area      SQUID loop area [m^2]
    wire_distance  distance between the inductive wire and the loop [m]
    l_geo          geometric inductance of the high frequency resonator [H]
    l_loop         self-inductance of the SQUID loop [H]
    l_j0           Josephson inductance at zero flux [H]
    omega_a_max    maximum (zero flux) high frequency resonance [rad/s]
    """

    c_low: float
    omega_b: float
    loop_area: float
    wire_distance: float
    l_geo: float
    l_loop: float
    l_j0: float
    omega_a_max: float

    def __post_init__(self):
        for name in DEVICE_FIELDS:
            value = getattr(self, name)
            if not value > 0.0:
                raise ValueError(f"DeviceParams.{name} must be > 0, got {value!r}")
        if not (self.l_loop < self.l_j0 < self.l_geo):
            raise ValueError(
                "expected l_loop < l_j0 < l_geo (large L_geo/L_J regime), got "
                f"l_loop={self.l_loop!r}, l_j0={self.l_j0!r}, l_geo={self.l_geo!r}"
            )

    @property
    def shunt_capacitance(self) -> float:
        """C_a fixed by omega_a_max = 1/sqrt((l_geo + l_j0) C_a) [F]."""
        return 1.0 / (self.omega_a_max**2 * (self.l_geo + self.l_j0))


@dataclass(frozen=True)
class BiasPoint:
    """Operating point of the flux-tunable resonator.

    phi_ext   applied external flux [Wb]
    omega_a   resonance at this bias [rad/s]
    gradient  d omega_a / d phi_ext [rad/s per Wb], negative on (0, Phi0/2)
    kerr      self-Kerr constant K [rad/s]
    l_j       Josephson inductance at this bias [H]
    """

    phi_ext: float
    omega_a: float
    gradient: float
    kerr: float
    l_j: float


def zero_point_current(dev: DeviceParams) -> float:
    """Zero-point current of the low frequency mode, sqrt(hbar omega_b^3 C / 2) [A]."""
    if not (dev.c_low > 0.0 and dev.omega_b > 0.0):
        raise ValueError("zero_point_current needs c_low > 0 and omega_b > 0")
    return math.sqrt(HBAR * dev.omega_b**3 * dev.c_low / 2.0)


def zero_point_flux(dev: DeviceParams) -> float:
    """Zero-point flux threading the SQUID loop, A * mu0 * I_zpf / (2 pi d) [Wb]."""
    if not dev.wire_distance > 0.0:
        raise ValueError("zero_point_flux needs wire_distance > 0 (field diverges)")
    b_zpf = MU0 * zero_point_current(dev) / (TWO_PI * dev.wire_distance)
    return dev.loop_area * b_zpf


def josephson_inductance(phi_loop: float, dev: DeviceParams,
                         clamp: float = DEFAULT_FLUX_CLAMP) -> float:
    """SQUID inductance L_J0 / |cos(pi phi / Phi0)| at loop flux phi_loop [H].

    Even and Phi0-periodic in phi_loop, minimum l_j0 at zero flux. Raises
    FluxSingularityError within `clamp` (units of Phi0) of the half-flux
    divergence.
    """
    u = phi_loop / PHI0
    dist = abs(u - math.floor(u + 0.5))   # distance to nearest integer
    if 0.5 - dist < clamp:                # i.e. within `clamp` of half flux
        raise FluxSingularityError(
            f"loop flux {u:.4f} Phi0 is within {clamp} Phi0 of the half-flux "
            "divergence of the SQUID inductance"
        )
    return dev.l_j0 / abs(math.cos(math.pi * u))


def _circulating_flux(u: float, beta: float) -> float:
    # Screening term L_loop*I_circ in units of Phi0; the sign(cos) factor keeps
    # the branch Phi0-periodic and odd.
    c = math.cos(math.pi * u)
    s = math.sin(math.pi * u)
    return beta * s * math.copysign(1.0, c)


def screened_loop_flux(phi_ext: float, dev: DeviceParams) -> tuple[float, int]:
    """Solve phi = phi_ext - L_loop*I_circ(phi) for the loop flux [Wb].

    The applied flux is folded to the nearest flux quantum and the damped
    fixed-point iteration is seeded at the folded value, which keeps the
    resulting omega_a(phi_ext) even, Phi0-periodic and single valued.
    Returns (phi_loop, iterations).
    """
    beta = dev.l_loop * (PHI0 / (TWO_PI * dev.l_j0)) / PHI0
    u_ext = phi_ext / PHI0
    n = math.floor(u_ext + 0.5)
    uf = u_ext - n                      # folded to [-1/2, 1/2]
    if beta == 0.0:
        return (uf + n) * PHI0, 0
    u = uf
    for it in range(SCREENING_MAX_ITER):
        target = uf - _circulating_flux(u, beta)
        if abs(target - u) < SCREENING_TOL:
            return (u + n) * PHI0, it
        u = (1.0 - SCREENING_DAMPING) * u + SCREENING_DAMPING * target
    raise ScreeningConvergenceError(
        f"loop-flux screening iteration did not reach {SCREENING_TOL} Phi0 "
        f"at phi_ext = {u_ext:.6f} Phi0", SCREENING_MAX_ITER,
    )


def _omega_from_lj(l_j: float, dev: DeviceParams) -> float:
    return 1.0 / math.sqrt((dev.l_geo + l_j) * dev.shunt_capacitance)


def _kerr_from_bias(omega_a: float, l_j: float, dev: DeviceParams) -> float:
    l_tot = dev.l_geo + l_j
    e_c = E_CHARGE**2 * omega_a**2 * l_tot / 2.0
    return e_c * (l_j / l_tot) ** 3 / HBAR


def _gradient_at_loop_flux(u: float, omega_a: float, l_j: float,
                           dev: DeviceParams) -> float:
    # Chain rule through the converged screening solution:
    #   d omega / d L_J     = -omega / (2 (L_geo + L_J))
    #   d L_J   / d phi     =  L_J * (pi/Phi0) * sin(pi u) * sign(cos) / |cos|
    #   d phi   / d phi_ext =  1 / (1 + beta * pi * |cos(pi u)|)
    # The sign(cos) factor keeps the derivative of L_J0/|cos| correct on
    # branches beyond half flux (u folded by whole quanta).
    beta = dev.l_loop / (TWO_PI * dev.l_j0)
    c = math.cos(math.pi * u)
    dw_dlj = -omega_a / (2.0 * (dev.l_geo + l_j))
    dlj_du = l_j * math.pi * math.sin(math.pi * u) * math.copysign(1.0, c) / abs(c)
    du_duext = 1.0 / (1.0 + beta * math.pi * abs(c))
    return dw_dlj * dlj_du * du_duext / PHI0


def resonator_frequency(phi_ext: float, dev: DeviceParams,
                        clamp: float = DEFAULT_FLUX_CLAMP) -> BiasPoint:
    """Bias point of the flux-tunable resonator at applied flux phi_ext [Wb]."""
    phi_loop, _ = screened_loop_flux(phi_ext, dev)
    l_j = josephson_inductance(phi_loop, dev, clamp=clamp)
    omega_a = _omega_from_lj(l_j, dev)
    grad = _gradient_at_loop_flux(phi_loop / PHI0, omega_a, l_j, dev)
    kerr = _kerr_from_bias(omega_a, l_j, dev)
    return BiasPoint(phi_ext=phi_ext, omega_a=omega_a, gradient=grad,
                     kerr=kerr, l_j=l_j)


def bias_for_frequency(omega_target: float, dev: DeviceParams,
                       clamp: float = DEFAULT_FLUX_CLAMP) -> BiasPoint:
    """Bias point with omega_a = omega_target, on the zero-flux branch.

    Solved in closed form for the loop flux; the reported phi_ext is the
    preimage on the branch connected to zero flux, which can exceed Phi0/2
    inside the hysteretic window of the screening equation.
    """
    if not 0.0 < omega_target <= dev.omega_a_max:
        raise ValueError(
            f"target {omega_target!r} rad/s outside (0, omega_a_max]"
        )
    l_j = 1.0 / (omega_target**2 * dev.shunt_capacitance) - dev.l_geo
    if l_j < dev.l_j0:
        raise ValueError("target frequency above the zero-flux resonance")
    u = math.acos(dev.l_j0 / l_j) / math.pi
    if u > 0.5 - clamp:
        raise FluxSingularityError(
            f"target frequency requires loop flux {u:.4f} Phi0, inside the "
            f"{clamp} Phi0 clamp around half flux"
        )
    beta = dev.l_loop / (TWO_PI * dev.l_j0)
    phi_ext = (u + beta * math.sin(math.pi * u)) * PHI0
    grad = _gradient_at_loop_flux(u, omega_target, l_j, dev)
    kerr = _kerr_from_bias(omega_target, l_j, dev)
    return BiasPoint(phi_ext=phi_ext, omega_a=omega_target, gradient=grad,
                     kerr=kerr, l_j=l_j)


def kerr_constant(bias: BiasPoint, dev: DeviceParams) -> float:
    """Self-Kerr constant K = E_c (L_J/L_tot)^3 / hbar at a bias point [rad/s]."""
    return _kerr_from_bias(bias.omega_a, bias.l_j, dev)


def bare_coupling(bias: BiasPoint, dev: DeviceParams) -> float:
    """Bare coupling g0 = Phi_zpf * |d omega_a / d phi_ext| [rad/s]."""
    return zero_point_flux(dev) * abs(bias.gradient)


def effective_coupling(g0: float, alpha_d: float) -> float:
    """Drive-enhanced coupling g = g0 * alpha_d [rad/s]."""
    if alpha_d < 0.0:
        raise ValueError(f"drive amplitude alpha_d must be >= 0, got {alpha_d!r}")
    return g0 * alpha_d


def stark_shift(kerr: float, alpha_d: float) -> float:
    """Drive-induced frequency shift 2 K alpha_d^2 [rad/s]."""
    return 2.0 * kerr * alpha_d**2


def cooperativity(g: float, kappa: float, gamma: float) -> float:
    """Dimensionless cooperativity 4 g^2 / (kappa gamma)."""
    if not (kappa > 0.0 and gamma > 0.0):
        raise ValueError("cooperativity needs kappa > 0 and gamma > 0")
    return 4.0 * g**2 / (kappa * gamma)


def load_device(path: str | Path) -> DeviceParams:
    """Read DeviceParams from a JSON file with SI-unit values.

    The document must contain exactly the DeviceParams field names.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(
            f"{path}: line {exc.lineno}: invalid JSON ({exc.msg})"
        ) from exc
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: expected a JSON object with device fields")
    missing = [k for k in DEVICE_FIELDS if k not in raw]
    extra = [k for k in raw if k not in DEVICE_FIELDS]
    if missing:
        raise ValueError(f"{path}: missing key(s) {', '.join(missing)}")
    if extra:
        raise ValueError(f"{path}: unknown key(s) {', '.join(extra)}")
    values = {}
    for key in DEVICE_FIELDS:
        if not isinstance(raw[key], (int, float)) or isinstance(raw[key], bool):
            raise ValueError(f"{path}: key {key!r} must be a number")
        values[key] = float(raw[key])
    return DeviceParams(**values)


def paper_device() -> DeviceParams:
    """The bundled device parameter set used throughout the documentation."""
    with resources.as_file(
        resources.files("squidmech.data").joinpath("paper_device.json")
    ) as p:
        return load_device(p)
