"""Physical constants used throughout the package (SI, CODATA 2018)."""

from dataclasses import dataclass, field

import scipy.constants


@dataclass(frozen=True)
class PhysicalConstants:
    """Fundamental constants in SI units.

    flux_quantum is h/2e = pi*hbar/e, the superconducting flux quantum.
    """

    hbar: float = scipy.constants.hbar            # J s
    e_charge: float = scipy.constants.e           # C
    mu0: float = scipy.constants.mu_0             # H/m
    flux_quantum: float = field(
        default=scipy.constants.h / (2.0 * scipy.constants.e)
    )                                             # Wb

    def __post_init__(self):
        expected = scipy.constants.pi * self.hbar / self.e_charge
        if abs(self.flux_quantum - expected) > 1e-12 * expected:
            raise ValueError(
                f"flux_quantum={self.flux_quantum!r} inconsistent with "
                f"pi*hbar/e={expected!r}"
            )


CONSTANTS = PhysicalConstants()

HBAR = CONSTANTS.hbar
E_CHARGE = CONSTANTS.e_charge
MU0 = CONSTANTS.mu0
PHI0 = CONSTANTS.flux_quantum

TWO_PI = 2.0 * scipy.constants.pi
