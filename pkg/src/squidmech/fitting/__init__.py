from .levmar import FitConfig, FitResult, levenberg_marquardt
from .models import (
    CrossingFitOptions,
    FitRejectedError,
    crossing_initial_guess,
    fit_avoided_crossing,
    fit_lorentzian,
    fit_power_laws,
    fit_resonance,
    lorentzian,
    lorentzian_initial_guess,
    resonance_initial_guess,
)

__all__ = [
    "FitConfig",
    "FitResult",
    "levenberg_marquardt",
    "CrossingFitOptions",
    "FitRejectedError",
    "crossing_initial_guess",
    "fit_avoided_crossing",
    "fit_lorentzian",
    "fit_power_laws",
    "fit_resonance",
    "lorentzian",
    "lorentzian_initial_guess",
    "resonance_initial_guess",
]
