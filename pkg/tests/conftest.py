import pytest

from squidmech.circuit import paper_device
from squidmech.constants import TWO_PI
from squidmech.spectra import CoupledModeParams


@pytest.fixture(scope="session")
def dev():
    return paper_device()


@pytest.fixture()
def coupled_params():
    """Operating-point parameter set used across the fit tests."""
    return CoupledModeParams(
        omega_a=TWO_PI * 5.408e9,
        omega_b=TWO_PI * 583.53e6,
        kappa_int=TWO_PI * 0.5e6,
        kappa_ext=TWO_PI * 1.0e6,
        gamma=TWO_PI * 300e3,
        g=TWO_PI * 280e3,
        theta=-0.04 * TWO_PI,
    )


def assert_close_rel(value, expected, rel, msg=""):
    ref = max(abs(expected), 1e-300)
    assert abs(value - expected) <= rel * ref, (
        f"{msg}: {value!r} vs {expected!r} (rel err {abs(value - expected) / ref:.3g} > {rel})"
    )


def assert_param_recovery(result, truth, tol=1e-6):
    """Every named parameter recovered to tol (relative, absolute near zero)."""
    for name, expected in truth.items():
        got = result.params[name]
        scale = max(abs(expected), 1.0 if expected == 0.0 else abs(expected))
        assert abs(got - expected) <= tol * scale, (
            f"{name}: {got!r} vs {expected!r} beyond {tol}"
        )
