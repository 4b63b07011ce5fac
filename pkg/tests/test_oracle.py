import numpy as np
import pytest

from squidmech.constants import TWO_PI
from squidmech.oracle import (
    IntegratorConfig,
    SteadyStateConvergenceError,
    SteadyStateProblem,
    integrate_to_steady_state,
    mode_matrix,
    s21_from_amplitudes,
    steady_state_s21,
)
from squidmech.spectra import CoupledModeParams, s21_bare, s21_coupled


def _params(**overrides):
    base = dict(omega_a=TWO_PI * 5.408e9, omega_b=TWO_PI * 583.53e6,
                kappa_int=TWO_PI * 0.5e6, kappa_ext=TWO_PI * 1.0e6,
                gamma=TWO_PI * 300e3, g=TWO_PI * 280e3, theta=-0.04 * TWO_PI)
    base.update(overrides)
    return CoupledModeParams(**base)


def _random_tuples(rng, n):
    """Parameter/frequency draws spanning up to +-100 linewidths."""
    out = []
    for _ in range(n):
        kappa = TWO_PI * 10 ** rng.uniform(5.0, 6.8)
        frac = rng.uniform(0.05, 0.95)
        gamma = TWO_PI * 10 ** rng.uniform(4.5, 6.3)
        g = rng.uniform(0.0, 3.0) * kappa
        theta = rng.uniform(-np.pi, np.pi)
        p = CoupledModeParams(
            omega_a=TWO_PI * 5.4e9, omega_b=TWO_PI * 0.58e9,
            kappa_int=frac * kappa, kappa_ext=(1.0 - frac) * kappa,
            gamma=gamma, g=g, theta=theta,
        )
        delta_a = rng.uniform(-100.0, 100.0) * kappa
        delta_b = rng.uniform(-100.0, 100.0) * kappa
        out.append((p, delta_a, delta_b))
    return out


def test_matrix_solver_matches_closed_form_on_sweep():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for p, delta_a, delta_b in _random_tuples(rng, 10_000):
        omega_in = p.omega_a + delta_a
        omega_d = omega_in - p.omega_b - delta_b
        closed = complex(s21_coupled(omega_in, omega_d, p))
        prob = SteadyStateProblem(detuning_a=delta_a, detuning_b=delta_b, p=p)
        solved = steady_state_s21(prob)
        worst = max(worst, abs(solved - closed) / abs(closed))
    assert worst < 1e-10


def test_matrix_solver_bare_limit():
    p = _params(g=0.0)
    delta_a = 0.7 * p.kappa
    prob = SteadyStateProblem(detuning_a=delta_a, detuning_b=0.0, p=p)
    expected = complex(s21_bare(p.omega_a + delta_a, p))
    # rounding from carrying detunings on a 5.4 GHz carrier sits near 1e-13
    assert abs(steady_state_s21(prob) - expected) < 1e-12


def test_problem_validation():
    p = _params(gamma=0.0)
    with pytest.raises(ValueError):
        SteadyStateProblem(detuning_a=0.0, detuning_b=0.0, p=p)


def test_mode_matrix_is_damped():
    p = _params()
    prob = SteadyStateProblem(detuning_a=2 * p.kappa, detuning_b=-3 * p.gamma, p=p)
    ev = np.linalg.eigvals(-1j * mode_matrix(prob))
    assert np.all(ev.real < 0.0)


def test_integration_decoupled_mode():
    p = _params(g=0.0)
    delta_a = 0.4 * p.kappa
    prob = SteadyStateProblem(detuning_a=delta_a, detuning_b=0.1 * p.gamma, p=p)
    a, b = integrate_to_steady_state(prob)
    expected = np.sqrt(p.kappa_ext) / (1j * delta_a + p.kappa / 2.0)
    assert abs(a - expected) / abs(expected) < 1e-7
    assert abs(b) < 1e-9 * abs(a)


def test_integration_matches_linear_solve_on_sweep():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        kappa = TWO_PI * 10 ** rng.uniform(5.5, 6.5)
        frac = rng.uniform(0.1, 0.9)
        gamma = kappa * 10 ** rng.uniform(-1.0, 0.3)
        g = rng.uniform(0.05, 1.5) * kappa
        p = CoupledModeParams(
            omega_a=TWO_PI * 5.4e9, omega_b=TWO_PI * 0.58e9,
            kappa_int=frac * kappa, kappa_ext=(1.0 - frac) * kappa,
            gamma=gamma, g=g, theta=rng.uniform(-np.pi, np.pi),
        )
        prob = SteadyStateProblem(
            detuning_a=rng.uniform(-10, 10) * kappa,
            detuning_b=rng.uniform(-10, 10) * kappa, p=p,
        )
        a, _ = integrate_to_steady_state(prob)
        rel = abs(s21_from_amplitudes(a, prob) - steady_state_s21(prob)) \
            / abs(steady_state_s21(prob))
        worst = max(worst, rel)
    assert worst < 1e-6


def test_integration_step_halving_is_converged():
    p = _params()
    prob = SteadyStateProblem(detuning_a=0.9 * p.kappa, detuning_b=-0.4 * p.gamma, p=p)
    a1, _ = integrate_to_steady_state(prob, IntegratorConfig(step_fraction=0.05))
    a2, _ = integrate_to_steady_state(prob, IntegratorConfig(step_fraction=0.025))
    assert abs(a1 - a2) / abs(a1) < 1e-8


def test_integration_budget_error():
    p = _params()
    prob = SteadyStateProblem(detuning_a=0.0, detuning_b=0.0, p=p)
    with pytest.raises(SteadyStateConvergenceError):
        integrate_to_steady_state(prob, IntegratorConfig(max_linewidths=0.5))
