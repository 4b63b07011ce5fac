"""Small deterministic Levenberg-Marquardt engine.

Damping is multiplicative: lambda starts at initial_damping times the
largest diagonal entry of J^T J, grows by damping_up on a rejected step
and shrinks by damping_down on an accepted one, so accepted steps never
increase the residual norm. Jacobians are forward finite differences with
a relative step of 1e-7 on internally rescaled (order-1) parameters.
Everything is plain numpy; identical inputs give bitwise-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FD_RELATIVE_STEP = 1e-7


@dataclass(frozen=True)
class FitConfig:
    """Iteration budget, tolerances and the damping schedule.

    A fit counts as converged when its scaled gradient is below
    gradient_tolerance, where the scaled gradient is the smaller of the
    absolute gradient max|J^T r| (order-1 internal parameters) and the
    largest residual/column cosine max_j |(J^T r)_j| / (|J_j| |r|); the
    former detects exact fits, the latter is the dimensionless optimality
    measure for noisy data. step_tolerance is the relative parameter step
    at which iteration stops.
    """

    max_iterations: int = 200
    gradient_tolerance: float = 1e-4
    step_tolerance: float = 1e-12
    initial_damping: float = 1e-3
    damping_up: float = 10.0
    damping_down: float = 0.1

    def __post_init__(self):
        if self.gradient_tolerance <= 0.0 or self.step_tolerance <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class FitResult:
    """Outcome of a least-squares fit.

    params/std_errors are name -> value maps in the units the model was
    declared in. std_errors come from the linearized covariance at the
    optimum scaled by the residual variance; std_errors_reliable is False
    when the Jacobian was rank deficient there. Non-convergence is reported
    through converged=False, never as an exception.
    """

    params: dict[str, float]
    std_errors: dict[str, float]
    residual_norm: float
    iterations: int
    converged: bool
    std_errors_reliable: bool = True

    def as_dict(self) -> dict:
        return {
            "params": dict(self.params),
            "std_errors": dict(self.std_errors),
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "converged": self.converged,
            "std_errors_reliable": self.std_errors_reliable,
        }


def _jacobian(fn, x, r0):
    jac = np.empty((r0.size, x.size))
    for j in range(x.size):
        h = FD_RELATIVE_STEP * max(abs(x[j]), 1.0)
        xp = x.copy()
        xp[j] += h
        jac[:, j] = (fn(xp) - r0) / h
    return jac


def _scaled_grad_norm(jac, grad, cost):
    grad_inf = float(np.max(np.abs(grad)))
    norm_r = np.sqrt(cost)
    col_norms = np.linalg.norm(jac, axis=0)
    denom = col_norms * norm_r
    with np.errstate(divide="ignore", invalid="ignore"):
        cosines = np.where(denom > 0.0, np.abs(grad) / denom, 0.0)
    return min(grad_inf, float(np.max(cosines)))


def levenberg_marquardt(residual_fn, init: dict[str, float],
                        cfg: FitConfig = FitConfig(),
                        cost_history: list | None = None) -> FitResult:
    """Minimize the sum of squared residuals of residual_fn.

    residual_fn maps a name -> value dict to a 1d real residual array
    (complex data must be split into two real components by the model).
    init supplies both the parameter names and the starting point. The
    problem must have more residuals than parameters. cost_history, when
    given, collects the initial cost and the cost after every accepted
    step.
    """
    names = list(init)
    x0 = np.array([float(init[k]) for k in names])
    if not np.all(np.isfinite(x0)):
        raise ValueError("initial parameters must be finite")

    # Work on order-1 parameters internally.
    scales = np.where(np.abs(x0) > 0.0, np.abs(x0), 1.0)

    def fn(z):
        r = np.asarray(residual_fn(dict(zip(names, z * scales))), dtype=float)
        return r.ravel()

    z = x0 / scales
    r = fn(z)
    if r.size <= z.size:
        raise ValueError(
            f"need more residuals ({r.size}) than parameters ({z.size})"
        )
    cost = float(r @ r)
    if cost_history is not None:
        cost_history.append(cost)

    lam = None
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        jac = _jacobian(fn, z, r)
        grad = jac.T @ r
        jtj = jac.T @ jac
        if lam is None:
            lam = cfg.initial_damping * float(np.max(np.diag(jtj)))
            if lam <= 0.0:
                lam = cfg.initial_damping
        accepted = False
        while True:
            try:
                step = np.linalg.solve(jtj + lam * np.eye(z.size), -grad)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(jtj + lam * np.eye(z.size), -grad, rcond=None)[0]
            r_new = fn(z + step)
            cost_new = float(r_new @ r_new)
            if cost_new < cost:
                z = z + step
                r = r_new
                cost = cost_new
                if cost_history is not None:
                    cost_history.append(cost)
                lam *= cfg.damping_down
                accepted = True
                break
            lam *= cfg.damping_up
            if lam > 1e15 * max(float(np.max(np.diag(jtj))), 1.0):
                break
        if not accepted:
            break
        if np.linalg.norm(step) < cfg.step_tolerance * (np.linalg.norm(z) + cfg.step_tolerance):
            break

    # Final Jacobian at the optimum: convergence flag and covariance.
    jac = _jacobian(fn, z, r)
    grad = jac.T @ r
    converged = _scaled_grad_norm(jac, grad, cost) < cfg.gradient_tolerance

    jtj = jac.T @ jac
    dof = max(r.size - z.size, 1)
    s2 = cost / dof
    reliable = True
    try:
        cov = np.linalg.inv(jtj) * s2
        diag = np.diag(cov).copy()
        if np.any(diag < 0.0) or not np.all(np.isfinite(diag)):
            raise np.linalg.LinAlgError
        cond = np.linalg.cond(jtj)
        if not np.isfinite(cond) or cond > 1e12:
            reliable = False
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(jtj) * s2
        diag = np.abs(np.diag(cov))
        reliable = False
    std = np.sqrt(np.maximum(diag, 0.0)) * scales

    x = z * scales
    return FitResult(
        params=dict(zip(names, x.tolist())),
        std_errors=dict(zip(names, std.tolist())),
        residual_norm=float(np.sqrt(cost)),
        iterations=iterations,
        converged=converged,
        std_errors_reliable=reliable,
    )
