"""The named fit models applied to spectra.

All models expose their parameters in ordinary frequency (Hz) with unit
suffixes on the names (`omega_a_hz`, `theta_rad`, ...); conversion to
angular frequency happens at the lineshape boundary. Four fits are
provided: the bare notch resonance, a Lorentzian power peak, the joint
avoided-crossing fit of the coupled transmission formula, and the
linear/quadratic drive-power laws (solved in closed form).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..constants import TWO_PI
from ..spectra import SpectrumTrace, s21_bare_formula, s21_formula
from .levmar import FitConfig, FitResult, levenberg_marquardt


class FitRejectedError(RuntimeError):
    """Data carry no usable signature of the model being fitted."""


def _smooth5(y: np.ndarray) -> np.ndarray:
    # 5-point moving average with edge padding.
    if y.size < 5:
        return y.copy()
    padded = np.concatenate([y[:2][::-1], y, y[-2:][::-1]])
    kernel = np.full(5, 0.2)
    return np.convolve(padded, kernel, mode="valid")


def _edge_indices(n: int) -> np.ndarray:
    k = max(3, n // 10)
    return np.concatenate([np.arange(k), np.arange(n - k, n)])


def _refined_extremum(x: np.ndarray, y: np.ndarray, i: int) -> float:
    """Sub-bin extremum location from a parabola through three points."""
    if i == 0 or i == y.size - 1:
        return float(x[i])
    y0, y1, y2 = float(y[i - 1]), float(y[i]), float(y[i + 1])
    denom = y0 - 2.0 * y1 + y2
    if denom == 0.0:
        return float(x[i])
    off = 0.5 * (y0 - y2) / denom
    off = min(max(off, -1.0), 1.0)
    return float(x[i] + off * (x[min(i + 1, x.size - 1)] - x[i]))


def _half_level_width(x: np.ndarray, y: np.ndarray, i_ext: int, level: float,
                      below: bool) -> float:
    """Width of the region around index i_ext where y is below/above level."""
    if below:
        inside = y <= level
    else:
        inside = y >= level
    left = i_ext
    while left > 0 and inside[left - 1]:
        left -= 1
    right = i_ext
    while right < y.size - 1 and inside[right + 1]:
        right += 1
    if right == left:
        return float(x[min(right + 1, x.size - 1)] - x[max(left - 1, 0)])
    return float(x[right] - x[left])


def resonance_initial_guess(trace: SpectrumTrace) -> dict[str, float]:
    """Automated starting point for the bare-resonance fit.

    Dip location from the extremum of the 5-point smoothed magnitude,
    total linewidth from the half-depth width, internal/external split
    from the dip depth, theta starting at zero. Raises FitRejectedError
    when the dip does not rise 3x above the edge-noise estimate.
    """
    f_hz = trace.probe_freqs / TWO_PI
    mag = _smooth5(np.abs(trace.values))
    edges = _edge_indices(mag.size)
    background = float(np.median(mag[edges]))
    noise = float(np.std(np.abs(trace.values)[edges]))
    noise = max(noise, 1e-3 * background, 1e-12)
    i_dip = int(np.argmin(mag))
    depth = background - float(mag[i_dip])
    if depth < 3.0 * noise:
        raise FitRejectedError(
            f"no discernible dip: depth {depth:.3g} < 3 x noise estimate {noise:.3g}"
        )
    kappa_hz = _half_level_width(f_hz, mag, i_dip, background - 0.5 * depth, below=True)
    kappa_hz = max(kappa_hz, 2.0 * float(np.mean(np.diff(f_hz))))
    frac = min(max(depth / background / 2.0, 0.05), 0.95)
    phase = float(np.angle(np.mean(trace.values[edges])))
    return {
        "omega_a_hz": _refined_extremum(f_hz, mag, i_dip),
        "kappa_int_hz": frac * kappa_hz,
        "kappa_ext_hz": (1.0 - frac) * kappa_hz,
        "theta_rad": 0.0,
        "amp": background,
        "amp_phase_rad": phase,
    }


def _bare_model(f_hz, q):
    scale = q["amp"] * np.exp(1j * q["amp_phase_rad"])
    kappa = q["kappa_int_hz"] + q["kappa_ext_hz"]
    return scale * s21_bare_formula(
        TWO_PI * f_hz, TWO_PI * q["omega_a_hz"],
        TWO_PI * q["kappa_int_hz"], TWO_PI * kappa, q["theta_rad"],
    )


def fit_resonance(trace: SpectrumTrace, cfg: FitConfig = FitConfig(),
                  init: dict[str, float] | None = None) -> FitResult:
    """Fit a complex trace to the bare notch times a complex scale."""
    if trace.kind != "complex_s21":
        raise ValueError("fit_resonance needs a complex_s21 trace")
    if init is None:
        init = resonance_initial_guess(trace)
    f_hz = trace.probe_freqs / TWO_PI
    data = trace.values

    def residual(q):
        r = data - _bare_model(f_hz, q)
        return np.concatenate([r.real, r.imag])

    return levenberg_marquardt(residual, init, cfg)


def lorentzian(f_hz, center_hz, fwhm_hz, height, offset):
    """offset + height / (1 + (2 (f - center)/fwhm)^2)."""
    return offset + height / (1.0 + (2.0 * (np.asarray(f_hz, float) - center_hz) / fwhm_hz) ** 2)


def lorentzian_initial_guess(trace: SpectrumTrace) -> dict[str, float]:
    f_hz = trace.probe_freqs / TWO_PI
    y = _smooth5(np.asarray(trace.values, dtype=float))
    i_pk = int(np.argmax(y))
    offset = float(np.min(y))
    height = float(y[i_pk]) - offset
    fwhm = _half_level_width(f_hz, y, i_pk, offset + 0.5 * height, below=False)
    fwhm = max(fwhm, 2.0 * float(np.mean(np.diff(f_hz))))
    return {
        "center_hz": _refined_extremum(f_hz, y, i_pk),
        "fwhm_hz": fwhm,
        "height": max(height, 1e-12),
        "offset": offset,
    }


def fit_lorentzian(trace: SpectrumTrace, cfg: FitConfig = FitConfig(),
                   init: dict[str, float] | None = None) -> FitResult:
    """Fit a single-peaked power trace to a Lorentzian; fwhm reported in Hz."""
    if trace.kind != "power":
        raise ValueError("fit_lorentzian needs a power trace")
    if init is None:
        init = lorentzian_initial_guess(trace)
    f_hz = trace.probe_freqs / TWO_PI
    y = np.asarray(trace.values, dtype=float)

    def residual(q):
        return y - lorentzian(f_hz, q["center_hz"], q["fwhm_hz"], q["height"], q["offset"])

    result = levenberg_marquardt(residual, init, cfg)
    if result.params["fwhm_hz"] < 0.0:  # width enters squared; canonicalize sign
        params = dict(result.params)
        params["fwhm_hz"] = -params["fwhm_hz"]
        result = FitResult(params=params, std_errors=result.std_errors,
                           residual_norm=result.residual_norm,
                           iterations=result.iterations, converged=result.converged,
                           std_errors_reliable=result.std_errors_reliable)
    return result


@dataclass(frozen=True)
class CrossingFitOptions:
    """How the avoided-crossing data set is fitted.

    mode "joint" shares one physical parameter set across all traces;
    "per_trace" fits every trace separately and combines the results by
    inverse-variance weighting. use_trace_scales enables one complex
    amplitude scale per trace (solved by linear projection at every
    residual evaluation, so it never enters the nonlinear parameter
    vector; reported std_errors are conditional on those scales).
    """

    mode: str = "joint"
    use_trace_scales: bool = True

    def __post_init__(self):
        if self.mode not in ("joint", "per_trace"):
            raise ValueError(f"unknown crossing fit mode {self.mode!r}")


def crossing_initial_guess(traces: list[SpectrumTrace]) -> dict[str, float]:
    """Data-driven starting point for the avoided-crossing fit.

    Uses the dip of the most detuned traces for omega_a and kappa, the
    drive at which the central transmission recovers for omega_b, and the
    two-dip separation of that resonant trace for g. Raises
    FitRejectedError when the dips show no mode pulling across the drive
    grid (the crossing is outside the measured window).
    """
    mags = [_smooth5(np.abs(t.values)) for t in traces]
    dips_hz = np.array([
        _refined_extremum(t.probe_freqs / TWO_PI, m, int(np.argmin(m)))
        for t, m in zip(traces, mags)
    ])
    grid_step_hz = float(np.mean(np.diff(traces[0].probe_freqs))) / TWO_PI

    edge = traces[0]
    edge_mag = mags[0]
    f_hz = edge.probe_freqs / TWO_PI
    i_dip = int(np.argmin(edge_mag))
    background = float(np.median(edge_mag[_edge_indices(edge_mag.size)]))
    depth = background - float(edge_mag[i_dip])
    kappa_hz = _half_level_width(f_hz, edge_mag, i_dip,
                                 background - 0.5 * depth, below=True)
    kappa_hz = max(kappa_hz, 2.0 * grid_step_hz)

    pulling = float(np.max(dips_hz) - np.min(dips_hz))
    if pulling < max(0.05 * kappa_hz, grid_step_hz):
        raise FitRejectedError(
            f"no mode-pulling signature: dip spread {pulling:.3g} Hz across the "
            f"drive grid (kappa estimate {kappa_hz:.3g} Hz)"
        )

    omega_a_hz = 0.5 * float(dips_hz[0] + dips_hz[-1])
    # Resonant trace: transmission at omega_a recovers between the split dips.
    center_vals = []
    for t, m in zip(traces, mags):
        i_c = int(np.argmin(np.abs(t.probe_freqs / TWO_PI - omega_a_hz)))
        center_vals.append(m[i_c])
    j_res = int(np.argmax(center_vals))
    omega_b_hz = omega_a_hz - traces[j_res].drive_freq / TWO_PI

    g_hz = _split_dip_halfsep(traces[j_res], mags[j_res], omega_a_hz,
                              background, depth, kappa_hz)
    if g_hz is None:
        g_hz = 0.25 * kappa_hz

    frac = min(max(depth / background / 2.0, 0.05), 0.95)
    return {
        "omega_a_hz": omega_a_hz,
        "omega_b_hz": omega_b_hz,
        "kappa_int_hz": frac * kappa_hz,
        "kappa_hz": kappa_hz,
        "gamma_hz": 0.2 * kappa_hz,
        "g_hz": g_hz,
        "theta_rad": 0.0,
    }


def _split_dip_halfsep(trace, mag, omega_a_hz, background, depth, kappa_hz):
    # Half separation of the deepest qualifying local minima on opposite
    # sides: each must reach a third of the main dip depth and sit within
    # 2 kappa of the line center, which keeps noise wiggles out.
    f_hz = trace.probe_freqs / TWO_PI
    interior = np.arange(1, mag.size - 1)
    is_min = (mag[interior] < mag[interior - 1]) & (mag[interior] <= mag[interior + 1])
    cands = [
        i for i in interior[is_min]
        if background - mag[i] >= depth / 3.0
        and abs(f_hz[i] - omega_a_hz) <= 2.0 * kappa_hz
    ]
    left = [i for i in cands if f_hz[i] < omega_a_hz]
    right = [i for i in cands if f_hz[i] >= omega_a_hz]
    if not left or not right:
        return None
    i_l = min(left, key=lambda i: mag[i])
    i_r = min(right, key=lambda i: mag[i])
    sep = float(f_hz[i_r] - f_hz[i_l])
    if sep <= 0.0:
        return None
    return min(max(0.5 * sep, 0.02 * kappa_hz), 1.5 * kappa_hz)


def _crossing_trace_model(trace: SpectrumTrace, q) -> np.ndarray:
    return s21_formula(
        trace.probe_freqs, trace.drive_freq,
        TWO_PI * q["omega_a_hz"], TWO_PI * q["omega_b_hz"],
        TWO_PI * q["kappa_int_hz"], TWO_PI * q["kappa_hz"],
        TWO_PI * q["gamma_hz"], TWO_PI * q["g_hz"], q["theta_rad"],
    )


def _projected_scale(model: np.ndarray, data: np.ndarray) -> complex:
    denom = np.vdot(model, model).real
    if denom == 0.0:
        return 1.0 + 0.0j
    return np.vdot(model, data) / denom


def fit_avoided_crossing(
    traces: list[SpectrumTrace],
    cfg: FitConfig = FitConfig(),
    options: CrossingFitOptions = CrossingFitOptions(),
    init: dict[str, float] | None = None,
) -> FitResult:
    """Fit the coupled transmission formula across a set of drive frequencies.

    Every trace must be complex with its drive frequency recorded. With an
    automatic starting point the data must show mode pulling; with an
    explicit init the drive grid must bracket the implied resonance
    omega_a - omega_b, otherwise the fit is rejected.
    """
    if len(traces) < 3:
        raise ValueError("need at least 3 traces bracketing the resonance")
    for t in traces:
        if t.kind != "complex_s21" or t.drive_freq is None:
            raise ValueError("crossing traces must be complex with drive_freq set")

    if init is None:
        auto = crossing_initial_guess(traces)
        # The coupling/low-mode-width guesses are the crude ones; restarting
        # from generic values guards against wrong-basin convergence.
        starts = [
            auto,
            {**auto, "g_hz": 0.25 * auto["kappa_hz"], "gamma_hz": 0.2 * auto["kappa_hz"]},
            {**auto, "g_hz": 0.08 * auto["kappa_hz"], "gamma_hz": 0.5 * auto["kappa_hz"]},
        ]
    else:
        drives_hz = np.array([t.drive_freq for t in traces]) / TWO_PI
        res_hz = init["omega_a_hz"] - init["omega_b_hz"]
        if not (drives_hz.min() <= res_hz <= drives_hz.max()):
            raise FitRejectedError(
                f"drive grid [{drives_hz.min():.6g}, {drives_hz.max():.6g}] Hz does "
                f"not bracket the expected resonance at {res_hz:.6g} Hz"
            )
        starts = [init]

    if options.mode == "per_trace":
        return _combine_per_trace(traces, cfg, options, starts[0])

    residual = _joint_residual(traces, options)
    results = []
    for s in starts:
        results.append(levenberg_marquardt(residual, s, cfg))
        if _crossing_result_sane(results[-1]):
            break
    sane = [r for r in results if _crossing_result_sane(r)]
    result = min(sane or results, key=lambda r: r.residual_norm)
    return _canonicalize_crossing(result)


def _joint_residual(traces, options):
    shared_grid = all(
        np.array_equal(t.probe_freqs, traces[0].probe_freqs) for t in traces[1:]
    )
    if shared_grid:
        omega = traces[0].probe_freqs[None, :]
        drives = np.array([t.drive_freq for t in traces])[:, None]
        data = np.stack([t.values for t in traces])

        def residual(q):
            model = s21_formula(
                omega, drives,
                TWO_PI * q["omega_a_hz"], TWO_PI * q["omega_b_hz"],
                TWO_PI * q["kappa_int_hz"], TWO_PI * q["kappa_hz"],
                TWO_PI * q["gamma_hz"], TWO_PI * q["g_hz"], q["theta_rad"],
            )
            if options.use_trace_scales:
                num = np.einsum("ij,ij->i", np.conj(model), data)
                den = np.einsum("ij,ij->i", np.conj(model), model).real
                c = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 1.0)
                model = c[:, None] * model
            r = (data - model).ravel()
            return np.concatenate([r.real, r.imag])

        return residual

    def residual(q):
        parts = []
        for t in traces:
            model = _crossing_trace_model(t, q)
            if options.use_trace_scales:
                model = _projected_scale(model, t.values) * model
            r = t.values - model
            parts.append(r.real)
            parts.append(r.imag)
        return np.concatenate(parts)

    return residual


def _crossing_result_sane(res: FitResult) -> bool:
    p = res.params
    return (
        p["gamma_hz"] > 0.0
        and p["kappa_hz"] > 0.0
        and 0.0 < p["kappa_int_hz"] < p["kappa_hz"]
        and 0.0 <= abs(p["g_hz"]) < 2.0 * p["kappa_hz"]
    )


def _canonicalize_crossing(result: FitResult) -> FitResult:
    # g enters squared through g^2 and symmetrically in the off-diagonal,
    # so report the magnitude.
    if result.params["g_hz"] >= 0.0:
        return result
    params = dict(result.params)
    params["g_hz"] = -params["g_hz"]
    return FitResult(params=params, std_errors=result.std_errors,
                     residual_norm=result.residual_norm,
                     iterations=result.iterations, converged=result.converged,
                     std_errors_reliable=result.std_errors_reliable)


def _combine_per_trace(traces, cfg, options, init) -> FitResult:
    results = []
    for t in traces:
        def residual(q, t=t):
            model = _crossing_trace_model(t, q)
            if options.use_trace_scales:
                model = _projected_scale(model, t.values) * model
            r = t.values - model
            return np.concatenate([r.real, r.imag])

        results.append(levenberg_marquardt(residual, init, cfg))

    names = list(init)
    params, errors = {}, {}
    for name in names:
        vals = np.array([r.params[name] for r in results])
        sigs = np.array([max(r.std_errors[name], 1e-300) for r in results])
        w = 1.0 / sigs**2
        params[name] = float(np.sum(w * vals) / np.sum(w))
        errors[name] = float(np.sqrt(1.0 / np.sum(w)))
    combined = FitResult(
        params=params, std_errors=errors,
        residual_norm=float(np.sqrt(sum(r.residual_norm**2 for r in results))),
        iterations=sum(r.iterations for r in results),
        converged=all(r.converged for r in results),
        std_errors_reliable=all(r.std_errors_reliable for r in results),
    )
    return _canonicalize_crossing(combined)


def _weighted_origin_slope(points) -> tuple[float, float]:
    """Weighted least squares of y = slope * x through the origin.

    points: iterable of (x, y) or (x, y, sigma_y). Returns (slope, std_error).
    """
    pts = [tuple(map(float, p)) for p in points]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points, got {len(pts)}")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    have_sigma = all(len(p) >= 3 and p[2] > 0.0 for p in pts)
    if have_sigma:
        w = np.array([1.0 / p[2] ** 2 for p in pts])
    else:
        w = np.ones_like(x)
    sxx = float(np.sum(w * x * x))
    if sxx == 0.0:
        raise ValueError("all abscissae are zero; slope is undefined")
    slope = float(np.sum(w * x * y)) / sxx
    if have_sigma:
        var = 1.0 / sxx
    else:
        rss = float(np.sum(w * (y - slope * x) ** 2))
        var = rss / (len(pts) - 1) / sxx
    return slope, float(np.sqrt(var))


def fit_power_laws(coupling_points, stark_points) -> FitResult:
    """Drive-power laws: g = g0 * alpha_d and shift = 2 K alpha_d^2.

    coupling_points: (alpha_d, g_hz[, sigma_hz]) tuples, fitted linearly
    through the origin; stark_points: (alpha_d, shift_hz[, sigma_hz])
    tuples, fitted quadratically through the origin. Weights come from the
    sigmas when all are present. Returns params {g0_hz, kerr_hz}.
    """
    g0, g0_err = _weighted_origin_slope(coupling_points)
    stark_xy = [(2.0 * p[0] ** 2, *p[1:]) for p in stark_points]
    kerr, kerr_err = _weighted_origin_slope(stark_xy)

    x_g = np.array([p[0] for p in coupling_points], dtype=float)
    y_g = np.array([p[1] for p in coupling_points], dtype=float)
    x_k = np.array([p[0] for p in stark_points], dtype=float)
    y_k = np.array([p[1] for p in stark_points], dtype=float)
    rss = float(np.sum((y_g - g0 * x_g) ** 2) + np.sum((y_k - 2.0 * kerr * x_k**2) ** 2))
    return FitResult(
        params={"g0_hz": g0, "kerr_hz": kerr},
        std_errors={"g0_hz": g0_err, "kerr_hz": kerr_err},
        residual_norm=float(np.sqrt(rss)),
        iterations=0,
        converged=True,
    )
