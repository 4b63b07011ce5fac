import numpy as np
import pytest

from squidmech.constants import TWO_PI
from squidmech.spectra import (
    CoupledModeParams,
    NoiseSpec,
    SpectrumTrace,
    coupled_denominator,
    normal_mode_frequencies,
    s21_bare,
    s21_coupled,
    synthesize_trace,
    synthesize_upconversion_trace,
    upconversion_power,
)

from conftest import assert_close_rel


def _params(**overrides):
    base = dict(omega_a=TWO_PI * 5.408e9, omega_b=TWO_PI * 583.53e6,
                kappa_int=TWO_PI * 0.5e6, kappa_ext=TWO_PI * 1.0e6,
                gamma=TWO_PI * 300e3, g=TWO_PI * 280e3, theta=-0.04 * TWO_PI)
    base.update(overrides)
    return CoupledModeParams(**base)


def test_params_validation():
    with pytest.raises(ValueError):
        _params(kappa_int=-1.0)
    with pytest.raises(ValueError):
        _params(kappa_int=0.0, kappa_ext=0.0)
    with pytest.raises(ValueError):
        _params(omega_b=TWO_PI * 6e9)


def test_trace_validation():
    with pytest.raises(ValueError):
        SpectrumTrace(probe_freqs=np.array([2.0, 1.0]), values=np.array([1, 2]))
    with pytest.raises(ValueError):
        SpectrumTrace(probe_freqs=np.array([1.0, 2.0]), values=np.array([1.0]))
    with pytest.raises(ValueError):
        SpectrumTrace(probe_freqs=np.array([1.0, 2.0]), values=np.array([1.0, 2.0]),
                      kind="wiggle")


def test_on_resonance_bare_value():
    # g = 0, theta = 0, probe at omega_a: 1 - 2 kappa_int / kappa, purely real
    p = _params(g=0.0, theta=0.0)
    val = complex(s21_coupled(p.omega_a, p.omega_a - p.omega_b, p))
    assert_close_rel(val.real, 1.0 - 2.0 * p.kappa_int / p.kappa, 1e-12, "dip depth")
    assert abs(val.imag) < 1e-12


def test_doubly_resonant_value():
    p = _params(theta=0.0)
    val = complex(s21_coupled(p.omega_a, p.omega_a - p.omega_b, p))
    expected = 1.0 - (p.kappa_int * p.gamma / 2.0) / (p.g**2 + p.kappa * p.gamma / 4.0)
    assert_close_rel(val.real, expected, 1e-12, "doubly resonant")
    assert abs(val.imag) < 1e-12


def test_bare_equals_coupled_at_zero_g():
    p = _params(g=0.0)
    grid = np.linspace(p.omega_a - 8 * p.kappa, p.omega_a + 8 * p.kappa, 501)
    a = s21_coupled(grid, p.omega_a - p.omega_b, p)
    b = s21_bare(grid, p)
    assert np.max(np.abs(a - b) / np.abs(b)) < 1e-15


def test_background_phase_limit():
    # far off resonance the transmission settles onto exp(i theta)
    p = _params(g=0.0)
    far = p.omega_a + 5000.0 * p.kappa
    val = complex(s21_coupled(far, p.omega_a - p.omega_b, p))
    assert abs(val - np.exp(1j * p.theta)) < 1e-3


def test_background_envelope():
    # |S21 - exp(i theta)| < kappa_int / |delta_a| for |delta_a| > 100 kappa
    p = _params()
    omega_d = p.omega_a - p.omega_b
    for n in (101.0, 300.0, 1000.0, -101.0, -300.0, -1000.0):
        w = p.omega_a + n * p.kappa
        val = complex(s21_coupled(w, omega_d, p))
        assert abs(val - np.exp(1j * p.theta)) < p.kappa_int / abs(w - p.omega_a)


def test_bare_dip_sits_at_omega_a_for_zero_theta():
    p = _params(g=0.0, theta=0.0)
    grid = np.linspace(p.omega_a - 4 * p.kappa, p.omega_a + 4 * p.kappa, 4001)
    mag = np.abs(s21_bare(grid, p))
    assert abs(grid[int(np.argmin(mag))] - p.omega_a) <= grid[1] - grid[0]


def test_theta_breaks_tail_symmetry():
    p = _params(g=0.0)
    d = 3.0 * p.kappa
    hi = abs(complex(s21_bare(p.omega_a + d, p)))
    lo = abs(complex(s21_bare(p.omega_a - d, p)))
    assert abs(hi - lo) > 1e-3
    p0 = _params(g=0.0, theta=0.0)
    assert abs(abs(complex(s21_bare(p0.omega_a + d, p0)))
               - abs(complex(s21_bare(p0.omega_a - d, p0)))) < 1e-12


def test_resonant_magnitude_symmetry():
    # theta = 0 at the matched drive: |S21| even around omega_a
    p = _params(theta=0.0)
    omega_d = p.omega_a - p.omega_b
    d = np.linspace(0.0, 5.0, 201) * p.kappa
    hi = np.abs(s21_coupled(p.omega_a + d, omega_d, p))
    lo = np.abs(s21_coupled(p.omega_a - d, omega_d, p))
    assert np.max(np.abs(hi - lo)) < 1e-12


def test_split_dip_separation_grows_with_g():
    p0 = _params(theta=0.0)
    omega_d = p0.omega_a - p0.omega_b
    seps = []
    for mult in (1.0, 2.0, 4.0, 7.0, 10.0):
        p = _params(theta=0.0, g=mult * p0.kappa)
        grid = np.linspace(p.omega_a - 1.5 * p.g - 3 * p.kappa,
                           p.omega_a + 1.5 * p.g + 3 * p.kappa, 8001)
        mag = np.abs(s21_coupled(grid, omega_d, p))
        interior = np.arange(1, mag.size - 1)
        mins = interior[(mag[interior] < mag[interior - 1])
                        & (mag[interior] <= mag[interior + 1])]
        left = mins[grid[mins] < p.omega_a]
        right = mins[grid[mins] >= p.omega_a]
        assert left.size and right.size, f"no split dips at g = {mult} kappa"
        i_l = left[np.argmin(mag[left])]
        i_r = right[np.argmin(mag[right])]
        seps.append(grid[i_r] - grid[i_l])
    assert np.all(np.diff(seps) > 0.0)


def test_upconversion_peak_and_width():
    p = _params(g=TWO_PI * 120e3)
    grid = np.linspace(p.omega_b - TWO_PI * 2e6, p.omega_b + TWO_PI * 2e6, 40001)
    power = upconversion_power(grid, p, p.omega_a)  # delta_a = 0
    assert power.max() == pytest.approx(1.0)
    assert abs(grid[np.argmax(power)] - p.omega_b) < TWO_PI * 1e3
    above = grid[power >= 0.5]
    fwhm_hz = (above[-1] - above[0]) / TWO_PI
    purcell_hz = (p.gamma + 4.0 * p.g**2 / p.kappa) / TWO_PI
    assert_close_rel(fwhm_hz, purcell_hz, 1e-3, "FWHM vs Purcell width")
    assert abs(fwhm_hz - 340e3) <= 0.10 * 340e3


def test_upconversion_zero_coupling_is_dark():
    p = _params(g=0.0)
    grid = np.linspace(p.omega_b - TWO_PI * 1e6, p.omega_b + TWO_PI * 1e6, 101)
    assert np.all(upconversion_power(grid, p, p.omega_a) == 0.0)


def test_upconversion_shares_coupled_denominator():
    # reconstruct the denominator from the transmission and verify the
    # upconversion lineshape is |g/denominator|^2 with matched detunings
    p = _params(g=TWO_PI * 120e3)
    grid = np.linspace(p.omega_b - TWO_PI * 1.5e6, p.omega_b + TWO_PI * 1.5e6, 801)
    delta_b = grid - p.omega_b
    den = coupled_denominator(0.0, delta_b, p.kappa, p.gamma, p.g)
    direct = np.abs(p.g / den) ** 2
    assert np.allclose(upconversion_power(grid, p, p.omega_a),
                       direct / direct.max(), rtol=1e-12, atol=1e-15)


def test_normal_modes_bare_limit():
    p = _params(g=0.0)
    omega_d = p.omega_a - p.omega_b - 5 * p.kappa
    ev = normal_mode_frequencies(p, omega_d)
    expected = sorted([p.omega_a - 0.5j * p.kappa,
                       omega_d + p.omega_b - 0.5j * p.gamma], key=lambda z: z.real)
    assert np.allclose(ev, expected, rtol=1e-12)


def test_normal_modes_matched_damping_splitting():
    p = _params(kappa_int=TWO_PI * 150e3, kappa_ext=TWO_PI * 150e3)  # kappa = gamma
    ev = normal_mode_frequencies(p, p.omega_a - p.omega_b)
    assert_close_rel(ev[1].real - ev[0].real, 2.0 * p.g, 1e-9, "2g splitting")


def test_normal_modes_minimum_separation_at_resonance():
    p = _params()
    res = p.omega_a - p.omega_b
    scan = np.linspace(res - 20 * p.g, res + 20 * p.g, 81)
    seps = []
    for omega_d in scan:
        ev = normal_mode_frequencies(p, omega_d)
        seps.append(abs(ev[1].real - ev[0].real))
    assert abs(scan[int(np.argmin(seps))] - res) <= (scan[1] - scan[0])


def test_synthesize_trace_exact_and_deterministic():
    p = _params()
    grid = np.linspace(p.omega_a - 5 * p.kappa, p.omega_a + 5 * p.kappa, 301)
    omega_d = p.omega_a - p.omega_b
    clean = synthesize_trace(grid, omega_d, p, NoiseSpec(0.0, 0))
    assert np.array_equal(clean.values, np.asarray(s21_coupled(grid, omega_d, p)))
    a = synthesize_trace(grid, omega_d, p, NoiseSpec(0.01, 123))
    b = synthesize_trace(grid, omega_d, p, NoiseSpec(0.01, 123))
    assert np.array_equal(a.values, b.values)
    c = synthesize_trace(grid, omega_d, p, NoiseSpec(0.01, 124))
    assert not np.array_equal(a.values, c.values)


def test_synthesize_trace_noise_statistics():
    p = _params()
    grid = np.linspace(p.omega_a - 5 * p.kappa, p.omega_a + 5 * p.kappa, 10000)
    omega_d = p.omega_a - p.omega_b
    sigma = 0.01
    noisy = synthesize_trace(grid, omega_d, p, NoiseSpec(sigma, 7))
    resid = noisy.values - s21_coupled(grid, omega_d, p)
    assert abs(np.std(resid.real) - sigma) < 0.15 * sigma
    assert abs(np.std(resid.imag) - sigma) < 0.15 * sigma


def test_synthesize_upconversion_deterministic():
    p = _params(g=TWO_PI * 120e3)
    grid = np.linspace(p.omega_b - TWO_PI * 1e6, p.omega_b + TWO_PI * 1e6, 301)
    a = synthesize_upconversion_trace(grid, p, p.omega_a, NoiseSpec(0.02, 9))
    b = synthesize_upconversion_trace(grid, p, p.omega_a, NoiseSpec(0.02, 9))
    assert a.kind == "power"
    assert np.array_equal(a.values, b.values)
