import numpy as np
import pytest

from wpcircle.errors import InvalidArgument
from wpcircle.fourier_core import (
    FourierSeries,
    GridFunction,
    all_coefficients,
    check_grid_size,
    dyadic_truncations,
    fourier_coefficients,
    grid,
    h_half_double_integral,
    harmonic_conjugate,
    harmonic_conjugate_grid,
    sobolev_profile,
    sobolev_seminorm,
    spectral_derivative,
)


@pytest.mark.parametrize("n", [0, 4, 6, 100, 1000])
def test_grid_size_rejected(n):
    with pytest.raises(InvalidArgument):
        check_grid_size(n)


def test_trig_polynomial_is_exact():
    u = GridFunction.from_function(lambda t: 3 + np.cos(2 * t) - 2 * np.sin(5 * t), 64)
    a = fourier_coefficients(u, 8)
    assert a[0] == pytest.approx(3)
    assert a[2] == pytest.approx(0.5)
    assert a[-2] == pytest.approx(0.5)
    assert a[5] == pytest.approx(1j)
    assert a[-5] == pytest.approx(-1j)
    assert abs(a[3]) < 1e-15


def test_cubic_method_beats_dft_on_kink():
    n = 2 ** 10
    u = GridFunction.from_function(lambda t: (np.pi - t) ** 2, n)
    k = np.arange(1, 33)
    exact = 2.0 / k ** 2
    cubic = fourier_coefficients(u, 32, method="cubic")
    dft = fourier_coefficients(u, 32)
    err_c = np.max(np.abs(np.array([cubic[j] for j in k]) - exact))
    err_d = np.max(np.abs(np.array([dft[j] for j in k]) - exact))
    assert err_c < 1e-12 < 1e-6 < err_d


def test_cubic_matches_dft_for_smooth_data():
    u = GridFunction.from_function(lambda t: np.exp(np.cos(t)), 256)
    a = fourier_coefficients(u, 16, method="cubic").coefficients
    b = fourier_coefficients(u, 16).coefficients
    # fourth order: about 1e-8 at this resolution
    assert np.max(np.abs(a - b)) < 1e-7


def test_max_mode_range():
    u = GridFunction(np.ones(16))
    with pytest.raises(InvalidArgument):
        fourier_coefficients(u, 8)
    with pytest.raises(InvalidArgument):
        fourier_coefficients(u, 2, method="spline")


def test_seminorm_of_exponential():
    u = GridFunction(np.exp(1j * grid(32)))
    assert sobolev_seminorm(all_coefficients(u), 0.5) == pytest.approx(1.0)
    assert sobolev_seminorm(all_coefficients(u), 1.5) == pytest.approx(1.0)


def test_profile_monotone_and_truncations():
    assert dyadic_truncations(40) == (2, 4, 8, 16, 32)
    u = GridFunction.from_function(lambda t: np.abs(np.sin(t)), 256)
    p = sobolev_profile(all_coefficients(u), 0.5)
    assert np.all(np.diff(p.values) >= 0)
    assert p.at(8) == p.values[2]
    with pytest.raises(InvalidArgument):
        sobolev_profile(all_coefficients(u), 0.5, [512])


def test_double_integral_for_exponential():
    # Fejer-weighted identity: 1 - 1/N for e^{i theta}
    for n in (16, 256):
        r = h_half_double_integral(GridFunction(np.exp(1j * grid(n))))
        assert r.normalized == pytest.approx(1 - 1 / n, rel=1e-12)


def test_double_integral_weighted_identity():
    rng = np.random.default_rng(4)
    n = 64
    u = GridFunction(rng.standard_normal(n))
    a = all_coefficients(u)
    full = np.fft.fft(u.values) / n
    k = np.abs(np.fft.fftfreq(n, 1 / n))
    expected = np.sum(k * (1 - k / n) * np.abs(full) ** 2)
    assert h_half_double_integral(u).normalized == pytest.approx(expected, rel=1e-12)
    assert a.max_mode == n // 2 - 1


def test_conjugate_function():
    th = grid(128)
    u = GridFunction(np.cos(3 * th) + 2)
    v = harmonic_conjugate_grid(u)
    assert np.max(np.abs(v.values - np.sin(3 * th))) < 1e-13
    a = harmonic_conjugate(fourier_coefficients(u, 4))
    assert a[0] == 0 and a[3] == pytest.approx(-0.5j)


def test_spectral_derivative():
    th = grid(64)
    d = spectral_derivative(GridFunction(np.sin(2 * th)))
    assert np.max(np.abs(d.values - 2 * np.cos(2 * th))) < 1e-12


def test_series_evaluate_and_grid():
    coef = np.zeros(9, dtype=complex)
    coef[4 + 2] = 1.0
    s = FourierSeries(coef)
    th = np.array([0.1, 1.3])
    assert np.allclose(s.evaluate(th), np.exp(2j * th))
    assert np.allclose(s.to_grid(16).values, np.exp(2j * grid(16)))
    assert s.truncated(2).max_mode == 2


def test_double_integral_of_kinked_square():
    # sum |n| |2/n^2|^2 over n != 0 is 8 zeta(3)
    from scipy.special import zeta
    u = GridFunction.from_function(lambda t: (np.pi - t) ** 2, 2 ** 12)
    assert h_half_double_integral(u).normalized == pytest.approx(8 * zeta(3), rel=1e-2)
