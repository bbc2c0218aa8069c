import numpy as np
import pytest

import oracles
from wpcircle.circle_map import (
    CircleMap,
    compose,
    derivative,
    from_boundary_density,
    from_lift_samples,
    identity,
    invert,
    log_derivative,
    mobius,
    rotation,
    sine_map,
    sup_distance,
)
from wpcircle.errors import DegenerateDerivativeError, InvalidArgument, MonotonicityError
from wpcircle.fourier_core import TWO_PI, GridFunction, grid
from wpcircle.gallery import build_sine_flat


def test_mobius_lift_matches_unwrapped_argument():
    th = grid(512)
    h = mobius(0.4 - 0.2j, 0.7, 512)
    ref = oracles.mobius_lift(0.4 - 0.2j, 0.7, th)
    diff = h.lift - ref
    # equal up to a constant multiple of 2 pi
    assert np.ptp(diff) < 1e-12
    assert abs(diff[0] / TWO_PI - round(diff[0] / TWO_PI)) < 1e-12


def test_normalisation_of_base_point():
    h = rotation(7.0, 16)
    assert 0 <= h.periodic[0] < TWO_PI
    assert h.lift_at(np.array([0.0]))[0] == pytest.approx(h.lift[0])


def test_non_monotone_rejected():
    p = np.zeros(16)
    p[3] = -1.0
    with pytest.raises(MonotonicityError):
        CircleMap(p)
    with pytest.raises(InvalidArgument):
        CircleMap(np.zeros(12))
    with pytest.raises(InvalidArgument):
        mobius(1.0, 0.0, 16)


def test_inverse_closed_form_and_sampled():
    n = 256
    h = sine_map(0.5, n)
    ident = identity(n)
    assert sup_distance(compose(h, invert(h)), ident) < 1e-13
    sampled = from_lift_samples(h.lift)
    err = sup_distance(compose(sampled, invert(sampled)), ident)
    assert err < 1e-4


def test_composition_of_rotations():
    n = 64
    c = compose(rotation(0.3, n), rotation(0.4, n))
    assert sup_distance(c, rotation(0.7, n)) < 1e-14


def test_resample_closed_form_exact():
    h = mobius(0.3, 0.0, 64)
    big = h.resample(256)
    assert np.allclose(big.lift[::4], h.lift, atol=1e-14)


def test_analytic_and_spectral_derivatives_agree():
    h = mobius(0.3, 0.2, 512)
    a = derivative(h, "analytic").phi_prime.values
    s = derivative(h, "spectral").phi_prime.values
    assert np.max(np.abs(a - s)) < 1e-10


def test_degenerate_derivative_flagged():
    h = build_sine_flat(256)
    d = derivative(h)
    assert d.degenerate and d.singular == (0,)
    # cell average of t^2/2 over [-h/2, h/2] is h^2/24
    step = TWO_PI / 256
    assert d.phi_prime.values[0] == pytest.approx(step ** 2 / 24, rel=1e-3)
    assert np.isfinite(d.log_phi_prime.values).all()
    with pytest.raises(DegenerateDerivativeError):
        derivative(h, strict=True)


def test_log_derivative_branch():
    h = rotation(5.0, 32)
    ld = log_derivative(h)
    assert np.allclose(ld.values.imag, 5.0 - TWO_PI)
    assert np.allclose(ld.values.real, 0.0)


def test_boundary_density_trig_polynomial():
    n = 256
    th = grid(n)
    u = GridFunction(np.log(1 + 0.5 * np.cos(th)))
    h = from_boundary_density(u)
    # phi = theta + 0.5 sin(theta)
    assert np.max(np.abs(h.lift - (th + 0.5 * np.sin(th)))) < 1e-12


def test_boundary_density_callable_path():
    n = 128
    th = grid(n)
    h = from_boundary_density(lambda t: np.log(1 + 0.5 * np.cos(t)), n_samples=n)
    assert np.max(np.abs(h.lift - (th + 0.5 * np.sin(th)))) < 1e-10
    with pytest.raises(InvalidArgument):
        from_boundary_density(lambda t: np.zeros_like(t) + 1.0, renormalize=False, n_samples=n)
