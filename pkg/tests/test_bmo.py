import numpy as np
import pytest
from scipy.special import i0

import oracles
from wpcircle.bmo import (
    bmo_norm_estimate,
    exp_lp_norm,
    exp_lp_profile,
    john_nirenberg_probe,
    mean_oscillation,
    vmo_verdict,
)
from wpcircle.circle_map import derivative
from wpcircle.errors import InvalidArgument
from wpcircle.fourier_core import GridFunction, grid
from wpcircle.gallery import build_sine_flat


def test_constant_has_zero_oscillation():
    p = bmo_norm_estimate(GridFunction(np.full(256, 3.0)))
    assert p.estimate == 0.0
    assert vmo_verdict(p) == "vanishing"


def test_linear_ramp_oscillation():
    # on an arc of length L a linear function has mean oscillation slope * L / 4
    n = 1024
    u = GridFunction(grid(n))
    osc = mean_oscillation(u, 0, 256)
    assert osc == pytest.approx(2 * np.pi * 256 / n / 4, rel=1e-4)


def test_smooth_function_is_vanishing():
    u = GridFunction(np.sin(grid(2048)))
    assert vmo_verdict(bmo_norm_estimate(u)) == "vanishing"


def test_sine_flat_against_quadrature_oracle():
    n = 2 ** 16
    u = derivative(build_sine_flat(n)).log_phi_prime
    p = bmo_norm_estimate(u, scales=[0.5, 0.1])
    for ell, got in zip(p.scales, p.at_zero):
        assert got == pytest.approx(oracles.log_sine_flat_oscillation(ell), rel=2e-3)


def test_csv_columns():
    p = bmo_norm_estimate(GridFunction(np.cos(grid(64))))
    head, *rows = p.to_csv().strip().split("\n")
    assert head == "scale,worst_oscillation,at_zero"
    assert len(rows) == len(p.scales)


def test_scale_validation():
    with pytest.raises(InvalidArgument):
        bmo_norm_estimate(GridFunction(np.ones(64)), scales=[1e-3])


def test_john_nirenberg_on_log():
    n = 2 ** 14
    # half-cell offset keeps the logarithmic singularity off the grid
    u = GridFunction(np.log(np.sin((grid(n) + np.pi / n) / 2)))
    rep = john_nirenberg_probe(u, (0.0, np.pi), exponents=(0.5, 1.0))
    # the distribution of log|t| decays like e^{-lambda}
    assert 0.7 < rep.rate < 1.3
    assert rep.moments[0] < rep.moments[1]


def test_exp_lp():
    u = GridFunction(np.zeros(64))
    assert exp_lp_norm(u, 2.0) == pytest.approx(1.0)
    prof = exp_lp_profile(GridFunction(np.cos(grid(256))), 1.0)
    # mean of e^{cos} is I_0(1)
    assert prof[-1][1] == pytest.approx(i0(1.0), rel=1e-12)


def test_john_nirenberg_double_log():
    # |u - u_I| for u = 2 log sin(t/2) has a tail like e^{-lambda/2}: the
    # fitted rate is near 1/2, the p = 1/4 moment settles under refinement
    # and the p = 1 moment keeps growing (e^{-u} ~ 1/t^2 is not integrable)
    reps = []
    for n in (2 ** 12, 2 ** 16):
        u = GridFunction(2 * np.log(np.sin((grid(n) + np.pi / n) / 2)))
        reps.append(john_nirenberg_probe(u, (0.0, np.pi), exponents=(0.25, 1.0)))
    assert 0.35 < reps[-1].rate < 0.65
    assert reps[1].moments[0] == pytest.approx(reps[0].moments[0], rel=0.05)
    assert reps[1].moments[1] > 10 * reps[0].moments[1]
