import numpy as np
import pytest

from wpcircle.circle_map import identity, mobius, rotation, sine_map
from wpcircle.errors import AliasingError, InvalidArgument, PreconditionError
from wpcircle.fourier_core import FourierSeries, GridFunction, grid
from wpcircle.gallery import mobius_welding_triple
from wpcircle.holo import PowerSeries
from wpcircle.pullback import (
    corollary_probe,
    energy_identity_residual,
    grunsky_relation_residual,
    pm_matrices,
    pullback_apply,
    welding_identity_residual,
    welding_mismatch,
)


def test_identity_matrices():
    pp, pm = pm_matrices(identity(128), 8)
    assert np.allclose(pp.entries[:8], np.eye(8), atol=1e-15)
    assert np.max(np.abs(pm.entries)) < 1e-15
    assert pp.rows == 32 and pp.cols == 8


def test_rotation_is_diagonal_phase():
    beta = 0.9
    pp, pm = pm_matrices(rotation(beta, 128), 8)
    assert np.allclose(np.diag(pp.entries[:8]), np.exp(1j * beta * np.arange(1, 9)), atol=1e-14)
    assert np.max(np.abs(pm.entries)) < 1e-14


def test_mobius_has_no_antianalytic_part():
    _, pm = pm_matrices(mobius(0.4 + 0.1j, 0.3, 1024), 16)
    assert np.max(np.abs(pm.entries)) < 1e-13


def test_sine_map_has_antianalytic_part():
    assert energy_identity_residual(sine_map(0.4, 1024), 16) < 1e-12
    _, pm = pm_matrices(sine_map(0.4, 1024), 16)
    assert np.max(np.abs(pm.entries)) > 1e-3


def test_truncation_limit():
    with pytest.raises(InvalidArgument):
        pm_matrices(identity(64), 9)


def test_csv_layout():
    pp, _ = pm_matrices(identity(64), 2, rows=3)
    lines = pp.to_csv().strip().split("\n")
    assert lines[0] == "row,col,re,im"
    assert len(lines) == 1 + 3 * 2
    row, col, re, im = lines[1].split(",")
    assert (row, col) == ("1", "1")
    assert float(re) == pytest.approx(1.0) and abs(float(im)) < 1e-15


def test_pullback_aliasing_guard():
    coef = np.zeros(2 * 30 + 1, dtype=complex)
    coef[-1] = 1.0
    with pytest.raises(AliasingError):
        pullback_apply(sine_map(0.9, 64), FourierSeries(coef))


def test_pullback_by_rotation():
    coef = np.zeros(9, dtype=complex)
    coef[4 + 3] = 1.0
    v = pullback_apply(rotation(0.5, 64), FourierSeries(coef))
    assert v[3] == pytest.approx(np.exp(1.5j))


def test_welding_pair_checks():
    t = mobius_welding_triple(0.3 + 0.2j, 1.1, 1024)
    assert welding_mismatch(t.h, t.f) < 1e-13
    assert welding_identity_residual(t.h, t.f, t.g) < 1e-12
    assert grunsky_relation_residual(t.h, t.f, 8) < 1e-12
    # a mismatched map is rejected before any matrix is formed
    with pytest.raises(PreconditionError):
        grunsky_relation_residual(sine_map(0.3, 1024), t.f, 8)


def test_welding_needs_domains():
    t = mobius_welding_triple(0.3, 0.0, 256)
    with pytest.raises(InvalidArgument):
        welding_identity_residual(t.h, t.g, t.f)


def test_corollary_probe_mobius():
    n = 1024
    v = GridFunction(np.cos(grid(n)) + 0.3 * np.sin(2 * grid(n)))
    res = corollary_probe(mobius(0.3, 0.0, n), v)
    assert res["route"] == "explicit" and res["holds"]
    with pytest.raises(PreconditionError):
        corollary_probe(sine_map(0.3, n), v)
    exp = corollary_probe(sine_map(0.3, n), v, experimental=True)
    assert exp["route"] == "experimental-lstsq"


def test_commutator_degree_guard():
    from wpcircle.pullback import commutator_identity_residual
    with pytest.raises(InvalidArgument):
        commutator_identity_residual(identity(16), PowerSeries(np.ones(4)))
