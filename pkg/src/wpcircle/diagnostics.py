"""Membership diagnostics and distances for circle homeomorphisms.

Every verdict is a trend verdict read off a finite profile and takes one of
the values ``yes-trend``, ``no-trend`` or ``inconclusive``. Finite data
cannot decide membership in a function space; the thresholds below were
calibrated on maps whose status is known.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .circle_map import CircleMap, DerivativeData, compose, derivative, invert, log_derivative
from .errors import DegenerateDerivativeError
from .fourier_core import (
    TWO_PI,
    GridFunction,
    Profile,
    all_coefficients,
    dyadic_truncations,
    sobolev_profile,
    sobolev_seminorm,
)

YES, NO, UNSURE = "yes-trend", "no-trend", "inconclusive"
SCHEMA_VERSION = 1

TOL_CAUCHY = 1e-3
TOL_DIVERGE = 1e-2
TOL_SYMMETRIC = 0.05
TOL_TAIL = 0.1
DECAY_RATIO = 0.95
FLAT_RATIO = 0.98


def trend_verdict(profile: Profile, tol_cauchy: float = TOL_CAUCHY,
                  tol_diverge: float = TOL_DIVERGE, tol_tail: float = TOL_TAIL) -> str:
    """Classify increasing partial sums as convergent, divergent or undecided.

    yes-trend: the last increment is below tol_cauchy * current value, or
    the last three increments shrink geometrically (ratio <= 0.95) and the
    geometric extrapolation of the remaining tail is below tol_tail * current.
    no-trend: the last three increments do not shrink (ratio >= 0.98), or
    they stay above tol_diverge * current value without shrinking.
    """
    vals = np.asarray(profile.values, dtype=float)
    cur = vals[-1]
    inc = np.diff(vals)
    scale = max(1.0, abs(cur))
    if np.all(np.abs(inc) <= 1e-13 * scale):
        return YES
    if inc.size and inc[-1] < tol_cauchy * cur:
        return YES
    if inc.size < 3:
        return UNSURE
    last3 = inc[-3:]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = last3[1:] / last3[:-1]
    if bool(np.all(ratios >= FLAT_RATIO)):
        return NO
    if bool(np.all(ratios <= DECAY_RATIO)):
        q = float(np.max(ratios))
        tail = last3[-1] * q / (1.0 - q)
        return YES if tail <= tol_tail * cur else UNSURE
    if np.all(last3 > tol_diverge * vals[-3:]):
        return NO
    return UNSURE


# ------------------------------------------------------- adjacent arcs

@dataclass(frozen=True)
class ScaleProfile:
    scales: np.ndarray      # arc length in radians
    values: np.ndarray      # per-scale statistic
    where: np.ndarray       # left endpoint of the worst pair

    def as_rows(self) -> list:
        return [[float(s), float(v), float(w)] for s, v, w in zip(self.scales, self.values, self.where)]


def _adjacent_ratios(h: CircleMap):
    n = h.n_samples
    lift = h.lift
    ext = np.concatenate([lift - TWO_PI, lift, lift + TWO_PI, lift + 2 * TWO_PI])
    cells = []
    c = n // 2
    while c >= 4:
        cells.append(c)
        c //= 2
    out = []
    for c in cells:
        j = np.arange(n) + n
        a, b, e = ext[j], ext[j + c], ext[j + 2 * c]
        r = (b - a) / (e - b)
        sym = np.maximum(r, 1.0 / r)
        k = int(np.argmax(sym))
        out.append((TWO_PI * c / n, float(sym[k]), TWO_PI * k / n))
    return out


def quasisymmetry_profile(h: CircleMap) -> ScaleProfile:
    """Largest max(r, 1/r) of image lengths of adjacent equal arcs, per dyadic arc length.

    All grid positions are scanned; arcs shorter than four cells are skipped.
    The overall constant is the maximum of ``values``.
    """
    rows = _adjacent_ratios(h)
    return ScaleProfile(np.array([r[0] for r in rows]), np.array([r[1] for r in rows]),
                        np.array([r[2] for r in rows]))


def symmetric_profile(h: CircleMap) -> ScaleProfile:
    """Per-scale maximum of |ratio - 1| with the ratio symmetrised as above."""
    rows = _adjacent_ratios(h)
    return ScaleProfile(np.array([r[0] for r in rows]), np.array([r[1] - 1.0 for r in rows]),
                        np.array([r[2] for r in rows]))


def qs_verdict(p: ScaleProfile) -> str:
    fine = p.values[-3:]
    if fine.size < 3:
        return UNSURE
    if fine[-1] <= 1.05 * np.max(fine[:-1]):
        return YES
    if np.all(np.diff(fine) > 0) and fine[-1] > 1.5 * fine[0]:
        return NO
    return UNSURE


def symmetric_verdict(p: ScaleProfile, tol: float = TOL_SYMMETRIC) -> str:
    fine = p.values[-3:]
    if fine.size < 3:
        return UNSURE
    if np.all(fine <= 1e-12):
        return YES
    decreasing = bool(np.all(np.diff(fine) < 0))
    if decreasing and fine[-1] < tol:
        return YES
    if fine[-1] >= tol and fine[-1] >= 0.95 * fine[0]:
        return NO
    return UNSURE


# ------------------------------------------------------- membership

def _resolved_profile(u: GridFunction, s: float) -> Profile:
    n = u.n_samples
    a = all_coefficients(u)
    return sobolev_profile(a, s, dyadic_truncations(n // 4))


def h_half_profile(h: CircleMap, data: Optional[DerivativeData] = None) -> Profile:
    """Partial sums of the squared H^{1/2} seminorm of log h'."""
    return _resolved_profile(log_derivative(h, data), 0.5)


def h_three_halves_probe(h: CircleMap) -> Profile:
    """Partial sums of the squared H^{3/2} seminorm of the boundary map e^{i phi}."""
    return _resolved_profile(GridFunction(h.boundary_values()), 1.5)


def phi_prime_profile(h: CircleMap, data: Optional[DerivativeData] = None) -> Profile:
    if data is None:
        data = derivative(h)
    return _resolved_profile(data.phi_prime, 0.5)


@dataclass
class MembershipReport:
    qs_profile: ScaleProfile
    symmetric_profile: ScaleProfile
    h_half_profile: Profile
    verdicts: dict
    reasons: dict = field(default_factory=dict)
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "qs_profile": {"columns": ["scale", "max_ratio", "where"], "rows": self.qs_profile.as_rows(),
                           "constant": float(np.max(self.qs_profile.values))},
            "symmetric_profile": {"columns": ["scale", "max_deviation", "where"],
                                  "rows": self.symmetric_profile.as_rows()},
            "h_half_profile": {"columns": ["truncation", "partial_sum"],
                               "rows": self.h_half_profile.as_pairs()},
            "verdicts": dict(self.verdicts),
            "reasons": dict(self.reasons),
            "degenerate_derivative": self.degenerate,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def wp_membership(h: CircleMap, tol_cauchy: float = TOL_CAUCHY,
                  tol_diverge: float = TOL_DIVERGE) -> MembershipReport:
    data = derivative(h)
    qs = quasisymmetry_profile(h)
    sym = symmetric_profile(h)
    prof = h_half_profile(h, data)
    reasons = {}
    wp = trend_verdict(prof, tol_cauchy, tol_diverge)
    if data.degenerate:
        wp = NO
        reasons["wp_class"] = "phi' vanishes on the grid, so log h' is unbounded below"
    verdicts = {"quasisymmetric": qs_verdict(qs), "symmetric": symmetric_verdict(sym), "wp_class": wp}
    return MembershipReport(qs, sym, prof, verdicts, reasons, data.degenerate)


# ------------------------------------------------------------ metrics

def _common(h1: CircleMap, h2: CircleMap):
    n = max(h1.n_samples, h2.n_samples)
    return h1.resample(n), h2.resample(n)


def _checked_derivative(h: CircleMap) -> DerivativeData:
    d = derivative(h)
    if d.degenerate:
        raise DegenerateDerivativeError(f"metric undefined: phi' vanishes for {h!r}")
    return d


def metric_d(h1: CircleMap, h2: CircleMap) -> float:
    """H^{1/2} seminorm of log|h2'| - log|h1'|."""
    h1, h2 = _common(h1, h2)
    u = _checked_derivative(h2).log_phi_prime.values - _checked_derivative(h1).log_phi_prime.values
    return sobolev_seminorm(all_coefficients(GridFunction(u)), 0.5)


def metric_d_prime(h1: CircleMap, h2: CircleMap) -> float:
    """H^{1/2} seminorm of log h2' - log h1' (complex logarithms)."""
    h1, h2 = _common(h1, h2)
    u = log_derivative(h2, _checked_derivative(h2)).values - log_derivative(h1, _checked_derivative(h1)).values
    return sobolev_seminorm(all_coefficients(GridFunction(u)), 0.5)


def metric_report(h1: CircleMap, h2: CircleMap) -> dict:
    h1, h2 = _common(h1, h2)
    d1, d2 = _checked_derivative(h1), _checked_derivative(h2)
    real = GridFunction(d2.log_phi_prime.values - d1.log_phi_prime.values)
    cplx = GridFunction(log_derivative(h2, d2).values - log_derivative(h1, d1).values)
    pr = _resolved_profile(real, 0.5)
    pc = _resolved_profile(cplx, 0.5)
    return {
        "d": {"value": sobolev_seminorm(all_coefficients(real), 0.5), "profile": pr.as_pairs()},
        "d_prime": {"value": sobolev_seminorm(all_coefficients(cplx), 0.5), "profile": pc.as_pairs()},
    }


# --------------------------------------------------------- cross-checks

def lemma_crosscheck(h: CircleMap, tol_cauchy: float = TOL_CAUCHY,
                     tol_diverge: float = TOL_DIVERGE) -> dict:
    """Compare convergence of the H^{1/2} profile of log|h'| with that of log h'.

    For the full logarithm the imaginary part phi - theta is judged through
    its H^1 profile.
    """
    data = derivative(h)
    real = _resolved_profile(data.log_phi_prime, 0.5)
    arg = _resolved_profile(GridFunction(h.periodic - np.mean(h.periodic)), 1.0)
    v_real = trend_verdict(real, tol_cauchy, tol_diverge)
    v_arg = trend_verdict(arg, tol_cauchy, tol_diverge)
    if v_real == YES and v_arg == YES:
        v_full = YES
    elif NO in (v_real, v_arg):
        v_full = NO
    else:
        v_full = UNSURE
    return {"log_abs": v_real, "arg_h1": v_arg, "log_full": v_full, "agree": v_real == v_full,
            "profiles": {"log_abs": real.as_pairs(), "arg_h1": arg.as_pairs()}}


def group_continuity_probe(g_seq: Sequence[CircleMap], h_seq: Sequence[CircleMap],
                           g: CircleMap, h: CircleMap, tol: float = 1e-3) -> dict:
    """d'(g_n o h_n, g o h) and d'(h_n^{-1}, h^{-1}) along a sequence."""
    target = compose(g, h)
    h_inv = invert(h)
    comp = [metric_d_prime(compose(gn, hn), target) for gn, hn in zip(g_seq, h_seq)]
    inv = [metric_d_prime(invert(hn), h_inv) for hn in h_seq]

    def monotone(x):
        return bool(np.all(np.diff(x) <= 1e-15))

    return {"composition": comp, "inverse": inv,
            "composition_monotone": monotone(comp), "inverse_monotone": monotone(inv),
            "composition_below_tol": comp[-1] < tol, "inverse_below_tol": inv[-1] < tol,
            "tol": tol}
