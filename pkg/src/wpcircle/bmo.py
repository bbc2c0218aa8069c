"""Mean oscillation of sampled functions on the circle.

Averages over an arc [x, x + L h] use the trapezoid rule on the L + 1
nodes it covers (weights 1/2 at both ends). Arcs come in dyadic lengths and
start at every (N/64)-th node, always including theta = 0.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidArgument
from .fourier_core import TWO_PI, GridFunction

DEFAULT_POSITIONS = 64


@dataclass(frozen=True)
class OscillationProfile:
    scales: np.ndarray            # arc lengths actually used (multiples of the grid step)
    worst_oscillation: np.ndarray
    at_zero: np.ndarray           # oscillation on [0, scale]

    @property
    def estimate(self) -> float:
        return float(np.max(self.worst_oscillation))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scale", "worst_oscillation", "at_zero"])
        for row in zip(self.scales, self.worst_oscillation, self.at_zero):
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()


def _trap_weights(cells: int) -> np.ndarray:
    w = np.ones(cells + 1)
    w[0] = w[-1] = 0.5
    return w / cells


def _oscillation(seg: np.ndarray, w: np.ndarray) -> float:
    m = np.dot(w, seg)
    return float(np.dot(w, np.abs(seg - m)))


def mean_oscillation(u: GridFunction, start: int, cells: int) -> float:
    """Trapezoid mean of |u - u_I| over the arc of ``cells`` grid steps from node ``start``."""
    v = u.values
    n = v.size
    if not 1 <= cells <= n:
        raise InvalidArgument("arc must cover between 1 and N cells")
    idx = (start + np.arange(cells + 1)) % n
    return _oscillation(v[idx], _trap_weights(cells))


def _default_scales(n: int, min_scale: float) -> list:
    h = TWO_PI / n
    out = []
    ell = np.pi
    while ell >= min_scale * (1 - 1e-12) and ell >= 4 * h * (1 - 1e-12):
        out.append(ell)
        ell /= 2
    return out


def bmo_norm_estimate(u: GridFunction, min_scale: Optional[float] = None,
                      scales: Optional[Sequence[float]] = None,
                      positions: int = DEFAULT_POSITIONS) -> OscillationProfile:
    """Worst mean oscillation per scale and the oscillation on [0, scale]."""
    v = u.values
    n = v.size
    h = TWO_PI / n
    if scales is None:
        if min_scale is None:
            min_scale = 4 * h
        if min_scale < 4 * h * (1 - 1e-12):
            raise InvalidArgument("scales below four grid cells are not resolved")
        scales = _default_scales(n, min_scale)
    stride = max(1, n // positions)
    starts = np.arange(0, n, stride)
    v2 = np.concatenate([v, v])
    used, worst, zero = [], [], []
    for ell in scales:
        cells = int(round(ell / h))
        if cells < 4 or cells > n:
            raise InvalidArgument(f"scale {ell} is not resolvable on this grid")
        w = _trap_weights(cells)
        osc = [_oscillation(v2[s:s + cells + 1], w) for s in starts]
        used.append(cells * h)
        worst.append(max(osc))
        zero.append(osc[0])
    return OscillationProfile(np.array(used), np.array(worst), np.array(zero))


def vmo_verdict(profile: OscillationProfile, tol: float = 0.05) -> str:
    """'vanishing', 'persistent' or 'inconclusive' from the three finest scales."""
    fine = np.asarray(profile.worst_oscillation[-3:])
    if fine.size < 3:
        return "inconclusive"
    if fine[-1] < tol:
        return "vanishing"
    if np.all(np.diff(fine) < 0) and fine[-1] <= 0.5 * fine[0]:
        return "vanishing"
    if fine[-1] >= 0.95 * fine[0]:
        return "persistent"
    return "inconclusive"


@dataclass(frozen=True)
class JohnNirenbergReport:
    lambdas: np.ndarray
    distribution: np.ndarray   # relative measure of {|u - u_I| > lambda}
    rate: float                # fitted exponential decay rate in lambda
    local_bmo: float
    c1: float
    c2: float
    exponents: tuple
    moments: tuple             # mean of (e^{|u-u_I|} - 1)^p
    bounds: tuple              # p C1 b / (C2 - p b), inf when p b >= C2


def _local_bmo(seg: np.ndarray) -> float:
    cells = seg.size - 1
    best = 0.0
    parts = 1
    while cells // parts >= 4:
        step = cells // parts
        w = _trap_weights(step)
        for j in range(parts):
            best = max(best, _oscillation(seg[j * step:j * step + step + 1], w))
        parts *= 2
    return best


def john_nirenberg_probe(u: GridFunction, interval: tuple, lambdas=None,
                         exponents: Sequence[float] = (1.0,)) -> JohnNirenbergReport:
    """Distribution of |u - u_I| on an arc and an exponential fit to its tail.

    ``interval`` is (start angle, length) in radians, snapped to the grid.
    """
    v = u.values
    n = v.size
    h = TWO_PI / n
    start = int(round(interval[0] / h)) % n
    cells = int(round(interval[1] / h))
    if cells < 8 or cells > n:
        raise InvalidArgument("interval must span at least 8 grid cells")
    seg = v[(start + np.arange(cells + 1)) % n]
    w = _trap_weights(cells)
    dev = np.abs(seg - np.dot(w, seg))
    if lambdas is None:
        lambdas = np.linspace(0.0, float(dev.max()), 41)
    lambdas = np.asarray(lambdas, dtype=float)
    dist = np.array([np.dot(w, dev > lam) for lam in lambdas])
    sel = (dist > 0) & (dist < 0.3) & (lambdas > 0)
    if np.count_nonzero(sel) >= 3:
        slope, icpt = np.polyfit(lambdas[sel], np.log(dist[sel]), 1)
        rate, c1 = float(-slope), float(np.exp(icpt))
    else:
        rate, c1 = float("nan"), float("nan")
    b = _local_bmo(seg)
    c2 = rate * b
    moments, bounds = [], []
    for p in exponents:
        with np.errstate(over="ignore"):
            moments.append(float(np.dot(w, np.expm1(dev) ** p)))
        bounds.append(float(p * c1 * b / (c2 - p * b)) if p * b < c2 else float("inf"))
    return JohnNirenbergReport(lambdas, dist, rate, b, c1, c2, tuple(exponents),
                               tuple(moments), tuple(bounds))


def exp_lp_norm(u: GridFunction, p: float) -> float:
    """((1/2pi) int e^{p u})^{1/p} by the trapezoid rule."""
    if p <= 0:
        raise InvalidArgument("exponent must be positive")
    v = np.real(u.values)
    m = np.max(p * v)
    return float(np.exp((m + np.log(np.mean(np.exp(p * v - m)))) / p))


def exp_lp_profile(u: GridFunction, p: float, levels: int = 4) -> list:
    """exp_lp_norm on the grid and on its 2^-j subsamplings, coarsest first."""
    out = []
    n = u.n_samples
    for j in range(levels - 1, -1, -1):
        step = 2 ** j
        if n // step < 8:
            continue
        out.append([n // step, exp_lp_norm(GridFunction(u.values[::step]), p)])
    return out
