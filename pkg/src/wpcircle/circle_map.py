"""Orientation-preserving circle homeomorphisms stored through their lifts.

A map h(e^{i theta}) = e^{i phi(theta)} is held as the periodic part
``p_j = phi(theta_j) - theta_j`` with the convention phi(0) in [0, 2 pi).
Maps built from formulas also keep callables for phi and phi' so that
composition, inversion and resampling stay exact to rounding.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .errors import DegenerateDerivativeError, InvalidArgument, MonotonicityError
from .fourier_core import (
    TWO_PI,
    GridFunction,
    check_grid_size,
    grid,
    spectral_derivative,
)

_GL_S, _GL_W = np.polynomial.legendre.leggauss(20)


class CircleMap:
    """Sampled lift of a circle homeomorphism, optionally with closed forms."""

    def __init__(self, periodic, family: str = "samples", params: Optional[dict] = None,
                 lift_fn: Optional[Callable] = None, dlift_fn: Optional[Callable] = None):
        p = np.asarray(periodic, dtype=float)
        if p.ndim != 1:
            raise InvalidArgument("periodic part must be one-dimensional")
        n = check_grid_size(p.size)
        if not np.all(np.isfinite(p)):
            raise InvalidArgument("lift samples must be finite")
        shift = TWO_PI * np.floor(p[0] / TWO_PI)
        p = p - shift
        lift = grid(n) + p
        step = np.diff(np.append(lift, lift[0] + TWO_PI))
        if np.any(step <= 0):
            raise MonotonicityError("lift is not strictly increasing")
        self.periodic = p
        self.family = family
        self.params = dict(params or {})
        if lift_fn is not None and shift != 0.0:
            base = lift_fn
            lift_fn = lambda t, _b=base, _s=shift: _b(t) - _s
        self.lift_fn = lift_fn
        self.dlift_fn = dlift_fn
        self._pchip = None

    @property
    def n_samples(self) -> int:
        return self.periodic.size

    @property
    def theta(self) -> np.ndarray:
        return grid(self.n_samples)

    @property
    def lift(self) -> np.ndarray:
        return self.theta + self.periodic

    @property
    def is_closed_form(self) -> bool:
        return self.lift_fn is not None

    def boundary_values(self) -> np.ndarray:
        return np.exp(1j * self.lift)

    def _interpolant(self):
        if self._pchip is None:
            n = self.n_samples
            pad = 4
            idx = np.arange(-pad, n + pad)
            th = TWO_PI * idx / n
            vals = th + self.periodic[idx % n]
            self._pchip = PchipInterpolator(th, vals)
        return self._pchip

    def lift_at(self, theta) -> np.ndarray:
        """phi at arbitrary real angles."""
        theta = np.asarray(theta, dtype=float)
        if self.lift_fn is not None:
            return np.asarray(self.lift_fn(theta), dtype=float)
        k = np.floor(theta / TWO_PI)
        return self._interpolant()(theta - TWO_PI * k) + TWO_PI * k

    def resample(self, n: int) -> "CircleMap":
        n = check_grid_size(n)
        if n == self.n_samples:
            return self
        th = grid(n)
        return CircleMap(self.lift_at(th) - th, self.family, self.params,
                         self.lift_fn, self.dlift_fn)

    def normalized(self) -> "CircleMap":
        """Post-rotate so that h(1) = 1."""
        c = self.periodic[0]
        lf = self.lift_fn
        return CircleMap(self.periodic - c, self.family, dict(self.params, normalized=True),
                         None if lf is None else (lambda t, _f=lf, _c=c: _f(t) - _c),
                         self.dlift_fn)

    def descriptor(self) -> dict:
        return {"family": self.family, "params": dict(self.params), "grid": self.n_samples}

    def __repr__(self):
        return f"CircleMap(family={self.family!r}, N={self.n_samples})"


def _wrap(x):
    return (x + np.pi) % TWO_PI - np.pi


def sup_distance(h: CircleMap, k: CircleMap) -> float:
    """Largest gap between the lifts on a common grid, modulo 2 pi."""
    n = max(h.n_samples, k.n_samples)
    h, k = h.resample(n), k.resample(n)
    return float(np.max(np.abs(_wrap(h.periodic - k.periodic))))


# ---------------------------------------------------------------- families

def identity(n: int) -> CircleMap:
    return CircleMap(np.zeros(check_grid_size(n)), "identity", {},
                     lambda t: np.asarray(t, dtype=float), lambda t: np.ones_like(np.asarray(t, dtype=float)))


def rotation(beta: float, n: int) -> CircleMap:
    beta = float(beta)
    return CircleMap(np.full(check_grid_size(n), beta), "rotation", {"beta": beta},
                     lambda t: np.asarray(t, dtype=float) + beta,
                     lambda t: np.ones_like(np.asarray(t, dtype=float)))


def mobius(a: complex, beta: float, n: int) -> CircleMap:
    """Disk automorphism z -> e^{i beta}(z - a)/(1 - conj(a) z)."""
    a = complex(a)
    beta = float(beta)
    if not abs(a) < 1:
        raise InvalidArgument("Mobius parameter must satisfy |a| < 1")
    ac = np.conj(a)

    def lift(t):
        t = np.asarray(t, dtype=float)
        return t + beta - 2.0 * np.angle(1.0 - ac * np.exp(1j * t))

    def dlift(t):
        t = np.asarray(t, dtype=float)
        return (1.0 - abs(a) ** 2) / np.abs(1.0 - ac * np.exp(1j * t)) ** 2

    th = grid(n)
    return CircleMap(lift(th) - th, "mobius", {"a": [a.real, a.imag], "beta": beta}, lift, dlift)


def sine_map(eps: float, n: int) -> CircleMap:
    """phi(theta) = theta + eps sin(theta), a diffeomorphism for |eps| < 1."""
    eps = float(eps)
    if not abs(eps) <= 1:
        raise InvalidArgument("need |eps| <= 1 for a homeomorphism")
    lift = lambda t: np.asarray(t, dtype=float) + eps * np.sin(t)
    dlift = lambda t: 1.0 + eps * np.cos(np.asarray(t, dtype=float))
    th = grid(n)
    return CircleMap(lift(th) - th, "sine", {"eps": eps}, lift, dlift)


def from_lift_samples(lift) -> CircleMap:
    lift = np.asarray(lift, dtype=float)
    th = grid(lift.size)
    return CircleMap(lift - th, "samples", {})


# ------------------------------------------------------ group operations

def compose(h: CircleMap, k: CircleMap) -> CircleMap:
    """h o k on the finer of the two grids."""
    n = max(h.n_samples, k.n_samples)
    k_res = k.resample(n)
    th = grid(n)
    lift = h.lift_at(k_res.lift)
    lf = dlf = None
    if h.lift_fn is not None and k.lift_fn is not None:
        hf, kf = h.lift_fn, k.lift_fn
        lf = lambda t: hf(kf(t))
        if h.dlift_fn is not None and k.dlift_fn is not None:
            hd, kd = h.dlift_fn, k.dlift_fn
            dlf = lambda t: hd(kf(t)) * kd(t)
    step = np.diff(np.append(lift, lift[0] + TWO_PI))
    if np.any(step <= 0):
        raise MonotonicityError("composition lost monotonicity; refine the grid")
    return CircleMap(lift - th, "composition", {}, lf, dlf)


def _inverse_lift_fn(forward: Callable, lift_samples: np.ndarray) -> Callable:
    n = lift_samples.size
    pad = 2
    idx = np.arange(-pad, n + pad)
    knots_t = TWO_PI * idx / n
    knots_v = TWO_PI * (idx // n) + lift_samples[idx % n]

    def inv(y):
        y = np.asarray(y, dtype=float)
        shape = y.shape
        y = y.ravel()
        k = np.floor((y - lift_samples[0]) / TWO_PI)
        yr = y - TWO_PI * k
        j = np.searchsorted(knots_v, yr, side="right") - 1
        lo = knots_t[j].copy()
        hi = knots_t[j + 1].copy()
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = forward(mid) <= yr
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= 4e-16 * np.maximum(1.0, np.abs(hi))):
                break
        return (0.5 * (lo + hi) + TWO_PI * k).reshape(shape)

    return inv


def _reciprocal_derivative(dlift: Callable, inv: Callable) -> Callable:
    def dinv(t):
        with np.errstate(divide="ignore"):
            return 1.0 / dlift(inv(t))
    return dinv


def invert(h: CircleMap) -> CircleMap:
    """Inverse map; monotone root finding on closed forms, monotone cubic otherwise."""
    th = grid(h.n_samples)
    if h.lift_fn is not None:
        inv = _inverse_lift_fn(h.lift_fn, h.lift)
        lift = inv(th)
        dlf = None if h.dlift_fn is None else _reciprocal_derivative(h.dlift_fn, inv)
        return CircleMap(lift - th, "inverse", {}, inv, dlf)
    n = h.n_samples
    pad = n
    idx = np.arange(-pad, n + pad)
    tt = TWO_PI * idx / n
    vv = TWO_PI * (idx // n) + h.lift[idx % n]
    f = PchipInterpolator(vv, tt)
    lift = f(th)
    step = np.diff(np.append(lift, lift[0] + TWO_PI))
    if np.any(step <= 0):
        raise MonotonicityError("inverse lost monotonicity; refine the grid")
    return CircleMap(lift - th, "inverse", {})


# ------------------------------------------------------------ derivatives

@dataclass(frozen=True)
class DerivativeData:
    """phi' and log phi' on the grid.

    At ``singular`` nodes the derivative has no finite positive point value
    (phi' = 0 or infinite there); both arrays hold cell averages over
    [theta_j - h/2, theta_j + h/2] of the respective function instead.
    ``degenerate`` is set when phi' vanishes somewhere.
    """

    phi_prime: GridFunction
    log_phi_prime: GridFunction
    provenance: str
    singular: tuple = field(default_factory=tuple)
    degenerate: bool = False


def _cell_average_log(dlift: Callable, t0: float, h: float) -> float:
    f = lambda t: np.log(float(dlift(np.array([t]))[0]))
    left = integrate.quad(f, t0 - 0.5 * h, t0, limit=200, epsabs=1e-14, epsrel=1e-12)[0]
    right = integrate.quad(f, t0, t0 + 0.5 * h, limit=200, epsabs=1e-14, epsrel=1e-12)[0]
    return (left + right) / h


def derivative(h: CircleMap, provenance: str = "auto", strict: bool = False) -> DerivativeData:
    """phi' with analytic provenance for closed forms, spectral otherwise.

    With ``strict=True`` a vanishing derivative raises instead of being flagged.
    """
    n = h.n_samples
    th = grid(n)
    step = TWO_PI / n
    if provenance == "auto":
        provenance = "analytic" if h.dlift_fn is not None else "spectral"
    if provenance == "analytic":
        if h.dlift_fn is None:
            raise InvalidArgument("no closed-form derivative available")
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.asarray(h.dlift_fn(th), dtype=float).copy()
    elif provenance == "spectral":
        d = 1.0 + spectral_derivative(GridFunction(h.periodic)).values
    else:
        raise InvalidArgument(f"unknown provenance {provenance!r}")
    bad = ~np.isfinite(d) | (d <= 0)
    degenerate = bool(np.any(np.isfinite(d) & (d <= 0)))
    if degenerate and strict:
        raise DegenerateDerivativeError("phi' vanishes on the grid")
    logd = np.empty(n)
    logd[~bad] = np.log(d[~bad])
    sing = np.flatnonzero(bad)
    for j in sing:
        t0 = th[j]
        avg = (h.lift_at(t0 + 0.5 * step) - h.lift_at(t0 - 0.5 * step)) / step
        d[j] = float(avg)
        if provenance == "analytic":
            logd[j] = _cell_average_log(h.dlift_fn, t0, step)
        else:
            logd[j] = np.log(d[j])
    return DerivativeData(GridFunction(d), GridFunction(logd), provenance,
                          tuple(int(j) for j in sing), degenerate)


def log_derivative(h: CircleMap, data: Optional[DerivativeData] = None) -> GridFunction:
    """log h'(e^{i theta}) = log phi' + i(phi - theta), with arg h'(1) in (-pi, pi]."""
    if data is None:
        data = derivative(h)
    arg = h.periodic.copy()
    if arg[0] > np.pi:
        arg -= TWO_PI
    return GridFunction(data.log_phi_prime.values + 1j * arg)


# ------------------------------------------------- maps from a density

class _CumulativeLift:
    """phi(theta) = c int_0^theta rho(t) dt for a positive integrable density."""

    def __init__(self, density: Callable, n: int, scale: Optional[float] = None):
        self.density = density
        self.n = n
        h = TWO_PI / n
        self.h = h
        th = grid(n)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            node_vals = np.asarray(density(np.append(th, TWO_PI)), dtype=float)
        bad_node = ~np.isfinite(node_vals) | (node_vals <= 0)
        self.bad_cell = bad_node[:-1] | bad_node[1:]
        s = 0.5 * (_GL_S + 1.0)
        w = 0.5 * _GL_W
        pts = th[:, None] + h * s[None, :]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            cells = h * (np.asarray(density(pts), dtype=float) @ w)
        # fall back to adaptive quadrature where the fixed rule is not trustworthy
        s10, w10 = np.polynomial.legendre.leggauss(10)
        pts10 = th[:, None] + h * 0.5 * (s10[None, :] + 1.0)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            cells10 = h * (np.asarray(density(pts10), dtype=float) @ (0.5 * w10))
        rough = ~np.isfinite(cells) | (np.abs(cells - cells10) > 1e-13 * np.abs(cells))
        self.bad_cell |= rough
        f1 = lambda t: float(density(np.array([t]))[0])
        for j in np.flatnonzero(self.bad_cell):
            cells[j] = integrate.quad(f1, th[j], th[j] + h, limit=400,
                                      epsabs=1e-15, epsrel=1e-13)[0]
        if not np.all(np.isfinite(cells)) or np.any(cells <= 0):
            raise InvalidArgument("density is not positive and integrable")
        total = float(np.sum(cells))
        self.total = total
        self.scale = TWO_PI / total if scale is None else scale
        self.nodes = np.concatenate([[0.0], np.cumsum(cells)])

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        shape = theta.shape
        t = theta.ravel()
        k = np.floor(t / TWO_PI)
        r = t - TWO_PI * k
        j = np.minimum((r / self.h).astype(int), self.n - 1)
        a = j * self.h
        frac = r - a
        s = 0.5 * (_GL_S + 1.0)
        pts = a[:, None] + frac[:, None] * s[None, :]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            part = frac * (np.asarray(self.density(pts), dtype=float) @ (0.5 * _GL_W))
        slow = self.bad_cell[j] & (frac > 0)
        f1 = lambda x: float(self.density(np.array([x]))[0])
        for i in np.flatnonzero(slow):
            part[i] = integrate.quad(f1, a[i], r[i], limit=400, epsabs=1e-15, epsrel=1e-13)[0]
        part[frac == 0] = 0.0
        val = self.scale * (self.nodes[j] + part) + TWO_PI * k
        return val.reshape(shape)


def from_boundary_density(u, renormalize: bool = True, n_samples: Optional[int] = None,
                          params: Optional[dict] = None) -> CircleMap:
    """Map with log phi' = u + const, i.e. phi(theta) = c int_0^theta e^u.

    ``u`` is either a real GridFunction (spectral antiderivative, exact when
    e^u is a trigonometric polynomial) or a vectorised callable, in which
    case the lift is built by cumulative quadrature and stays closed-form.
    Without ``renormalize`` the mean of e^u must already be 1.
    """
    if callable(u):
        if n_samples is None:
            raise InvalidArgument("grid size required for a callable density")
        n = check_grid_size(n_samples)
        dens = lambda t: np.exp(u(t))
        cl = _CumulativeLift(dens, n)
        if not renormalize:
            if abs(cl.total - TWO_PI) > 1e-8 * TWO_PI:
                raise InvalidArgument("e^u does not integrate to 2 pi")
            cl.scale = 1.0
        c = cl.scale
        th = grid(n)
        lift = cl(th)
        dlift = lambda t: c * np.exp(u(t))
        return CircleMap(lift - th, "from_u", dict(params or {}, renormalize=renormalize), cl, dlift)
    if not isinstance(u, GridFunction) or not u.is_real:
        raise InvalidArgument("density exponent must be a real GridFunction or a callable")
    n = u.n_samples
    with np.errstate(over="ignore"):
        e = np.exp(u.values)
    if not np.all(np.isfinite(e)):
        raise InvalidArgument("e^u overflows")
    ehat = np.fft.fft(e) / n
    mean = ehat[0].real
    if not renormalize and abs(mean - 1.0) > 1e-8:
        raise InvalidArgument("e^u does not integrate to 2 pi")
    c = 1.0 / mean if renormalize else 1.0
    k = np.fft.fftfreq(n, 1.0 / n)
    anti = np.zeros(n, dtype=complex)
    nz = k != 0
    anti[nz] = ehat[nz] / (1j * k[nz])
    anti[n // 2] = 0.0
    p = c * (np.fft.ifft(anti).real * n - np.sum(anti).real)
    return CircleMap(p, "from_u", dict(params or {}, renormalize=renormalize,
                                        u=[float(x) for x in u.values]))
