"""Closed-form test maps.

* ``build_counterexample``: phi' = c (log a - log sin(t/2))^2 + c (pi - t)^2/4,
  with log phi' in H^{1/2} while phi' itself is unbounded near t = 0.
* ``build_sine_flat``: phi(t) = t - sin t, smooth but with phi'(0) = 0.
* ``flow_field``: the alpha-derivative of the first family, transported to
  the image circle.
* ``mobius_welding_triple``: a disk automorphism with explicit conformal
  factors on both sides of the circle.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate
from scipy.special import zeta

from .circle_map import (
    CircleMap,
    _inverse_lift_fn,
    derivative,
    identity,
    mobius,
    rotation,
)
from .errors import InvalidArgument, StepSizeError
from .fourier_core import TWO_PI, GridFunction, all_coefficients, grid, sobolev_profile
from .holo import PowerSeries

_ZETA_K = np.arange(1, 41)
_ZETA_C = zeta(2 * _ZETA_K) / _ZETA_K / (TWO_PI) ** (2 * _ZETA_K)
_GL_X, _GL_W = np.polynomial.legendre.leggauss(32)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not alpha > 1:
        raise InvalidArgument("alpha must exceed 1")
    return alpha


def _density(t, alpha: float) -> np.ndarray:
    """(log a - log sin(t/2))^2 + (pi - t)^2 / 4 for t in [0, 2 pi]; infinite at the ends."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        s = np.log(alpha) - np.log(np.sin(0.5 * t))
    return s * s + 0.25 * (np.pi - t) ** 2


def _log_part(x: np.ndarray, alpha: float) -> np.ndarray:
    """int_0^x (log a - log sin(t/2))^2 dt for 0 <= x <= pi.

    With r(t) = log(sin(t/2)/(t/2)) = -sum_k zeta(2k)/k (t/2pi)^{2k}, the
    integrand is (L - r)^2 with L = log(2a/t); the L^2 and L r parts
    integrate in closed form and r^2 is smooth.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    xp = x[pos]
    lg = np.log(2 * alpha / xp)
    out_p = xp * (lg * lg + 2 * lg + 2)
    m = 2 * _ZETA_K + 1
    powers = xp[:, None] ** m[None, :]
    out_p = out_p + 2.0 * np.sum(_ZETA_C[None, :] * powers / m * (lg[:, None] + 1.0 / m), axis=1)
    t = 0.5 * xp[:, None] * (_GL_X[None, :] + 1.0)
    half = 0.5 * t
    r = np.log(np.sin(half) / half)
    out_p = out_p + 0.5 * xp * np.sum(r * r * _GL_W[None, :], axis=1)
    out[pos] = out_p
    return out


def _primitive(theta, alpha: float, total: float) -> np.ndarray:
    """int_0^theta of the unnormalised density, for any real theta."""
    theta = np.asarray(theta, dtype=float)
    k = np.floor(theta / TWO_PI)
    x = theta - TWO_PI * k
    lo = x <= np.pi
    out = np.empty_like(x)
    xl = x[lo]
    out[lo] = _log_part(xl, alpha) + (np.pi ** 3 - (np.pi - xl) ** 3) / 12.0
    xr = TWO_PI - x[~lo]
    out[~lo] = total - (_log_part(xr, alpha) + (np.pi ** 3 - (np.pi - xr) ** 3) / 12.0)
    return out + k * total


def counterexample_constant(alpha: float, delta: float = 1e-4) -> float:
    """Normalising constant by adaptive quadrature with analytic end pieces.

    On [0, delta] the log^2 singularity is integrated through its leading
    asymptotics delta (L^2 + 2L + 2), L = log(2a/delta); the neglected terms
    are O(delta^3 log delta).
    """
    alpha = _check_alpha(alpha)
    f = lambda t: float(_density(np.array([t]), alpha)[0])
    mid = integrate.quad(f, delta, TWO_PI - delta, limit=400, epsabs=1e-12, epsrel=1e-12,
                         points=[np.pi])[0]
    lg = np.log(2 * alpha / delta)
    end = delta * (lg * lg + 2 * lg + 2) + (np.pi ** 3 - (np.pi - delta) ** 3) / 12.0
    return TWO_PI / (mid + 2.0 * end)


def build_counterexample(alpha: float, n: int):
    """Lift and analytic derivative data of the unbounded-derivative family."""
    alpha = _check_alpha(alpha)
    total = 2.0 * float(_primitive(np.array([np.pi]), alpha, 0.0)[0])
    c = TWO_PI / total

    def lift(t):
        return c * _primitive(t, alpha, total)

    def dlift(t):
        t = np.asarray(t, dtype=float)
        return c * _density(t - TWO_PI * np.floor(t / TWO_PI), alpha)

    th = grid(n)
    h = CircleMap(lift(th) - th, "wp_counterexample", {"alpha": alpha}, lift, dlift)
    return h, derivative(h)


def counterexample_g_integral(alpha: float) -> tuple:
    """Area integral of |g'|^2 over |z - 1| < 1 for g = log log(2a/(1-z)).

    Computed in the frame w = 1 - z = rho e^{i psi} with rho = e^{-s}, so
    that the area element rho drho dpsi becomes rho^2 ds dpsi. Returns the
    value together with the bound 2 pi / log(2a).
    """
    alpha = _check_alpha(alpha)

    def integrand(psi, s):
        # g'(z) = 1 / (w log(2a/w)) and log w = -s + i psi on the principal branch
        big_l = np.log(2 * alpha) - (-s + 1j * psi)
        return 1.0 / abs(big_l) ** 2

    inner = lambda s: integrate.quad(integrand, -np.pi, np.pi, args=(s,), epsabs=1e-13, epsrel=1e-12)[0]
    val = integrate.quad(inner, 0.0, np.inf, epsabs=1e-12, epsrel=1e-10, limit=400)[0]
    return val, TWO_PI / np.log(2 * alpha)


def build_sine_flat(n: int) -> CircleMap:
    lift = lambda t: np.asarray(t, dtype=float) - np.sin(t)
    # 1 - cos t written so that it keeps full relative accuracy near t = 0
    dlift = lambda t: 2.0 * np.sin(0.5 * np.asarray(t, dtype=float)) ** 2
    th = grid(n)
    return CircleMap(lift(th) - th, "sine_flat", {}, lift, dlift)


@dataclass(frozen=True)
class FlowField:
    field: GridFunction          # F(e^{i psi}) at the grid angles psi
    speed: GridFunction          # tangential component v with F = i e^{i psi} v
    step: float
    richardson_ratio: float
    speed_profile: object        # H^{3/2} profile of v
    map_profile: object          # H^{3/2} profile of e^{i phi}


def flow_field(alpha: float, d_alpha=None, n: int = 4096) -> FlowField:
    """(d/d alpha h_alpha) o h_alpha^{-1} by central differences in alpha."""
    alpha = _check_alpha(alpha)
    if d_alpha is None:
        d_alpha = 1e-3 * (alpha - 1.0)
    if not 0 < d_alpha < 0.5 * (alpha - 1.0):
        raise InvalidArgument("need 0 < d_alpha << alpha - 1")
    h, _ = build_counterexample(alpha, n)
    psi = grid(n)
    base = _inverse_lift_fn(h.lift_fn, h.lift)(psi)

    def speed(d):
        hp, _ = _lift_only(alpha + d, n)
        hm, _ = _lift_only(alpha - d, n)
        return (hp(base) - hm(base)) / (2 * d)

    v1, v2, v3 = speed(d_alpha), speed(d_alpha / 2), speed(d_alpha / 4)
    e1 = np.max(np.abs(v1 - v2))
    e2 = np.max(np.abs(v2 - v3))
    ratio = float(e1 / e2) if e2 > 0 else float("inf")
    if e2 > 0 and e1 > 0 and not ratio > 2.0:
        raise StepSizeError(f"central differences not converging (ratio {ratio:.3g})")
    v = v1
    fld = 1j * np.exp(1j * psi) * v
    prof_v = sobolev_profile(all_coefficients(GridFunction(v)), 1.5)
    prof_h = sobolev_profile(all_coefficients(GridFunction(h.boundary_values())), 1.5)
    return FlowField(GridFunction(fld), GridFunction(v), float(d_alpha), ratio, prof_v, prof_h)


def _lift_only(alpha: float, n: int):
    total = 2.0 * float(_primitive(np.array([np.pi]), alpha, 0.0)[0])
    c = TWO_PI / total
    return (lambda t: c * _primitive(t, alpha, total)), c


class WeldingTriple(NamedTuple):
    h: CircleMap
    f: PowerSeries   # log f', disk
    g: PowerSeries   # log g', exterior
    pole: complex


def mobius_welding_triple(a: complex, beta: float, n: int = 4096, k: int = 128) -> WeldingTriple:
    """h = Mobius(a, beta), f(z) = z/(1 - z/p) with p = -e^{i beta}/conj(a), g = f o h.

    f o h is affine, so log g' is the constant i beta - log(1 - |a|^2).
    For a = 0 the triple is (rotation, identity, rotation).
    """
    a = complex(a)
    if not abs(a) < 1:
        raise InvalidArgument("need |a| < 1")
    if a == 0:
        h = rotation(beta, n) if beta else identity(n)
        return WeldingTriple(h, PowerSeries(np.zeros(k + 1)),
                             PowerSeries(np.array([1j * beta]), "exterior"), complex("inf"))
    p = -np.exp(1j * beta) / np.conj(a)
    h = mobius(a, beta, n)
    m = np.arange(1, k + 1)
    logf = np.zeros(k + 1, dtype=complex)
    logf[1:] = 2.0 * p ** (-m.astype(float)) / m
    logg = np.array([1j * beta - np.log(1 - abs(a) ** 2)])
    return WeldingTriple(h, PowerSeries(logf), PowerSeries(logg, "exterior"), complex(p))
