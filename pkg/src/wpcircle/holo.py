"""Truncated power series in the disk or its exterior and the analytic
quantities built from them: pre-Schwarzian and Schwarzian derivatives,
Grunsky coefficients, weighted norms and the reflected Beltrami
coefficient together with its Weil-Petersson type norm.

A disk series stores ``c_0..c_K`` of sum c_n z^n; an exterior series stores
``c_0..c_K`` of sum c_n z^{-n}.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import optimize

from .errors import InvalidArgument, PreconditionError

DOMAINS = ("disk", "exterior")


@dataclass(frozen=True)
class PowerSeries:
    coefficients: np.ndarray
    domain: str = "disk"

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.ndim != 1 or c.size == 0:
            raise InvalidArgument("need a non-empty coefficient vector")
        if not np.all(np.isfinite(c)):
            raise InvalidArgument("coefficients must be finite")
        if self.domain not in DOMAINS:
            raise InvalidArgument(f"domain must be one of {DOMAINS}")
        object.__setattr__(self, "coefficients", c)

    @property
    def truncation(self) -> int:
        return self.coefficients.size - 1

    def evaluate(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        w = z if self.domain == "disk" else 1.0 / z
        out = np.zeros_like(w)
        for c in self.coefficients[::-1]:
            out = out * w + c
        return out

    def derivative(self) -> "PowerSeries":
        if self.domain != "disk":
            raise InvalidArgument("derivative implemented for disk series only")
        c = self.coefficients
        if c.size == 1:
            return PowerSeries(np.zeros(1))
        return PowerSeries(c[1:] * np.arange(1, c.size))

    def tail_bound(self, r: float, window: int = 8) -> float:
        """Geometric extrapolation of sum_{n>K} |c_n| r^n from the last coefficients."""
        c = np.abs(self.coefficients)
        k = self.truncation
        m = min(window, k)
        if m < 1 or c[k] == 0:
            return 0.0
        lo = c[k - m]
        rho = (c[k] / lo) ** (1.0 / m) if lo > 0 else 1.0
        q = rho * r
        if q >= 1:
            return float("inf")
        return float(c[k] * r ** (k + 1) * rho / (1 - q))

    def padded(self, k: int) -> "PowerSeries":
        c = np.zeros(k + 1, dtype=complex)
        m = min(k, self.truncation)
        c[:m + 1] = self.coefficients[:m + 1]
        return PowerSeries(c, self.domain)


# ------------------------------------------------------- series algebra

def series_mul(a: np.ndarray, b: np.ndarray, k: int) -> np.ndarray:
    return np.convolve(a, b)[:k + 1]


def series_inv(a: np.ndarray, k: int) -> np.ndarray:
    if a[0] == 0:
        raise InvalidArgument("series with zero constant term is not invertible")
    a = np.asarray(a, dtype=complex)
    out = np.zeros(k + 1, dtype=complex)
    out[0] = 1.0 / a[0]
    for n in range(1, k + 1):
        m = min(n, a.size - 1)
        out[n] = -np.dot(a[1:m + 1], out[n - 1::-1][:m]) / a[0]
    return out


def series_exp(a: np.ndarray, k: int) -> np.ndarray:
    """exp of a series, via n e_n = sum_{j=1}^n j a_j e_{n-j}."""
    a = np.pad(np.asarray(a, complex), (0, max(0, k + 1 - len(a))))[:k + 1]
    e = np.zeros(k + 1, dtype=complex)
    e[0] = np.exp(a[0])
    ja = np.arange(k + 1) * a
    for n in range(1, k + 1):
        e[n] = np.dot(ja[1:n + 1], e[n - 1::-1][:n]) / n
    return e


def series_log(a: np.ndarray, k: int) -> np.ndarray:
    """Principal log of a series with nonzero constant term."""
    a = np.pad(np.asarray(a, complex), (0, max(0, k + 1 - len(a))))[:k + 1]
    if a[0] == 0:
        raise InvalidArgument("log of a series vanishing at the origin")
    out = np.zeros(k + 1, dtype=complex)
    out[0] = np.log(a[0])
    for n in range(1, k + 1):
        s = n * a[n] - np.dot(np.arange(1, n) * out[1:n], a[n - 1:0:-1])
        out[n] = s / (n * a[0])
    return out


def map_from_log_derivative(log_fp: PowerSeries) -> np.ndarray:
    """Taylor coefficients of f with f(0)=0 and log f' given."""
    if log_fp.domain != "disk":
        raise InvalidArgument("log f' must be a disk series")
    k = log_fp.truncation
    fp = series_exp(log_fp.coefficients, k)
    f = np.zeros(k + 2, dtype=complex)
    f[1:] = fp / np.arange(1, k + 2)
    return f


def log_derivative_of_map(f_coeffs, k: int) -> PowerSeries:
    """log f' as a disk series from the Taylor coefficients of f."""
    f = np.asarray(f_coeffs, dtype=complex)
    fp = f[1:] * np.arange(1, f.size)
    return PowerSeries(series_log(fp, k))


# ------------------------------------------------ Schwarzian derivatives

def pre_schwarzian(log_fp: PowerSeries) -> PowerSeries:
    """(log f')' as a series."""
    return log_fp.derivative()


def schwarzian(log_fp: PowerSeries) -> PowerSeries:
    """S_f = N' - N^2/2 with N the pre-Schwarzian.

    Coefficients up to degree K-2 are exact when log f' is known to degree K.
    """
    n = pre_schwarzian(log_fp)
    if n.truncation < 1:
        return PowerSeries(np.zeros(1))
    dn = n.derivative().coefficients
    k = dn.size - 1
    sq = series_mul(n.coefficients, n.coefficients, k)
    return PowerSeries(dn - 0.5 * sq)


def lambda_map(phi: PowerSeries) -> PowerSeries:
    """phi'' - (phi')^2 / 2, truncated where both terms are exact."""
    c = phi.coefficients
    k = c.size - 1
    if k < 2:
        return PowerSeries(np.zeros(1))
    nn = np.arange(k + 1)
    second = (nn * (nn - 1) * c)[2:]
    first = (nn * c)[1:]
    sq = np.convolve(first, first)[:k - 1]
    return PowerSeries(second - 0.5 * sq)


# ---------------------------------------------------------------- Grunsky

@dataclass(frozen=True)
class GrunskyMatrix:
    """Normalised Grunsky matrix: entry (j-1, k-1) is sqrt(jk) * beta_jk."""

    entries: np.ndarray
    method: str

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def operator_norm(self) -> float:
        return float(np.linalg.norm(self.entries, 2))


def grunsky_coefficients(log_fp: PowerSeries, k: int) -> np.ndarray:
    """beta_{jk}, 0 <= j,k <= K, of log((f(zeta)-f(z))/(zeta-z)) = sum beta_jk zeta^j z^k."""
    m = k + 1
    f = map_from_log_derivative(log_fp)
    if f.size < 2 * m:
        raise InvalidArgument(f"log f' needs truncation >= {2 * k} for a {k}x{k} Grunsky matrix")
    idx = np.arange(m)
    # (f(zeta)-f(z))/(zeta-z) = sum_{i,j} f_{i+j+1} zeta^i z^j
    q = f[idx[:, None] + idx[None, :] + 1]
    q0inv = series_inv(q[0], m - 1)
    out = np.zeros((m, m), dtype=complex)
    out[0] = series_log(q[0], m - 1)
    for n in range(1, m):
        s = n * q[n]
        for j in range(1, n):
            s = s - j * np.convolve(out[j], q[n - j])[:m]
        out[n] = np.convolve(s, q0inv)[:m] / n
    return out


def grunsky_matrix(log_fp: PowerSeries, k: int, method: str = "series",
                   radii: tuple = (0.9, 0.95), n_angles: int = 256) -> GrunskyMatrix:
    """K x K normalised Grunsky matrix of the map with the given log f'.

    ``series`` expands the two-variable logarithm directly. ``sampling``
    takes a 2D FFT of the kernel on two concentric circles and is kept as an
    independent cross-check; its accuracy degrades like (r1 r2)^K / eps.
    """
    if k < 1:
        raise InvalidArgument("matrix size must be positive")
    jj = np.arange(1, k + 1)
    norm = np.sqrt(np.outer(jj, jj))
    if method == "series":
        beta = grunsky_coefficients(log_fp, k)
        return GrunskyMatrix(norm * beta[1:, 1:], "series")
    if method == "sampling":
        r1, r2 = radii
        if not (0 < r1 < 1 and 0 < r2 < 1 and r1 != r2):
            raise InvalidArgument("sampling radii must be distinct and inside the unit disk")
        if n_angles < 2 * k:
            raise InvalidArgument("too few sampling angles for the requested size")
        f = map_from_log_derivative(log_fp)
        fs = PowerSeries(f)
        fps = fs.derivative()
        t = 2 * np.pi * np.arange(n_angles) / n_angles
        z1 = r1 * np.exp(1j * t)[:, None]
        z2 = r2 * np.exp(1j * t)[None, :]
        kern = fps.evaluate(z1) * fps.evaluate(z2) / (fs.evaluate(z1) - fs.evaluate(z2)) ** 2 \
            - 1.0 / (z1 - z2) ** 2
        a = np.fft.fft2(kern) / n_angles ** 2
        i = np.arange(k)
        a = a[:k, :k] / np.outer(r1 ** i, r2 ** i)
        return GrunskyMatrix(a / norm, "sampling")
    raise InvalidArgument(f"unknown method {method!r}")


def grunsky_kernel(log_fp: PowerSeries, zeta, z, series_radius: float = 1e-2):
    """f'(zeta) f'(z)/(f(zeta)-f(z))^2 - 1/(zeta-z)^2, holomorphic across zeta = z.

    Near the diagonal the double series of the kernel is summed instead of
    the cancelling difference quotient.
    """
    zeta = np.asarray(zeta, dtype=complex)
    z = np.asarray(z, dtype=complex)
    zeta, z = np.broadcast_arrays(zeta, z)
    f = map_from_log_derivative(log_fp)
    fs = PowerSeries(f)
    fps = fs.derivative()
    out = np.empty(zeta.shape, dtype=complex)
    near = np.abs(zeta - z) < series_radius
    far = ~near
    if np.any(far):
        a, b = zeta[far], z[far]
        out[far] = fps.evaluate(a) * fps.evaluate(b) / (fs.evaluate(a) - fs.evaluate(b)) ** 2 \
            - 1.0 / (a - b) ** 2
    if np.any(near):
        k = log_fp.truncation // 2
        beta = grunsky_coefficients(log_fp, k)
        jj = np.arange(k + 1)
        coef = np.outer(jj, jj) * beta  # coefficient of zeta^{j-1} z^{k-1}
        a, b = zeta[near], z[near]
        pa = a[:, None] ** np.maximum(jj - 1, 0)[None, :]
        pb = b[:, None] ** np.maximum(jj - 1, 0)[None, :]
        out[near] = np.einsum("pj,jk,pk->p", pa[:, 1:], coef[1:, 1:], pb[:, 1:])
    return out


# ------------------------------------------------------------------ norms

class SupResult(NamedTuple):
    value: float
    point: complex
    profile: list


def _weighted_sup(fn, power: int, n_angles: int = 256, n_radii: int = 256) -> SupResult:
    profile = []
    best_val, best_pt = -1.0, 0j
    for m in (n_angles // 4, n_angles // 2, n_angles):
        t = 2 * np.pi * np.arange(m) / m
        r = np.concatenate([np.linspace(0.0, 0.9, n_radii // 2, endpoint=False),
                            1.0 - np.logspace(-1, -4, n_radii // 2)])
        z = r[:, None] * np.exp(1j * t)[None, :]
        vals = (1 - np.abs(z) ** 2) ** power * np.abs(fn(z))
        idx = np.argsort(vals.ravel())[::-1][:6]
        cands = z.ravel()[idx]
        for c in cands:
            def neg(x):
                zz = x[0] * np.exp(1j * x[1])
                rr = min(abs(x[0]), 1.0)
                return -((1 - rr ** 2) ** power) * abs(fn(np.array([zz]))[0])
            res = optimize.minimize(neg, [abs(c), np.angle(c)], method="Nelder-Mead",
                                    options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 2000})
            v = -res.fun
            if v > best_val:
                best_val = v
                best_pt = complex(res.x[0] * np.exp(1j * res.x[1]))
            v0 = vals.ravel()[idx[0]]
            if v0 > best_val:
                best_val, best_pt = float(v0), complex(cands[0])
        profile.append([m, float(best_val)])
    return SupResult(float(best_val), best_pt, profile)


def _require_disk(phi: PowerSeries):
    if phi.domain != "disk":
        raise InvalidArgument("this norm is defined for disk series")


def norm_b2(phi: PowerSeries, detailed: bool = False):
    """sup over the disk of (1-|z|^2)^2 |phi(z)|."""
    _require_disk(phi)
    res = _weighted_sup(phi.evaluate, 2)
    return res if detailed else res.value


def norm_bloch(phi: PowerSeries, detailed: bool = False):
    """sup over the disk of (1-|z|^2) |phi'(z)|."""
    _require_disk(phi)
    d = phi.derivative()
    res = _weighted_sup(d.evaluate, 1)
    return res if detailed else res.value


def norm_script_b(phi: PowerSeries) -> float:
    """Square root of (1/pi) int_disk (1-|z|^2)^2 |phi|^2, by orthogonality."""
    _require_disk(phi)
    n = np.arange(phi.coefficients.size, dtype=float)
    w = 2.0 / ((n + 1) * (n + 2) * (n + 3))
    return float(np.sqrt(np.sum(w * np.abs(phi.coefficients) ** 2)))


def norm_ad(phi: PowerSeries) -> float:
    """Dirichlet norm (1/pi) int |phi'|^2, i.e. sqrt(sum n |c_n|^2); same on the exterior."""
    n = np.arange(phi.coefficients.size, dtype=float)
    return float(np.sqrt(np.sum(n * np.abs(phi.coefficients) ** 2)))


# ------------------------------------------------ reflected Beltrami data

@dataclass(frozen=True)
class PolarGrid:
    """Tensor quadrature on an annulus r_inner < |z| < r_outer of the exterior disk.

    Radial nodes are Gauss-Legendre in t = 1/|z|, angular nodes equispaced.
    """

    n_radial: int
    n_angular: int
    r_inner: float = 1.0
    r_outer: float = float("inf")

    def __post_init__(self):
        if self.n_radial < 1 or self.n_angular < 1:
            raise InvalidArgument("grid sizes must be positive")
        if not (1.0 <= self.r_inner < self.r_outer):
            raise InvalidArgument("need 1 <= r_inner < r_outer")

    def nodes(self):
        """Return (radii, angles, area weights) with weights for dA = rho drho dtheta."""
        x, w = np.polynomial.legendre.leggauss(self.n_radial)
        t0 = 0.0 if np.isinf(self.r_outer) else 1.0 / self.r_outer
        t1 = 1.0 / self.r_inner
        t = t0 + (t1 - t0) * 0.5 * (x + 1.0)
        wt = (t1 - t0) * 0.5 * w
        rho = 1.0 / t
        ang = 2 * np.pi * np.arange(self.n_angular) / self.n_angular
        area = wt * t ** -3.0 * (2 * np.pi / self.n_angular)
        return rho, ang, area


@dataclass(frozen=True)
class BeltramiSample:
    grid: PolarGrid
    radii: np.ndarray
    angles: np.ndarray
    values: np.ndarray  # shape (n_radial, n_angular)


def sample_beltrami(mu_fn, grid: PolarGrid) -> BeltramiSample:
    rho, ang, _ = grid.nodes()
    z = rho[:, None] * np.exp(1j * ang)[None, :]
    return BeltramiSample(grid, rho, ang, np.asarray(mu_fn(z), dtype=complex))


def ahlfors_weil_mu(s_f: PowerSeries, grid: PolarGrid, bound: float = 2.0) -> BeltramiSample:
    """mu(z) = -(|z|^2-1)^2 S_f(1/conj z) conj(z)^{-4} / 2 on the exterior disk."""
    _require_disk(s_f)
    nb = norm_b2(s_f)
    if not nb < bound:
        raise PreconditionError(f"Schwarzian norm {nb:.4g} is not below {bound}")

    def mu(z):
        zb = np.conj(z)
        return -0.5 * (np.abs(z) ** 2 - 1) ** 2 * s_f.evaluate(1.0 / zb) * zb ** -4

    return sample_beltrami(mu, grid)


class WPNorm(NamedTuple):
    total: float
    sup_part: float
    integral_part: float


def wp_norm(mu: BeltramiSample) -> WPNorm:
    """sup|mu| + ((1/pi) int |mu|^2 / (|z|^2-1)^2 dA)^{1/2} on the sample grid."""
    rho, _, area = mu.grid.nodes()
    v = np.abs(mu.values) ** 2
    dens = v / ((rho ** 2 - 1.0) ** 2)[:, None]
    integral = float(np.sum(dens * area[:, None]) / np.pi)
    sup = float(np.max(np.abs(mu.values)))
    return WPNorm(sup + np.sqrt(integral), sup, np.sqrt(integral))


def wp_norm_profile(s_f: PowerSeries, radial_sizes=(8, 16, 32, 64), n_angular: int = 128) -> list:
    """wp_norm of the reflected Beltrami coefficient under radial refinement."""
    out = []
    for nr in radial_sizes:
        res = wp_norm(ahlfors_weil_mu(s_f, PolarGrid(nr, n_angular)))
        out.append([int(nr), res.total, res.sup_part, res.integral_part])
    return out
