"""Sampled functions on the unit circle and their Fourier series.

Grid convention: ``N`` equispaced nodes ``theta_j = 2*pi*j/N`` with ``N`` a
power of two, at least 8. Coefficients follow ``a_n = (1/N) sum_j u_j
exp(-i n theta_j)`` so that ``u(theta) = sum_n a_n exp(i n theta)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import InvalidArgument

TWO_PI = 2.0 * np.pi


def check_grid_size(n: int) -> int:
    n = int(n)
    if n < 8 or n & (n - 1):
        raise InvalidArgument(f"grid size must be a power of two >= 8, got {n}")
    return n


def grid(n: int) -> np.ndarray:
    n = check_grid_size(n)
    return TWO_PI * np.arange(n) / n


@dataclass(frozen=True)
class GridFunction:
    """Values of a function at the equispaced nodes of the circle."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 1:
            raise InvalidArgument("grid samples must be one-dimensional")
        check_grid_size(v.size)
        if not np.all(np.isfinite(v)):
            raise InvalidArgument("grid samples must be finite")
        if not np.iscomplexobj(v):
            v = v.astype(float)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, f: Callable, n: int) -> "GridFunction":
        return cls(np.asarray(f(grid(n))))

    @property
    def n_samples(self) -> int:
        return self.values.size

    @property
    def theta(self) -> np.ndarray:
        return grid(self.n_samples)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)

    def shifted(self, k: int) -> "GridFunction":
        """Cyclic shift: the result at node j is the input at node j + k."""
        return GridFunction(np.roll(self.values, -k))


@dataclass(frozen=True)
class FourierSeries:
    """Coefficients ``a_{-K} .. a_K`` of a truncated Fourier series."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.ndim != 1 or c.size % 2 != 1:
            raise InvalidArgument("coefficient array must have odd length 2K+1")
        object.__setattr__(self, "coefficients", c)

    @property
    def max_mode(self) -> int:
        return (self.coefficients.size - 1) // 2

    @property
    def modes(self) -> np.ndarray:
        k = self.max_mode
        return np.arange(-k, k + 1)

    def __getitem__(self, n: int) -> complex:
        k = self.max_mode
        if abs(n) > k:
            return 0j
        return self.coefficients[n + k]

    def truncated(self, k: int) -> "FourierSeries":
        if k >= self.max_mode:
            return self
        m = self.max_mode
        return FourierSeries(self.coefficients[m - k:m + k + 1])

    def evaluate(self, theta, chunk: int = 2048) -> np.ndarray:
        """Direct summation at arbitrary angles."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        out = np.empty(theta.size, dtype=complex)
        n = self.modes
        for s in range(0, theta.size, chunk):
            t = theta[s:s + chunk]
            out[s:s + chunk] = np.exp(1j * np.outer(t, n)) @ self.coefficients
        return out

    def to_grid(self, n: int) -> GridFunction:
        """Exact synthesis on an N-point grid (requires K < N/2)."""
        n = check_grid_size(n)
        if self.max_mode >= n // 2:
            raise InvalidArgument("grid too coarse for this series")
        full = np.zeros(n, dtype=complex)
        full[self.modes % n] = self.coefficients
        return GridFunction(np.fft.ifft(full) * n)

    def real_part_series(self) -> "FourierSeries":
        """Coefficients of Re u, i.e. (a_n + conj(a_{-n}))/2."""
        c = self.coefficients
        return FourierSeries(0.5 * (c + np.conj(c[::-1])))


@dataclass(frozen=True)
class Profile:
    """Partial sums ``S(K)`` at increasing truncations ``K``."""

    truncations: tuple
    values: tuple

    def increments(self) -> np.ndarray:
        return np.diff(np.asarray(self.values, dtype=float))

    def at(self, k: int) -> float:
        return self.values[self.truncations.index(k)]

    @property
    def last(self) -> float:
        return self.values[-1]

    def as_pairs(self) -> list:
        return [[int(k), float(v)] for k, v in zip(self.truncations, self.values)]


def _cubic_weights(theta: np.ndarray, nodes: tuple) -> np.ndarray:
    """w_q(theta) = int_0^1 ell_q(s) exp(-i theta s) ds for the Lagrange basis on ``nodes``."""
    s, lam = np.polynomial.legendre.leggauss(24)
    s = 0.5 * (s + 1.0)
    lam = 0.5 * lam
    basis = []
    for q in nodes:
        ell = np.ones_like(s)
        for r in nodes:
            if r != q:
                ell = ell * (s - r) / (q - r)
        basis.append(ell * lam)
    basis = np.array(basis)  # (4, nodes)
    phase = np.exp(-1j * np.outer(theta, s))  # (modes, nodes)
    return phase @ basis.T  # (modes, 4)


def _cubic_coefficients(u: np.ndarray, k: int) -> np.ndarray:
    # Fourier integral of the piecewise cubic interpolant. The seam at
    # theta = 0 is treated as two endpoints so kinks there cost nothing.
    n = u.size
    h = TWO_PI / n
    modes = np.arange(-k, k + 1)
    th = modes * h
    interior = (-1, 0, 1, 2)
    w = _cubic_weights(th, interior)
    ext = np.exp(1j * np.outer(th, np.array(interior)))
    big_w = np.sum(w * ext, axis=1)
    dft = np.fft.fft(u)[modes % n]
    total = h * big_w * dft
    # first cell: replace periodic stencil by {0,1,2,3}
    per0 = w @ np.array([u[-1], u[0], u[1], u[2]])
    v0 = _cubic_weights(th, (0, 1, 2, 3)) @ np.array(u[0:4])
    total += h * (v0 - per0)
    # last cell: stencil {N-3, N-2, N-1, N} with u_N = u_0
    pl = w @ np.array([u[-2], u[-1], u[0], u[1]])
    vl = _cubic_weights(th, (-2, -1, 0, 1)) @ np.array([u[-3], u[-2], u[-1], u[0]])
    total += h * np.exp(-1j * th * (n - 1)) * (vl - pl)
    return total / TWO_PI


def fourier_coefficients(u: GridFunction, max_mode: int, method: str = "dft") -> FourierSeries:
    """Coefficients ``a_{-K}..a_K`` of sampled data.

    ``method="dft"`` is the plain discrete transform, exact for trigonometric
    polynomials below the Nyquist limit. ``method="cubic"`` integrates a
    piecewise cubic interpolant instead; it is far more accurate for
    functions that are smooth on the open arc but have a kink at theta = 0.
    """
    n = u.n_samples
    k = int(max_mode)
    if k < 0 or k > n // 2 - 1:
        raise InvalidArgument(f"max_mode must lie in [0, {n // 2 - 1}], got {max_mode}")
    if method == "dft":
        full = np.fft.fft(u.values) / n
        return FourierSeries(full[np.arange(-k, k + 1) % n])
    if method == "cubic":
        return FourierSeries(_cubic_coefficients(np.asarray(u.values, dtype=complex), k))
    raise InvalidArgument(f"unknown method {method!r}")


def all_coefficients(u: GridFunction) -> FourierSeries:
    return fourier_coefficients(u, u.n_samples // 2 - 1)


def _weighted_energy(a: FourierSeries, s: float) -> np.ndarray:
    n = np.abs(a.modes).astype(float)
    w = np.zeros_like(n)
    nz = n > 0
    w[nz] = n[nz] ** (2.0 * s)
    return w * np.abs(a.coefficients) ** 2


def sobolev_seminorm(a: FourierSeries, s: float) -> float:
    """(sum_{n != 0} |n|^{2s} |a_n|^2)^{1/2}."""
    if s < 0:
        raise InvalidArgument("smoothness index must be nonnegative")
    return float(np.sqrt(np.sum(_weighted_energy(a, s))))


def dyadic_truncations(max_mode: int, start: int = 2) -> tuple:
    ks = []
    k = start
    while k <= max_mode:
        ks.append(k)
        k *= 2
    return tuple(ks)


def sobolev_profile(a: FourierSeries, s: float, truncations=None) -> Profile:
    """Squared partial sums S(K) = sum_{0<|n|<=K} |n|^{2s}|a_n|^2 at dyadic K."""
    if s < 0:
        raise InvalidArgument("smoothness index must be nonnegative")
    if truncations is None:
        truncations = dyadic_truncations(a.max_mode)
    e = _weighted_energy(a, s)
    n = np.abs(a.modes)
    order = np.argsort(n, kind="stable")
    csum = np.cumsum(e[order])
    sorted_n = n[order]
    vals = []
    for k in truncations:
        if k > a.max_mode:
            raise InvalidArgument("truncation beyond available modes")
        idx = np.searchsorted(sorted_n, k, side="right") - 1
        vals.append(float(csum[idx]))
    return Profile(tuple(int(k) for k in truncations), tuple(vals))


class DoubleIntegral(NamedTuple):
    value: float
    normalized: float


def h_half_double_integral(u: GridFunction) -> DoubleIntegral:
    """Grid quadrature of the double integral of |u(s)-u(t)|^2 / sin^2((s-t)/2).

    The diagonal is excluded. ``normalized`` divides by 16 pi^2, which makes
    it comparable with the squared H^{1/2} seminorm.
    """
    v = u.values
    n = v.size
    h = TWO_PI / n
    total = 0.0
    half = n // 2
    for m in range(1, half + 1):
        d = v - np.roll(v, -m)
        s = float(np.sum(np.abs(d) ** 2)) / np.sin(np.pi * m / n) ** 2
        total += s if m == half else 2.0 * s
    total *= h * h
    return DoubleIntegral(total, total / (16.0 * np.pi ** 2))


def harmonic_conjugate(a: FourierSeries) -> FourierSeries:
    """Apply the multiplier -i sgn(n). The constant mode maps to zero."""
    return FourierSeries(-1j * np.sign(a.modes) * a.coefficients)


def harmonic_conjugate_grid(u: GridFunction) -> GridFunction:
    """Conjugate function on the grid. The Nyquist mode is dropped."""
    n = u.n_samples
    k = np.fft.fftfreq(n, 1.0 / n)
    mult = -1j * np.sign(k)
    mult[n // 2] = 0.0
    out = np.fft.ifft(mult * np.fft.fft(u.values))
    if u.is_real:
        out = out.real
    return GridFunction(out)


def spectral_derivative(u: GridFunction) -> GridFunction:
    n = u.n_samples
    k = np.fft.fftfreq(n, 1.0 / n)
    k[n // 2] = 0.0
    out = np.fft.ifft(1j * k * np.fft.fft(u.values))
    if u.is_real:
        out = out.real
    return GridFunction(out)
