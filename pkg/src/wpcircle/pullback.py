"""Composition operator u -> u o h and its analytic / anti-analytic parts.

Matrices act on the normalised Dirichlet basis e_k(z) = z^k / sqrt(k),
k >= 1. Column k of ``P_plus`` holds sqrt(m/k) c_m and column k of
``P_minus`` holds sqrt(m/k) c_{-m} (m >= 1), where c_n are the Fourier
coefficients of exp(i k phi(theta)).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .circle_map import CircleMap, invert, log_derivative
from .errors import AliasingError, BranchError, InvalidArgument, PreconditionError
from .fourier_core import (
    FourierSeries,
    GridFunction,
    all_coefficients,
    fourier_coefficients,
    harmonic_conjugate_grid,
    sobolev_seminorm,
)
from .holo import PowerSeries, grunsky_matrix, map_from_log_derivative

TAIL_FRACTION = 0.1
COLUMN_TAIL = 1e-8


def _tail_fraction(c: np.ndarray, n: int) -> float:
    k = np.fft.fftfreq(n, 1.0 / n)
    e = np.abs(c) ** 2
    tot = e.sum()
    if tot == 0:
        return 0.0
    return float(e[np.abs(k) > n // 4].sum() / tot)


def pullback_apply(h: CircleMap, u: FourierSeries, max_mode: Optional[int] = None) -> FourierSeries:
    """Coefficients of u o h from samples of u at the lift values."""
    n = h.n_samples
    if max_mode is None:
        max_mode = n // 2 - 1
    vals = u.evaluate(h.lift)
    c = np.fft.fft(vals) / n
    frac = _tail_fraction(c, n)
    if frac > TAIL_FRACTION:
        raise AliasingError(f"{frac:.1%} of the spectrum of u o h lies above N/4; refine the grid")
    return fourier_coefficients(GridFunction(vals), max_mode)


@dataclass(frozen=True)
class OperatorMatrix:
    entries: np.ndarray
    label: str
    flagged: tuple = field(default_factory=tuple)  # 1-based columns with large aliasing tails

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def column_energies(self) -> np.ndarray:
        return np.sum(np.abs(self.entries) ** 2, axis=0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row", "col", "re", "im"])
        for i in range(self.rows):
            for j in range(self.cols):
                z = self.entries[i, j]
                w.writerow([i + 1, j + 1, repr(float(z.real)), repr(float(z.imag))])
        return buf.getvalue()

    def summary(self) -> dict:
        return {"label": self.label, "rows": self.rows, "cols": self.cols,
                "column_energies": [float(x) for x in self.column_energies()],
                "flagged_columns": list(self.flagged)}


def _column_spectra(h: CircleMap, k: int) -> np.ndarray:
    n = h.n_samples
    kk = np.arange(1, k + 1)
    vals = np.exp(1j * np.outer(h.lift, kk))
    return np.fft.fft(vals, axis=0) / n  # (n, k)


def pm_matrices(h: CircleMap, k: int, rows: Optional[int] = None):
    """Truncated P_plus and P_minus with ``k`` columns and ``rows`` rows (default N/4)."""
    n = h.n_samples
    if k < 1 or k > n // 8:
        raise InvalidArgument(f"need 1 <= K <= N/8 = {n // 8}")
    r = n // 4 if rows is None else int(rows)
    if r < 1 or r > n // 2 - 1:
        raise InvalidArgument("row count out of range")
    spec = _column_spectra(h, k)
    m = np.arange(1, r + 1)
    kk = np.arange(1, k + 1)
    scale = np.sqrt(np.outer(m, 1.0 / kk))
    pos = spec[m, :]
    neg = spec[(-m) % n, :]
    freq = np.abs(np.fft.fftfreq(n, 1.0 / n))
    weights = freq[:, None] * np.abs(spec) ** 2
    tail = weights[freq > r].sum(axis=0) / np.maximum(weights.sum(axis=0), 1e-300)
    flagged = tuple(int(j + 1) for j in np.flatnonzero(tail >= COLUMN_TAIL))
    return (OperatorMatrix(scale * pos, "P_plus", flagged),
            OperatorMatrix(scale * neg, "P_minus", flagged))


def energy_identity_residual(h: CircleMap, k: int) -> float:
    """max over unflagged columns j <= K/2 of | |P+ e_j|^2 - 1 - |P- e_j|^2 |."""
    pp, pm = pm_matrices(h, k)
    ep, em = pp.column_energies(), pm.column_energies()
    cols = [j for j in range(1, max(1, k // 2) + 1) if j not in pp.flagged]
    if not cols:
        return float("nan")
    idx = np.array(cols) - 1
    return float(np.max(np.abs(ep[idx] - 1.0 - em[idx])))


def _boundary_samples(phi: PowerSeries, angles: np.ndarray) -> np.ndarray:
    return phi.evaluate(np.exp(1j * angles))


def commutator_identity_residual(h: CircleMap, phi: PowerSeries) -> float:
    """sup over the grid of |(H P_h + P_h H) phi + i (2 P+_h phi - (P+_h phi)(0) - phi(0))|."""
    if phi.domain != "disk":
        raise InvalidArgument("phi must be a disk series")
    n = h.n_samples
    deg = max(1, phi.truncation)
    if deg > n // 8:
        raise InvalidArgument("polynomial degree too large for this grid")
    c = phi.coefficients
    phi0 = c[0]
    composed = GridFunction(_boundary_samples(phi, h.lift))
    lhs = harmonic_conjugate_grid(composed).values
    lhs = lhs + (-1j) * (composed.values - phi0)
    # right-hand side from the P_plus matrix columns
    pp, _ = pm_matrices(h, deg)
    r = pp.rows
    m = np.arange(1, r + 1)
    kk = np.arange(1, deg + 1)
    raw = pp.entries * np.sqrt(np.outer(1.0 / m, kk))  # back to plain coefficients c_m^{(k)}
    pos = raw @ c[1:deg + 1]
    spec0 = _column_spectra(h, deg)[0, :]
    const = phi0 + spec0 @ c[1:deg + 1]
    theta = h.theta
    pplus = np.exp(1j * np.outer(theta, m)) @ pos + const
    rhs = -1j * (2.0 * pplus - const - phi0)
    return float(np.max(np.abs(lhs - rhs)))


def welding_mismatch(h: CircleMap, f_log_fp: PowerSeries) -> float:
    """Relative size of the modes n >= 2 of f(h(e^{i theta})).

    For a genuine welding pair f o h extends to the exterior disk with a
    simple pole at infinity, so these modes vanish.
    """
    f = PowerSeries(map_from_log_derivative(f_log_fp))
    vals = f.evaluate(np.exp(1j * h.lift))
    n = h.n_samples
    c = np.fft.fft(vals) / n
    freq = np.fft.fftfreq(n, 1.0 / n)
    tot = np.sqrt(np.sum(np.abs(c) ** 2))
    return float(np.sqrt(np.sum(np.abs(c[freq >= 2]) ** 2)) / tot)


def grunsky_relation_residual(h: CircleMap, f_log_fp: PowerSeries, k: int,
                              compat_tol: float = 1e-6) -> float:
    """Largest column norm of P+_h G_f - J P-_h J on the K x K block.

    J P J is the entrywise conjugate in the real basis e_k.
    """
    mis = welding_mismatch(h, f_log_fp)
    if mis > compat_tol:
        raise PreconditionError(f"f o h is not exterior-holomorphic (mismatch {mis:.3g})")
    pp, pm = pm_matrices(h, k, rows=k)
    g = grunsky_matrix(f_log_fp, k).entries
    res = pp.entries @ g - np.conj(pm.entries)
    return float(np.max(np.linalg.norm(res, axis=0)))


def welding_identity_residual(h: CircleMap, f_log_fp: PowerSeries, g_log_gp: PowerSeries) -> float:
    """sup |log h' - (log g' - (log f') o h)| on the grid, modulo 2 pi i."""
    if f_log_fp.domain != "disk" or g_log_gp.domain != "exterior":
        raise InvalidArgument("need a disk series for f and an exterior series for g")
    lh = log_derivative(h).values
    z = np.exp(1j * h.theta)
    lg = g_log_gp.evaluate(z)
    lf = f_log_fp.evaluate(np.exp(1j * h.lift))
    for name, v in (("log g'", lg), ("log f' o h", lf), ("log h'", lh)):
        jumps = np.abs(np.diff(np.append(v.imag, v.imag[0])))
        if np.any(jumps > np.pi):
            raise BranchError(f"branch of {name} jumps by 2 pi on the grid")
    diff = lh - (lg - lf)
    # the three logarithms are each defined up to 2 pi i; fix it at theta = 0
    shift = 2j * np.pi * np.round(diff[0].imag / (2 * np.pi))
    return float(np.max(np.abs(diff - shift)))


def corollary_probe(h: CircleMap, v: GridFunction, experimental: bool = False,
                    k: int = 32) -> dict:
    """Construct u with (H P_h + P_h H) u = v - const and compare 2|u| with |v|.

    The explicit route phi = P_{h^-1} P psi is used when P-_h is negligible
    (Mobius maps). With ``experimental`` the truncated P_plus matrix is
    inverted by least squares instead; its conditioning is not controlled.
    """
    if not v.is_real:
        raise InvalidArgument("v must be real")
    n = h.n_samples
    a = all_coefficients(v)
    modes = a.modes
    # psi = i (v + i Hv) / 2 has only positive modes: i a_n for n > 0
    pos = np.where(modes > 0, 1j * a.coefficients, 0)
    _, pm = pm_matrices(h, min(k, n // 8))
    small_minus = float(np.max(np.abs(pm.entries))) < 1e-12
    if small_minus:
        psi = FourierSeries(pos)
        phi = pullback_apply(invert(h), psi)
        phi_pos = np.where(phi.modes > 0, phi.coefficients, 0)
        route = "explicit"
    elif experimental:
        kk = min(k, n // 8)
        pp, _ = pm_matrices(h, kk)
        b = np.zeros(pp.rows, dtype=complex)
        sel = (modes > 0) & (modes <= pp.rows)
        b[modes[sel] - 1] = pos[sel] * np.sqrt(modes[sel])
        x, *_ = np.linalg.lstsq(pp.entries, b, rcond=None)
        jj = np.arange(1, kk + 1)
        phi_pos = np.zeros_like(pos)
        phi_pos[np.searchsorted(modes, jj)] = x / np.sqrt(jj)
        route = "experimental-lstsq"
    else:
        raise PreconditionError("no solver-free construction for this map; pass experimental=True")
    u_coef = 0.5 * (phi_pos + np.conj(phi_pos[::-1]))
    u = FourierSeries(u_coef)
    nu = sobolev_seminorm(u, 0.5)
    nv = sobolev_seminorm(a, 0.5)
    return {"route": route, "norm_u": nu, "norm_v": nv, "holds": bool(2 * nu <= nv * (1 + 1e-9)),
            "solution": u}
