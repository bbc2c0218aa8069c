"""Command-line front end.

Every report is a JSON object with keys ``command``, ``config``, ``version``,
``result`` and ``flags`` (plus ``meta`` with a timestamp unless --no-meta).
Numbers in ``result`` come as {"value": x, "profile": rows} or
{"value": x, "exact": true}.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import operator
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Optional

import numpy as np

from . import __version__
from . import diagnostics as diag
from .bmo import bmo_norm_estimate, vmo_verdict
from .circle_map import CircleMap, derivative, identity
from .errors import (
    AliasingError,
    BranchError,
    DegenerateDerivativeError,
    InvalidArgument,
    PreconditionError,
    StepSizeError,
)
from .fourier_core import all_coefficients, check_grid_size, dyadic_truncations, sobolev_profile
from .gallery import (
    build_counterexample,
    counterexample_constant,
    counterexample_g_integral,
    flow_field,
    mobius_welding_triple,
)
from .holo import PowerSeries, grunsky_matrix, log_derivative_of_map
from .mapspec import map_from_spec, parse_map_arg
from .pullback import (
    commutator_identity_residual,
    energy_identity_residual,
    grunsky_relation_residual,
    pm_matrices,
    welding_identity_residual,
    welding_mismatch,
)

COMMANDS = ("analyze", "metric", "operators", "grunsky", "counterexample", "flow", "welding-check", "sweep")
NUMERICAL_FLAGS = (AliasingError, BranchError, DegenerateDerivativeError, PreconditionError, StepSizeError)

MAP_SCHEMA = """\
map spec (inline JSON or @file):
  {"family": F, "params": {...}, "grid": N}
  identity           {}
  rotation           {"beta": b}
  mobius             {"a": x | [re, im], "beta": b}
  sine               {"eps": e}              theta + e sin(theta), |e| <= 1
  wp_counterexample  {"alpha": a}            a > 1
  sine_flat          {}                      theta - sin(theta)
  from_u             {"mean": m, "cos": [...], "sin": [...]} or {"u": [samples]};
                     optional "renormalize": true
  samples            {"periodic": [...]} or {"lift": [...]}, length a power of two
--grid overrides the grid given in the map spec."""

CSV_SCHEMA = """\
CSV columns per command:
  analyze         scale,worst_oscillation,at_zero        (mean oscillation of log h')
  metric          truncation,d_partial,d_prime_partial   (squared partial sums)
  operators       matrix,row,col,re,im                   (1-based, P_plus then P_minus)
  grunsky         row,col,re,im                          (normalised Grunsky matrix)
  counterexample  truncation,phi_prime_partial,log_phi_prime_partial
  flow            psi,speed
  welding-check   grid,welding_residual
  sweep           value,d,d_prime,wp_class

exit status: 0 ok, 1 error, 2 an --assert failed (or a numerical flag was
raised while --assert was given)."""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    maps: list = field(default_factory=list)
    grid: Optional[int] = None
    trunc: int = 16
    alpha: float = 2.0
    tol_cauchy: float = diag.TOL_CAUCHY
    tol_diverge: float = diag.TOL_DIVERGE
    fmt: str = "json"
    out: Optional[str] = None
    asserts: list = field(default_factory=list)
    meta: bool = True
    poly: Optional[list] = None
    sweep: dict = field(default_factory=dict)
    jobs: int = 1

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.grid is not None:
            check_grid_size(self.grid)
        n = self.grid_or(4096)
        if self.trunc < 1 or self.trunc > n // 8:
            raise UsageError(f"--trunc must lie in [1, N/8] = [1, {n // 8}]")
        if not (self.tol_cauchy > 0 and self.tol_diverge > 0):
            raise UsageError("tolerances must be positive")
        if self.fmt not in ("json", "csv"):
            raise UsageError("format is json or csv")

    def grid_or(self, default: int) -> int:
        if self.grid is not None:
            return self.grid
        for spec in self.maps:
            if spec.get("grid"):
                return int(spec["grid"])
        return default

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d.pop("meta")
        return d


# ---------------------------------------------------------------- helpers

def _num(value, profile=None, exact=False) -> dict:
    out = {"value": None if value is None else float(value)}
    if exact:
        out["exact"] = True
    else:
        out["profile"] = profile if profile is not None else []
    return out


def _grid_profile(fn, n: int, levels: int = 3) -> list:
    """[[N', fn(N')], ...] for N' = N / 2^(levels-1), ..., N."""
    rows = []
    for j in range(levels - 1, -1, -1):
        m = n >> j
        if m >= 8:
            rows.append([m, float(fn(m))])
    return rows


def _map(cfg: RunConfig, index: int, n: int) -> CircleMap:
    if len(cfg.maps) <= index:
        raise UsageError(f"--{'map' if index == 0 else 'map2'} is required for {cfg.command}")
    return map_from_spec(cfg.maps[index], n)


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


# ---------------------------------------------------------------- commands

def _analyze(cfg, flags):
    n = cfg.grid_or(4096)
    h = _map(cfg, 0, n)
    rep = diag.wp_membership(h, cfg.tol_cauchy, cfg.tol_diverge).to_dict()
    data = derivative(h)
    res = dict(rep)
    h3 = diag.h_three_halves_probe(h)
    res["h_three_halves_probe"] = {"profile": h3.as_pairs(),
                                   "verdict": diag.trend_verdict(h3, cfg.tol_cauchy, cfg.tol_diverge)}
    prof = diag.h_half_profile(h, data)
    res["norms"] = {"h_half_log_derivative": _num(np.sqrt(prof.last), [[k, float(np.sqrt(v))] for k, v in prof.as_pairs()])}
    # for degenerate maps the cell-averaged log|h'| is used; the report says so
    osc = bmo_norm_estimate(data.log_phi_prime)
    rows = [[float(s), float(w)] for s, w in zip(osc.scales, osc.worst_oscillation)]
    res["norms"]["bmo_log_abs_derivative"] = _num(osc.estimate, rows)
    res["vmo_verdict"] = vmo_verdict(osc)
    csv_text = osc.to_csv()
    return res, csv_text


def _metric(cfg, flags):
    n = cfg.grid_or(4096)
    h1, h2 = _map(cfg, 0, n), _map(cfg, 1, n)
    try:
        rep = diag.metric_report(h1, h2)
    except DegenerateDerivativeError as exc:
        flags.append(f"degenerate_derivative: {exc}")
        return {"d": _num(None), "d_prime": _num(None)}, _rows_csv(["truncation", "d_partial", "d_prime_partial"], [])
    rows = [[k, a, b] for (k, a), (_, b) in zip(rep["d"]["profile"], rep["d_prime"]["profile"])]
    return rep, _rows_csv(["truncation", "d_partial", "d_prime_partial"], rows)


def _operators(cfg, flags):
    n = cfg.grid_or(4096)
    k = cfg.trunc
    h = _map(cfg, 0, n)
    pp, pm = pm_matrices(h, k)
    res = {"P_plus": pp.summary(), "P_minus": pm.summary()}
    lev = [m for m in (n // 4, n // 2, n) if m // 8 >= k]
    res["energy_residual"] = _num(energy_identity_residual(h, k),
                                  [[m, energy_identity_residual(_map(cfg, 0, m), k)] for m in lev])
    comm = {}
    for deg in (1, 2):
        if deg > n // 8:
            continue
        phi = PowerSeries(np.eye(deg + 1)[deg].astype(complex))
        try:
            comm[f"z^{deg}"] = _num(commutator_identity_residual(h, phi),
                                    [[m, commutator_identity_residual(_map(cfg, 0, m), phi)] for m in lev])
        except AliasingError as exc:
            flags.append(f"aliasing: {exc}")
    res["commutator_residual"] = comm
    rows = []
    for mat in (pp, pm):
        for i in range(mat.rows):
            for j in range(mat.cols):
                z = mat.entries[i, j]
                rows.append([mat.label, i + 1, j + 1, float(z.real), float(z.imag)])
    return res, _rows_csv(["matrix", "row", "col", "re", "im"], rows)


def _triple(spec: dict, n: int, k: int):
    fam = spec.get("family")
    p = spec.get("params") or {}
    if fam == "mobius":
        a = p.get("a", 0.0)
        a = complex(*a) if isinstance(a, list) else complex(a)
        return mobius_welding_triple(a, float(p.get("beta", 0.0)), n, k)
    if fam == "rotation":
        return mobius_welding_triple(0, float(p.get("beta", 0.0)), n, k)
    if fam == "identity":
        return mobius_welding_triple(0, 0.0, n, k)
    raise UsageError(f"no explicit welding triple for family {fam!r} (mobius, rotation, identity)")


def _grunsky(cfg, flags):
    n = cfg.grid_or(4096)
    k = cfg.trunc
    triple = None
    if cfg.poly is not None:
        log_fp = log_derivative_of_map(np.asarray(cfg.poly, dtype=complex), 2 * k)
    else:
        if not cfg.maps:
            raise UsageError("grunsky needs --poly or a Mobius/rotation --map")
        triple = _triple(cfg.maps[0], n, 2 * k)
        log_fp = triple.f.padded(2 * k)
    g = grunsky_matrix(log_fp, k)
    sizes = [m for m in (k // 4, k // 2, k) if m >= 1]
    res = {"size": k,
           "operator_norm": _num(g.operator_norm(),
                                 [[m, grunsky_matrix(log_fp, m).operator_norm()] for m in sizes]),
           "max_entry": _num(float(np.max(np.abs(g.entries)))),
           "sampling_crosscheck": _num(float(np.max(np.abs(
               grunsky_matrix(log_fp, k, method="sampling", n_angles=max(256, 4 * k)).entries - g.entries))))}
    res["max_entry"]["profile"] = [[m, float(np.max(np.abs(grunsky_matrix(log_fp, m).entries)))] for m in sizes]
    res["sampling_crosscheck"]["profile"] = [[0.95, res["sampling_crosscheck"]["value"]]]
    if triple is not None:
        try:
            lev = [m for m in (n // 4, n // 2, n) if m // 8 >= k]
            res["relation_residual"] = _num(
                grunsky_relation_residual(triple.h, log_fp, k),
                [[m, grunsky_relation_residual(_triple(cfg.maps[0], m, 2 * k).h, log_fp, k)] for m in lev])
        except PreconditionError as exc:
            flags.append(f"precondition: {exc}")
    rows = [[i + 1, j + 1, float(g.entries[i, j].real), float(g.entries[i, j].imag)]
            for i in range(k) for j in range(k)]
    return res, _rows_csv(["row", "col", "re", "im"], rows)


def _counterexample(cfg, flags):
    n = cfg.grid_or(4096)
    alpha = cfg.alpha
    h, data = build_counterexample(alpha, n)
    trunc = dyadic_truncations(n // 4)
    pp = sobolev_profile(all_coefficients(data.phi_prime), 0.5, trunc)
    pl = sobolev_profile(all_coefficients(data.log_phi_prime), 0.5, trunc)
    sups = _grid_profile(lambda m: np.max(derivative(build_counterexample(alpha, m)[0]).phi_prime.values), n, 4)
    val, bound = counterexample_g_integral(alpha)
    res = {
        "alpha": alpha,
        "normalising_constant": _num(counterexample_constant(alpha),
                                     [[d, counterexample_constant(alpha, d)] for d in (1e-2, 1e-3, 1e-4)]),
        "phi_prime_profile": {"rows": pp.as_pairs(),
                              "verdict": diag.trend_verdict(pp, cfg.tol_cauchy, cfg.tol_diverge)},
        "log_phi_prime_profile": {"rows": pl.as_pairs(),
                                  "verdict": diag.trend_verdict(pl, cfg.tol_cauchy, cfg.tol_diverge)},
        "sup_phi_prime": _num(sups[-1][1], sups),
        # adaptive quadrature at relative tolerance 1e-10
        "g_integral": _num(val, [[1e-10, float(val)]]),
        "g_bound": _num(bound, exact=True),
        "g_below_bound": bool(val < bound),
        "wp_class": diag.wp_membership(h, cfg.tol_cauchy, cfg.tol_diverge).verdicts["wp_class"],
    }
    rows = [[k, a, b] for (k, a), (_, b) in zip(pp.as_pairs(), pl.as_pairs())]
    return res, _rows_csv(["truncation", "phi_prime_partial", "log_phi_prime_partial"], rows)


def _flow(cfg, flags):
    n = cfg.grid_or(4096)
    try:
        ff = flow_field(cfg.alpha, n=n)
    except StepSizeError as exc:
        flags.append(f"step_size: {exc}")
        return {"richardson_ratio": _num(None)}, _rows_csv(["psi", "speed"], [])
    res = {
        "alpha": cfg.alpha,
        "step": ff.step,
        "richardson_ratio": _num(ff.richardson_ratio, [[ff.step, ff.richardson_ratio]]),
        "speed_h_three_halves": {"rows": ff.speed_profile.as_pairs(),
                                 "verdict": diag.trend_verdict(ff.speed_profile, cfg.tol_cauchy, cfg.tol_diverge)},
        "map_h_three_halves": {"rows": ff.map_profile.as_pairs(),
                               "verdict": diag.trend_verdict(ff.map_profile, cfg.tol_cauchy, cfg.tol_diverge)},
    }
    psi = ff.speed.theta
    rows = [[float(p), float(v)] for p, v in zip(psi, np.real(ff.speed.values))]
    return res, _rows_csv(["psi", "speed"], rows)


def _welding(cfg, flags):
    n = cfg.grid_or(4096)
    if not cfg.maps:
        raise UsageError("welding-check needs --map")
    k = max(2 * cfg.trunc, 64)
    rows = []
    for m in (n // 4, n // 2, n):
        if m < 8:
            continue
        t = _triple(cfg.maps[0], m, k)
        try:
            rows.append([m, welding_identity_residual(t.h, t.f, t.g)])
        except BranchError as exc:
            flags.append(f"branch: {exc}")
            rows.append([m, float("nan")])
    t = _triple(cfg.maps[0], n, k)
    res = {"welding_residual": _num(rows[-1][1], rows),
           "compatibility_mismatch": _num(welding_mismatch(t.h, t.f),
                                          [[m, welding_mismatch(_triple(cfg.maps[0], m, k).h, t.f)]
                                           for m, _ in rows])}
    return res, _rows_csv(["grid", "welding_residual"], rows)


def _sweep_point(args):
    spec, n, tc, td = args
    h = map_from_spec(spec, n)
    ident = identity(n)
    try:
        d = diag.metric_d(ident, h)
        dp = diag.metric_d_prime(ident, h)
    except DegenerateDerivativeError:
        d = dp = float("nan")
    return d, dp, diag.wp_membership(h, tc, td).verdicts["wp_class"]


def _sweep(cfg, flags):
    n = cfg.grid_or(1024)
    sw = cfg.sweep
    fam, param, values = sw.get("family"), sw.get("param"), sw.get("values")
    if not fam or not param or not values:
        raise UsageError("sweep needs --family, --param and --values")
    base = dict(sw.get("base") or {})
    specs = []
    for v in values:
        p = dict(base)
        p[param] = v
        specs.append({"family": fam, "params": p, "grid": n})
    jobs = [(s, n, cfg.tol_cauchy, cfg.tol_diverge) for s in specs]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            out = list(ex.map(_sweep_point, jobs))
    else:
        out = [_sweep_point(j) for j in jobs]
    rows = [[float(v), float(d), float(dp), w] for v, (d, dp, w) in zip(values, out)]
    res = {"family": fam, "param": param,
           "columns": ["value", "d", "d_prime", "wp_class"], "rows": rows,
           "grid": n}
    return res, _rows_csv(["value", "d", "d_prime", "wp_class"], rows)


HANDLERS = {"analyze": _analyze, "metric": _metric, "operators": _operators, "grunsky": _grunsky,
            "counterexample": _counterexample, "flow": _flow, "welding-check": _welding, "sweep": _sweep}


# ---------------------------------------------------------------- asserts

_OPS = {"==": operator.eq, "!=": operator.ne, "<=": operator.le, ">=": operator.ge,
        "<": operator.lt, ">": operator.gt}
_ASSERT_RE = re.compile(r"^\s*([\w.\-\^]+)\s*(==|!=|<=|>=|<|>)\s*(.+?)\s*$")


def _lookup(tree, path: str):
    node = tree
    for part in path.split("."):
        if isinstance(node, dict) and part in node:
            node = node[part]
        elif isinstance(node, list) and part.isdigit() and int(part) < len(node):
            node = node[int(part)]
        else:
            raise KeyError(path)
    if isinstance(node, dict) and "value" in node:
        node = node["value"]
    return node


def check_assertion(result: dict, expr: str) -> bool:
    """``path OP literal`` evaluated against the result tree, e.g. ``verdicts.wp_class == yes-trend``."""
    m = _ASSERT_RE.match(expr)
    if not m:
        raise UsageError(f"cannot parse assertion {expr!r}")
    path, op, lit = m.groups()
    try:
        left = _lookup(result, path)
    except KeyError:
        return False
    try:
        right = json.loads(lit)
    except json.JSONDecodeError:
        right = lit
    if isinstance(right, (int, float)) and not isinstance(right, bool):
        if left is None:
            return False
        left = float(left)
    try:
        return bool(_OPS[op](left, right))
    except TypeError:
        return False


# ---------------------------------------------------------------- driver

def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else repr(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def run(cfg: RunConfig):
    """Execute a validated config; returns (exit status, report dict, rendered text)."""
    cfg.validate()
    flags: list = []
    try:
        result, csv_text = HANDLERS[cfg.command](cfg, flags)
    except NUMERICAL_FLAGS as exc:
        flags.append(f"{type(exc).__name__}: {exc}")
        result, csv_text = {}, ""
    report = {"command": cfg.command, "config": cfg.echo(), "version": __version__,
              "result": result, "flags": flags}
    if cfg.meta:
        report["meta"] = {"timestamp": datetime.now(timezone.utc).isoformat()}
    report = _clean(report)
    failed = [a for a in cfg.asserts if not check_assertion(report["result"], a)]
    report["assertions"] = {"checked": list(cfg.asserts), "failed": failed}
    status = 0
    if cfg.asserts and (failed or flags):
        status = 2
    text = json.dumps(report, sort_keys=True, indent=2) + "\n" if cfg.fmt == "json" else csv_text
    return status, report, text


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wpcircle", description="Numerical diagnostics for circle homeomorphisms.",
                     epilog=MAP_SCHEMA + "\n\n" + CSV_SCHEMA,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name, epilog=MAP_SCHEMA + "\n\n" + CSV_SCHEMA,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--map", help="map spec (JSON or @file)")
        p.add_argument("--map2", help="second map spec")
        p.add_argument("--grid", type=int, help="grid size N (power of two, >= 8)")
        p.add_argument("--trunc", type=int, default=16, help="truncation K <= N/8")
        p.add_argument("--alpha", type=float, default=2.0)
        p.add_argument("--tol-cauchy", type=float, default=diag.TOL_CAUCHY)
        p.add_argument("--tol-diverge", type=float, default=diag.TOL_DIVERGE)
        p.add_argument("--assert", dest="asserts", action="append", default=[],
                       help="'path OP value' checked against the result; exit 2 on failure")
        fmt = p.add_mutually_exclusive_group()
        fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
        fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--no-meta", action="store_true", help="omit the timestamp")
        if name == "grunsky":
            p.add_argument("--poly", help="Taylor coefficients of f as a JSON list")
        if name == "sweep":
            p.add_argument("--family", required=True)
            p.add_argument("--param", required=True)
            p.add_argument("--values", required=True, help="comma-separated values")
            p.add_argument("--base", default="{}", help="fixed parameters as JSON")
            p.add_argument("--jobs", type=int, default=1)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    maps = []
    for text in (ns.map, ns.map2):
        if text is not None:
            maps.append(parse_map_arg(text))
    cfg = RunConfig(command=ns.command, maps=maps, grid=ns.grid, trunc=ns.trunc, alpha=ns.alpha,
                    tol_cauchy=ns.tol_cauchy, tol_diverge=ns.tol_diverge, fmt=ns.fmt or "json",
                    out=ns.out, asserts=list(ns.asserts), meta=not ns.no_meta)
    if getattr(ns, "poly", None):
        cfg.poly = json.loads(ns.poly)
    if ns.command == "sweep":
        try:
            vals = [float(v) for v in ns.values.split(",") if v.strip()]
        except ValueError:
            raise UsageError("--values must be comma-separated numbers") from None
        cfg.sweep = {"family": ns.family, "param": ns.param, "values": vals, "base": json.loads(ns.base)}
        cfg.jobs = ns.jobs
    return cfg


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = config_from_args(ns)
        status, _, text = run(cfg)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (UsageError, InvalidArgument, json.JSONDecodeError, OSError) as exc:
        print(f"wpcircle: error: {exc}\n(run 'wpcircle <command> --help' for the map-spec schema)",
              file=sys.stderr)
        return 1
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status
