"""JSON map specifications: {"family": ..., "params": {...}, "grid": N}."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np

from . import circle_map as cm
from . import gallery
from .errors import InvalidArgument
from .fourier_core import grid as make_grid

FAMILIES = ("identity", "rotation", "mobius", "sine", "wp_counterexample", "sine_flat", "from_u", "samples")
CLOSED = ("identity", "rotation", "mobius", "sine", "wp_counterexample", "sine_flat")


def parse_map_arg(text: str) -> dict:
    """Inline JSON, or ``@path`` to a JSON file."""
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidArgument(f"map spec is not valid JSON: {exc}") from None
    if not isinstance(spec, dict):
        raise InvalidArgument("map spec must be a JSON object")
    return spec


def _complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise InvalidArgument("complex parameters are [re, im]")
        return complex(float(x[0]), float(x[1]))
    return complex(float(x))


def _trig_density(mean: float, cos: list, sin: list):
    cos = np.asarray(cos, dtype=float)
    sin = np.asarray(sin, dtype=float)

    def u(t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, float(mean))
        for k, c in enumerate(cos, start=1):
            out = out + c * np.cos(k * t)
        for k, s in enumerate(sin, start=1):
            out = out + s * np.sin(k * t)
        return out

    return u


def map_from_spec(spec: dict, grid: Optional[int] = None) -> cm.CircleMap:
    fam = spec.get("family")
    if fam not in FAMILIES:
        raise InvalidArgument(f"unknown family {fam!r}; expected one of {FAMILIES}")
    p = dict(spec.get("params") or {})
    n = grid if grid is not None else spec.get("grid")
    if fam == "samples":
        if "periodic" in p:
            per = np.asarray(p["periodic"], dtype=float)
        elif "lift" in p:
            lift = np.asarray(p["lift"], dtype=float)
            per = lift - make_grid(lift.size)
        else:
            raise InvalidArgument("samples family needs 'periodic' or 'lift'")
        h = cm.CircleMap(per, "samples", {})
        return h if n is None or n == h.n_samples else h.resample(int(n))
    if n is None:
        raise InvalidArgument("grid size missing from map spec")
    n = int(n)
    if fam == "identity":
        return cm.identity(n)
    if fam == "rotation":
        return cm.rotation(float(p.get("beta", 0.0)), n)
    if fam == "mobius":
        return cm.mobius(_complex(p.get("a", 0.0)), float(p.get("beta", 0.0)), n)
    if fam == "sine":
        return cm.sine_map(float(p.get("eps", 0.0)), n)
    if fam == "wp_counterexample":
        return gallery.build_counterexample(float(p.get("alpha", 2.0)), n)[0]
    if fam == "sine_flat":
        return gallery.build_sine_flat(n)
    # from_u
    renorm = bool(p.get("renormalize", True))
    if "u" in p:
        from .fourier_core import GridFunction
        u = GridFunction(np.asarray(p["u"], dtype=float))
        h = cm.from_boundary_density(u, renorm)
        return h if h.n_samples == n else h.resample(n)
    mean = float(p.get("mean", 0.0))
    cos = list(p.get("cos", []))
    sin = list(p.get("sin", []))
    return cm.from_boundary_density(_trig_density(mean, cos, sin), renorm, n,
                                    params={"mean": mean, "cos": cos, "sin": sin})


def map_to_spec(h: cm.CircleMap) -> dict:
    """Closed-form families keep their parameters; anything else is written as samples."""
    if h.family in CLOSED + ("from_u",):
        params = {k: v for k, v in h.params.items() if k != "normalized"}
        if not h.params.get("normalized"):
            return {"family": h.family, "params": params, "grid": h.n_samples}
    return {"family": "samples", "params": {"periodic": [float(x) for x in h.periodic]},
            "grid": h.n_samples}


def dumps(h: cm.CircleMap) -> str:
    return json.dumps(map_to_spec(h), sort_keys=True)
