"""Built-in scenarios and the JSON scenario format.

A scenario file is a JSON object::

    {
      "name": "my_square",
      "boundary": {"polygon": [[0, 0], [1, 0], [1, 1], [0, 1]]},
      "trace": {"breakpoints": [[0.0, 0.0], [0.5, 1.0], ...]},
      "partition": {
        "cells": [{"kind": "X", "arcs": [[s0, length], ...], "label": "X1"}],
        "families": [{"name": "right", "kind": "C", "plus": [s0, length],
                      "minus": [s0, length], "n": 4}]
      },
      "conditions": ["L1", "L2"],
      "solver": {"atoms": 800, "grid": 256, "k": 6, "seed": 0,
                 "representatives": "arbitrary", "n_max": 64}
    }

``boundary`` is either ``{"polygon": [[x, y], ...]}`` (counterclockwise) or
``{"pieces": [...]}`` with entries ``{"line": [[x0, y0], [x1, y1]]}`` and
``{"arc": {"center": [cx, cy], "radius": r, "theta0": t, "sweep": w}}``.
``trace`` is ``{"breakpoints": [[s, value], ...]}`` in arclength or
``{"pieces": [{"kind": "linear", "values": [a, b]}, {"kind": "constant",
"value": c}, ...]}`` with one entry per boundary piece. Partition arcs are
``[start, length]`` in arclength. A top-level ``"builtin"`` key with optional
``"params"`` loads a built-in instead.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GeometryError, InputError, UnsupportedTraceError
from .geometry import ArcPiece, BoundaryArc, BoundaryCurve, LinePiece, Point2
from .partition import Cell, Family, Partition
from .trace import (SignedBoundaryMeasure, TraceFunction, trace_from_breakpoints,
                    trace_from_pieces)

SCHEMA_VERSION = 1

DEFAULT_SOLVER = {"atoms": 800, "grid": 256, "k": 6, "seed": 0, "representatives": "arbitrary",
                  "n_max": 64, "oracle_atoms": 200}


@dataclass
class Scenario:
    name: str
    curve: BoundaryCurve
    trace: TraceFunction
    partition: Partition | None = None
    conditions: tuple = ("H1", "H2", "H3", "S")
    params: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    source: dict | None = None

    def __post_init__(self):
        self.solver = {**DEFAULT_SOLVER, **(self.solver or {})}

    @property
    def f(self) -> SignedBoundaryMeasure:
        if not hasattr(self, "_f"):
            self._f = SignedBoundaryMeasure(self.trace)
        return self._f

    @property
    def convex_pipeline(self) -> bool:
        return self.partition is None


# -------------------------------------------------------------------- builtins
def delta_square(delta: float = 0.25) -> Scenario:
    """Unit square, ``g = min(t, delta, 1 - t)`` along every side."""
    if not 0 < delta < 0.5:
        raise InputError("delta must lie in (0, 1/2)")
    curve = BoundaryCurve.polygon([(0, 0), (1, 0), (1, 1), (0, 1)])
    s = [k + t for k in range(4) for t in (0.0, delta, 1.0 - delta)]
    v = [0.0, delta, delta] * 4
    g = trace_from_breakpoints(curve, np.c_[s, v])
    return Scenario("delta_square", curve, g, params={"delta": delta})


def disk_cosine(n: int = 4096) -> Scenario:
    """Unit disk with ``g(cos t, sin t) = cos t``; the solution is ``u = x``."""
    curve = BoundaryCurve([ArcPiece(Point2(0.0, 0.0), 1.0, 0.0, math.pi),
                           ArcPiece(Point2(0.0, 0.0), 1.0, math.pi, math.pi)])
    th = np.linspace(0.0, 2 * math.pi, int(n), endpoint=False)
    g = TraceFunction(curve.length, th, np.cos(th))
    return Scenario("disk_cosine", curve, g, params={"n": int(n)})


def _rect_vertices(a, b):
    return [(-1, 0), (-a, 0), (-a, b), (a, b), (a, 0), (1, 0), (1, 1), (-1, 1)]


def rect_cshape(a: float = 0.25, b: float = 0.5, n: int = 1) -> Scenario:
    """Rectangle ``[-1,1]x[0,1]`` with the notch ``[-a,a]x[0,b]`` removed."""
    if not (0 < a < 1 and 0 < b < 1):
        raise InputError("rect_cshape needs 0 < a, b < 1")
    curve = BoundaryCurve.polygon(_rect_vertices(a, b))
    o = curve.offsets
    L = curve.length
    bp = [(o[0], 0), (o[1], 0), (o[2], -1), (o[3], -1), (o[4], 0), (o[5], 0), (o[5] + b, 0),
          (o[6], -1), (o[7], -1), (o[7] + 1 - b, 0)]
    g = trace_from_breakpoints(curve, bp)
    arc = lambda s0, length: BoundaryArc(s0, length, L)
    cells = (
        Cell("X", (arc(o[2], 2 * a), arc(o[6], 2.0)), "X1"),
        Cell("X", (arc(o[7] + 1 - b, b + 1 - a),), "X2"),
        Cell("X", (arc(o[4], 1 - a + b),), "X3"),
    )
    fams = (
        Family("right", "C", arc(o[3], b), arc(o[5] + b, 1 - b), n),
        Family("left", "C", arc(o[7], 1 - b), arc(o[1], b), n),
    )
    return Scenario("rect_cshape", curve, g, Partition(cells, fams), ("L1", "L2"),
                    {"a": a, "b": b, "n": n})


def _annulus_curve(R):
    return BoundaryCurve([
        LinePiece(Point2(1.0, 0.0), Point2(float(R), 0.0)),
        ArcPiece(Point2(0.0, 0.0), float(R), 0.0, math.pi),
        LinePiece(Point2(-float(R), 0.0), Point2(-1.0, 0.0)),
        ArcPiece(Point2(0.0, 0.0), 1.0, math.pi, -math.pi),
    ])


def circ_cshape(R: float = 2.0, alpha: float = 1.0, n: int = 6) -> Scenario:
    """Upper half annulus ``1 <= r <= R`` with data ramping over angle ``alpha``."""
    if not (R > 1 and 0 < alpha < math.pi / 2):
        raise InputError("circ_cshape needs R > 1 and 0 < alpha < pi/2")
    curve = _annulus_curve(R)
    L = curve.length
    o_out = R - 1
    o_in = 2 * (R - 1) + math.pi * R
    out = lambda th: o_out + R * th
    inn = lambda th: o_in + (math.pi - th)
    bp = [(0.0, 0.0), (out(0), 0.0), (out(alpha), 1.0), (out(math.pi - alpha), 1.0),
          (out(math.pi), 0.0), (inn(math.pi), 0.0), (inn(math.pi - alpha), 1.0),
          (inn(alpha), 1.0)]
    g = trace_from_breakpoints(curve, bp)
    arc = lambda s0, s1: BoundaryArc(s0, s1 - s0, L)
    cells = (Cell("X", (arc(out(alpha), out(math.pi - alpha)),
                        arc(inn(math.pi - alpha), inn(alpha))), "X1"),)
    fams = (
        Family("right", "E", arc(out(0), out(alpha)), arc(inn(alpha), L), n),
        Family("left", "E", arc(inn(math.pi), inn(math.pi - alpha)),
               arc(out(math.pi - alpha), out(math.pi)), n),
    )
    return Scenario("circ_cshape", curve, g, Partition(cells, fams), ("A1", "A2", "A3"),
                    {"R": R, "alpha": alpha, "n": n})


def nonuniq_squares(a: float = 1.0, b: float = 2.0) -> Scenario:
    """Region between the squares ``[-a,a]^2`` and ``[-b,b]^2`` joined at the diagonals."""
    if not 0 < a < b:
        raise InputError("nonuniq_squares needs 0 < a < b")
    verts = [(a, a), (-a, a), (-b, b), (-b, -b), (-a, -a), (a, -a), (b, -b), (b, b)]
    curve = BoundaryCurve.polygon(verts)
    o = curve.offsets
    L = curve.length
    vals = [a, a, b, b, a, a, b, b]
    g = trace_from_breakpoints(curve, np.c_[o[:8], vals])
    cells = (
        Cell("X", (BoundaryArc(o[0], o[1] - o[0], L), BoundaryArc(o[4], o[5] - o[4], L)), "middle"),
        Cell("C", (BoundaryArc(o[1], o[4] - o[1], L),), "left"),
        Cell("C", (BoundaryArc(o[5], L - o[5], L),), "right"),
    )
    return Scenario("nonuniq_squares", curve, g, Partition(cells), ("A1", "A3~"),
                    {"a": a, "b": b}, {"representatives": "rays"})


def boundary_counterexample() -> Scenario:
    """Unit square with a tent on the bottom edge; every ray runs along the boundary."""
    curve = BoundaryCurve.polygon([(0, 0), (1, 0), (1, 1), (0, 1)])
    g = trace_from_breakpoints(curve, [(0.0, 0.0), (0.5, 0.5), (1.0, 0.0)])
    return Scenario("boundary_counterexample", curve, g)


def cantor_square() -> Scenario:
    raise UnsupportedTraceError("singular-continuous trace unsupported: the Cantor-function "
                                "datum has no piecewise-linear representation")


BUILTINS = {
    "delta_square": delta_square,
    "disk_cosine": disk_cosine,
    "rect_cshape": rect_cshape,
    "circ_cshape": circ_cshape,
    "nonuniq_squares": nonuniq_squares,
    "boundary_counterexample": boundary_counterexample,
    "cantor_square": cantor_square,
}

# scan families: builder, swept parameter, condition, representatives, fixed kwargs
SCAN_FAMILIES = {
    "delta_square": ("delta", "H3", None, {}),
    "circ_cshape": ("alpha", "A3", "rays", {"n": 1}),
    "rect_cshape": ("a", "L2", "rays", {"n": 1}),
}


def builtin(name: str, **params) -> Scenario:
    try:
        fn = BUILTINS[name]
    except KeyError:
        raise InputError(f"unknown builtin {name!r}; choose from {sorted(BUILTINS)}") from None
    try:
        return fn(**params)
    except TypeError as exc:
        raise InputError(f"bad parameters for {name}: {exc}") from None


# ------------------------------------------------------------------ file format
def _curve_from_json(spec) -> BoundaryCurve:
    if "polygon" in spec:
        return BoundaryCurve.polygon([tuple(map(float, v)) for v in spec["polygon"]])
    pieces = []
    for p in spec.get("pieces", []):
        if "line" in p:
            (x0, y0), (x1, y1) = p["line"]
            pieces.append(LinePiece(Point2(float(x0), float(y0)), Point2(float(x1), float(y1))))
        elif "arc" in p:
            a = p["arc"]
            pieces.append(ArcPiece(Point2(*map(float, a["center"])), float(a["radius"]),
                                   float(a["theta0"]), float(a["sweep"])))
        else:
            raise GeometryError(f"unknown boundary piece {sorted(p)}")
    if not pieces:
        raise GeometryError("boundary needs a polygon or a piece list")
    return BoundaryCurve(pieces, eps=spec.get("eps"))


def _trace_from_json(curve, spec) -> TraceFunction:
    if spec.get("kind") == "cantor":
        cantor_square()
    if "breakpoints" in spec:
        return trace_from_breakpoints(curve, spec["breakpoints"])
    if "pieces" in spec:
        return trace_from_pieces(curve, spec["pieces"])
    raise InputError("trace needs 'breakpoints' or 'pieces'")


def _partition_from_json(curve, spec) -> Partition:
    L = curve.length
    arc = lambda a: BoundaryArc(float(a[0]), float(a[1]), L)
    cells = tuple(Cell(c["kind"], tuple(arc(a) for a in c["arcs"]), c.get("label", ""))
                  for c in spec.get("cells", []))
    fams = tuple(Family(fm["name"], fm["kind"], arc(fm["plus"]), arc(fm["minus"]), int(fm.get("n", 1)))
                 for fm in spec.get("families", []))
    return Partition(cells, fams, spec.get("provenance", "user-supplied"))


def from_dict(d: dict) -> Scenario:
    if "builtin" in d:
        sc = builtin(d["builtin"], **d.get("params", {}))
        sc.solver.update(d.get("solver", {}))
        sc.source = d
        return sc
    try:
        curve = _curve_from_json(d["boundary"])
        g = _trace_from_json(curve, d["trace"])
    except KeyError as exc:
        raise InputError(f"scenario missing key {exc}") from None
    part = _partition_from_json(curve, d["partition"]) if d.get("partition") else None
    default = ("L1", "L2") if part is not None else ("H1", "H2", "H3", "S")
    return Scenario(d.get("name", "scenario"), curve, g, part,
                    tuple(d.get("conditions", default)), d.get("params", {}),
                    d.get("solver", {}), d)


def load(path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read scenario {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"scenario {path} is not valid JSON: {exc}") from None
    return from_dict(data)


def resolve(ref: str, params: dict | None = None) -> Scenario:
    """``builtin:NAME`` or a path to a scenario file."""
    params = params or {}
    if ref.startswith("builtin:"):
        return builtin(ref.split(":", 1)[1], **params)
    sc = load(ref)
    if params:
        if sc.source and "builtin" in sc.source:
            return builtin(sc.source["builtin"], **{**sc.source.get("params", {}), **params})
        sc.solver.update(params)
    return sc


def to_dict(sc: Scenario) -> dict:
    """Serializable form with the boundary and trace written out explicitly."""
    pieces = []
    for p in sc.curve.pieces:
        if p.kind == "line":
            pieces.append({"line": [list(p.start), list(p.end)]})
        else:
            pieces.append({"arc": {"center": list(p.center), "radius": p.radius,
                                   "theta0": p.theta0, "sweep": p.sweep}})
    out = {"schema": SCHEMA_VERSION, "name": sc.name, "boundary": {"pieces": pieces},
           "trace": {"breakpoints": np.c_[sc.trace.nodes[:-1], sc.trace.vals[:-1]].tolist()},
           "conditions": list(sc.conditions), "params": sc.params, "solver": sc.solver}
    if sc.partition is not None:
        p = sc.partition
        out["partition"] = {
            "cells": [{"kind": c.kind, "label": c.label,
                       "arcs": [[a.start, a.length] for a in c.trace_arcs]} for c in p.cells],
            "families": [{"name": fm.name, "kind": fm.kind, "plus": [fm.plus.start, fm.plus.length],
                          "minus": [fm.minus.start, fm.minus.length], "n": fm.n}
                         for fm in p.families],
            "provenance": p.provenance}
    return out
