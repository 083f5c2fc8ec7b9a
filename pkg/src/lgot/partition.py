"""Cell partitions of non-convex domains.

Cells are declared through their trace arcs (the parts of the cell boundary
lying on the domain boundary); consecutive trace arcs are joined by
straight interior edges. ``C`` cells are convex and run the convex
pipeline on an induced trace, ``E`` cells carry one matched pair of arcs
with at least one non-convex side, and ``X`` cells see constant data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from shapely.geometry import Polygon

from .admissibility import (SATISFIED, VIOLATED, AdmissibilityReport, check_A2, check_H2,
                            check_H3, check_L2_A3)
from .decomposition import ArcDecomposition, EPair, decompose
from .errors import (H1UnsatisfiableError, InvalidTraceError, PartitionGeometryError,
                     RefinementError, RefinementExhaustedError)
from .geometry import BoundaryArc, BoundaryCurve, LinePiece, Point2, convexity_report
from .trace import SignedBoundaryMeasure, TraceFunction
from .transport_map import TransportMap


@dataclass(frozen=True)
class Cell:
    """A partition cell described by its trace arcs (global parameters)."""

    kind: str
    trace_arcs: tuple
    label: str = ""
    family: str | None = None

    def __post_init__(self):
        if self.kind not in ("C", "E", "X"):
            raise ValueError(f"unknown cell kind {self.kind!r}")
        object.__setattr__(self, "trace_arcs",
                           tuple(sorted(self.trace_arcs, key=lambda a: a.start)))


@dataclass(frozen=True)
class Family:
    """Cells sliced at equal variation between two level-matched arcs.

    ``plus`` carries increasing data and ``minus`` decreasing data over the
    same level range; slice ``j`` of ``n`` covers variation fractions
    ``[j/n, (j+1)/n]`` counted from the low ends.
    """

    name: str
    kind: str
    plus: BoundaryArc
    minus: BoundaryArc
    n: int = 1

    def cells(self, f: SignedBoundaryMeasure) -> list:
        g = f.g
        L = f.length
        p0, p1 = self.plus.start, self.plus.stop
        m0, m1 = self.minus.start, self.minus.stop
        vp0, vm1 = float(g.V(p0)), float(g.V(m1))
        tv_p, tv_m = f.tv(self.plus), f.tv(self.minus)
        if tv_p <= 0 or abs(tv_p - tv_m) > 1e-9 * max(f.total_variation, 1e-300):
            raise RefinementError(f"family {self.name!r} is not level-matched")
        fr = np.linspace(0.0, 1.0, self.n + 1)
        sp = g.s_of_V(vp0 + fr * tv_p, p0, p1)
        sm = g.s_of_V(vm1 - fr * tv_m, m0, m1)
        sp[0], sp[-1], sm[0], sm[-1] = p0, p1, m1, m0
        out = []
        for j in range(self.n):
            a = BoundaryArc(sp[j], sp[j + 1] - sp[j], L)
            b = BoundaryArc(sm[j + 1], sm[j] - sm[j + 1], L)
            out.append(Cell(self.kind, (a, b), f"{self.name}[{j}]", self.name))
        return out


@dataclass(frozen=True)
class Partition:
    cells: tuple = ()
    families: tuple = ()
    provenance: str = "user-supplied"

    def expand(self, f: SignedBoundaryMeasure) -> list:
        out = list(self.cells)
        for fam in self.families:
            out.extend(fam.cells(f))
        return out

    def family(self, name: str) -> Family:
        for fam in self.families:
            if fam.name == name:
                return fam
        raise RefinementError(f"no sliceable family named {name!r}")


def single_cell(curve: BoundaryCurve) -> Partition:
    """Trivial partition whose only cell is the whole (convex) domain."""
    return Partition((Cell("C", (BoundaryArc(0.0, curve.length, curve.length),), "domain"),))


# ------------------------------------------------------------ cell geometry
@dataclass
class CellGeometry:
    curve: BoundaryCurve
    segments: list          # (cell_s0, global_s0, length)
    trace: TraceFunction | None
    boundary_flux: float

    def to_global(self, s: float, L: float, at_end: bool = False) -> float:
        tol = 1e-12 * self.curve.length
        for c0, g0, length in self.segments:
            lo, hi = c0 - tol, c0 + length + tol
            if lo <= s <= hi:
                if at_end and s <= c0 + tol and length > 0:
                    continue
                return (g0 + min(max(s - c0, 0.0), length)) % L
        raise InvalidTraceError(f"cell parameter {s} lies on an interior edge")

    def arc_to_global(self, arc: BoundaryArc, L: float) -> BoundaryArc:
        return BoundaryArc(self.to_global(arc.start, L), arc.length, L)


def cell_geometry(domain: BoundaryCurve, f: SignedBoundaryMeasure, cell: Cell) -> CellGeometry:
    """Closed curve of a cell and its induced trace."""
    g = f.g
    arcs = list(cell.trace_arcs)
    n = len(arcs)
    pieces, segments = [], []
    pos = 0.0
    bp_s, bp_v = [], []
    offset = 0.0
    for i, arc in enumerate(arcs):
        sub = domain.subpieces(arc)
        segments.append((pos, arc.start, arc.length))
        # breakpoints of g inside the arc
        inner = _nodes_in(g, arc)
        gs = np.r_[arc.start, inner, arc.stop]
        bp_s.append(pos + (gs - arc.start))
        bp_v.append(g(gs) + offset)
        end_val = float(g(arc.stop)) + offset
        pieces.extend(sub)
        pos += sum(p.length for p in sub)
        nxt = arcs[(i + 1) % n]
        a = domain.points(arc.stop)[0]
        b = domain.points(nxt.start)[0]
        gap = float(np.hypot(*(b - a)))
        if gap > 10 * domain.eps:
            pieces.append(LinePiece(Point2(*a), Point2(*b)))
            pos += gap
        offset = end_val - float(g(nxt.start))
    curve = BoundaryCurve(pieces, eps=domain.eps)
    flux = float(sum(f.measure(a) for a in arcs))
    trace = None
    if abs(flux) <= 1e-9 * max(f.total_variation, 1e-300):
        s = np.concatenate(bp_s)
        v = np.concatenate(bp_v)
        s = s * (curve.length / pos) if pos > 0 else s
        order = np.argsort(s, kind="stable")
        s, v = s[order], v[order]
        keep = np.r_[True, np.diff(s) > 1e-13 * curve.length]
        s, v = s[keep], v[keep]
        keep = s < curve.length * (1 - 1e-13)
        trace = TraceFunction(curve.length, s[keep], v[keep])
    return CellGeometry(curve, segments, trace, flux)


def _nodes_in(g: TraceFunction, arc: BoundaryArc) -> np.ndarray:
    L = g.length
    ext = np.r_[g.nodes[:-1], g.nodes[:-1] + L, g.nodes[:-1] + 2 * L]
    m = (ext > arc.start) & (ext < arc.stop)
    return ext[m]


# ------------------------------------------------------------------ validation
@dataclass
class CellReport:
    index: int
    kind: str
    label: str
    area: float
    flux: float
    passed: bool
    issues: list = field(default_factory=list)
    pair_ids: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    curve: BoundaryCurve | None = None


@dataclass
class MassCell:
    index: int
    kind: str
    label: str
    pair_ids: list


@dataclass
class ValidatedPartition:
    partition: Partition
    cells: list
    cell_reports: list
    curve: BoundaryCurve
    f: SignedBoundaryMeasure
    tmap: TransportMap
    pairs: list
    issues: list

    @property
    def mass_cells(self) -> list:
        return [MassCell(r.index, r.kind, r.label, r.pair_ids) for r in self.cell_reports
                if r.pair_ids]

    @property
    def passed(self) -> bool:
        return not self.issues and all(r.passed for r in self.cell_reports)

    @property
    def decomposition(self) -> ArcDecomposition:
        chis = tuple(p for p in self.pairs if p.kind == "chi")
        gammas = tuple(p for p in self.pairs if p.kind != "chi")
        return ArcDecomposition(chis, gammas, tuple(self.f.monotone_decomposition().flat))

    def report(self, condition: str) -> AdmissibilityReport:
        """``L1`` (convex cells) or ``A1`` (convex, constant and E cells)."""
        kinds = ("C", "X") if condition == "L1" else ("C", "X", "E")
        bad = [r for r in self.cell_reports if r.kind in kinds and not r.passed]
        wit = [{"cell": r.index, "label": r.label, "issues": r.issues} for r in bad]
        if condition == "L1" and any(r.kind == "E" for r in self.cell_reports):
            wit.append({"issue": "partition has E cells"})
        wit += [{"issue": i} for i in self.issues]
        return AdmissibilityReport(condition, VIOLATED if wit else SATISFIED, wit,
                                   0.0 if wit else math.inf,
                                   [f"{len(self.cell_reports)} cells"])


def validate(p: Partition, f: SignedBoundaryMeasure, curve: BoundaryCurve,
             h3_samples: int = 6) -> ValidatedPartition:
    """Check geometry, zero boundary flux and per-cell conditions.

    Raises
    ------
    PartitionGeometryError
        When cells overlap or fail to cover the domain.
    """
    cells = p.expand(f)
    TV = max(f.total_variation, 1e-300)
    reports, geoms, polys = [], [], []
    for i, cell in enumerate(cells):
        try:
            geo = cell_geometry(curve, f, cell)
        except Exception as exc:  # invalid cell curve
            raise PartitionGeometryError(f"cell {cell.label or i}: {exc}") from exc
        geoms.append(geo)
        polys.append(Polygon(geo.curve.polyline(256)))
        reports.append(CellReport(i, cell.kind, cell.label or f"cell{i}", geo.curve.area,
                                  geo.boundary_flux, True, curve=geo.curve))
    total = sum(r.area for r in reports)
    if abs(total - curve.area) > 1e-6 * curve.area:
        raise PartitionGeometryError(f"cell areas sum to {total:.12g}, domain area {curve.area:.12g}")
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            if polys[i].bounds[2] < polys[j].bounds[0] or polys[j].bounds[2] < polys[i].bounds[0]:
                continue
            ov = polys[i].intersection(polys[j]).area
            if ov > 1e-6 * curve.area:
                raise PartitionGeometryError(f"cells {reports[i].label} and {reports[j].label} overlap "
                                             f"(area {ov:.3g})")
    pairs = []
    for cell, geo, rep in zip(cells, geoms, reports):
        if cell.kind == "X":
            mass = sum(f.tv(a) for a in cell.trace_arcs)
            if mass > 1e-12 * TV:
                rep.passed = False
                rep.issues.append(f"trace not constant (|f| = {mass:.3g})")
            continue
        if abs(geo.boundary_flux) > 1e-9 * TV:
            rep.passed = False
            rep.issues.append(f"f(boundary) = {geo.boundary_flux:.3g}")
            continue
        if cell.kind == "C":
            _validate_c(cell, geo, rep, f, curve, pairs, h3_samples)
        else:
            _validate_e(cell, geo, rep, f, curve, pairs)
    issues = []
    covered = sum(pr.tv for pr in pairs)
    if abs(covered - f.total_plus) > 1e-9 * TV:
        issues.append(f"cells pair {covered:.12g} of f+ mass {f.total_plus:.12g}")
    tmap = TransportMap(pairs, f, curve)
    return ValidatedPartition(p, cells, reports, curve, f, tmap, pairs, issues)


def _validate_c(cell, geo, rep, f, curve, pairs, h3_samples):
    L = f.length
    conv = convexity_report(geo.curve)
    if conv.cls == "non-convex":
        rep.passed = False
        rep.issues.append("C cell is not convex")
        return
    fi = SignedBoundaryMeasure(geo.trace)
    try:
        d = decompose(fi, geo.curve)
    except H1UnsatisfiableError as exc:
        rep.passed = False
        rep.issues.append("H1: " + "; ".join(exc.violations))
        return
    local = TransportMap(d.pairs, fi, geo.curve)
    if len(local):
        h2 = check_H2(local, geo.curve)
        h3 = check_H3(local, d, k=h3_samples)
        rep.reports += [h2, h3]
        for r in (h2, h3):
            if r.verdict != SATISFIED:
                rep.passed = False
                rep.issues.append(f"{r.condition} {r.verdict} in cell")
    for pr in d.pairs:
        gp = replace(pr, plus=geo.arc_to_global(pr.plus, L), minus=geo.arc_to_global(pr.minus, L),
                     corner=None if pr.corner is None else geo.to_global(pr.corner, L),
                     hull=None, cell=rep.index)
        rep.pair_ids.append(len(pairs))
        pairs.append(gp)


def _validate_e(cell, geo, rep, f, curve, pairs):
    TV = max(f.total_variation, 1e-300)
    arcs = [a for a in cell.trace_arcs if f.tv(a) > 1e-12 * TV]
    if len(arcs) != 2:
        rep.passed = False
        rep.issues.append(f"E cell needs two trace arcs carrying data, found {len(arcs)}")
        return
    inc = [a for a in arcs if f.minus_mass(a) <= 1e-12 * TV]
    dec = [a for a in arcs if f.plus_mass(a) <= 1e-12 * TV]
    if len(inc) != 1 or len(dec) != 1:
        rep.passed = False
        rep.issues.append("E cell arcs are not one increasing and one decreasing arc")
        return
    plus, minus = inc[0], dec[0]
    if abs(f.tv(plus) - f.tv(minus)) > 1e-9 * TV:
        rep.passed = False
        rep.issues.append("E cell arcs carry different variation")
        return
    if convexity_report(geo.curve).cls != "non-convex":
        rep.passed = False
        rep.issues.append("E cell has no non-convex side")
    rep.pair_ids.append(len(pairs))
    pairs.append(EPair(plus, minus, 0.5 * (f.tv(plus) + f.tv(minus)), anchor="low", cell=rep.index))


# ------------------------------------------------------------------ refinement
def refine(p: Partition, family: str, n: int) -> Partition:
    """Replace the slice count of ``family`` by ``n``."""
    if n < 1:
        raise RefinementError("n must be at least 1")
    fam = p.family(family)
    fams = tuple(replace(x, n=n) if x.name == fam.name else x for x in p.families)
    if n == fam.n:
        return p
    return Partition(p.cells, fams, f"refined({family}, n={n})")


def evaluate_conditions(vp: ValidatedPartition, conditions: Sequence[str], k: int = 8,
                        representatives: str = "arbitrary") -> list:
    out = []
    for c in conditions:
        if c in ("L1", "A1"):
            out.append(vp.report(c))
        elif c == "A2":
            out.append(check_A2(vp, vp.curve, k))
        elif c in ("L2", "A3", "A3~"):
            out.append(check_L2_A3(vp, c, k, representatives))
        else:
            raise ValueError(f"unknown partition condition {c!r}")
    return out


def auto_refine_until(p: Partition, conditions: Sequence[str], n_max: int,
                      f: SignedBoundaryMeasure, curve: BoundaryCurve, k: int = 8,
                      representatives: str = "arbitrary") -> Partition:
    """Double every family's slice count until ``conditions`` hold.

    Raises
    ------
    RefinementExhaustedError
        Once a further doubling would exceed ``n_max``; carries the last reports.
    """
    if not conditions:
        return p
    while True:
        vp = validate(p, f, curve)
        reports = evaluate_conditions(vp, conditions, k, representatives)
        if all(r.verdict == SATISFIED for r in reports):
            return p
        if not p.families or any(2 * fam.n > n_max for fam in p.families):
            failing = [r.summary() for r in reports if r.verdict != SATISFIED]
            raise RefinementExhaustedError("refinement exhausted: " + "; ".join(failing), reports)
        fams = tuple(replace(fam, n=2 * fam.n) for fam in p.families)
        p = Partition(p.cells, fams, f"refined(n={fams[0].n})")
