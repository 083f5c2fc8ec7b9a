"""Pairing of increasing and decreasing boundary arcs.

The boundary is split into chi pairs (two arcs meeting at a strict local
extremum of g), gamma pairs (arcs at positive distance with matched
levels) and flat arcs where g is constant.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np

from .errors import H1UnsatisfiableError
from .geometry import BoundaryArc, BoundaryCurve, convex_hull_region
from .trace import SignedBoundaryMeasure


@dataclass(frozen=True)
class ArcPair:
    """Plus arc (g increasing) matched with a minus arc (g decreasing).

    Attributes
    ----------
    plus, minus : BoundaryArc
    tv : float
        Common total variation of both arcs.
    anchor : {'low', 'high'}
        Where cumulative variation is measured from: the low-level ends
        (start of ``plus``, end of ``minus``) or the high-level ends.
    corner : float or None
        Shared extremum parameter of a chi pair.
    """

    plus: BoundaryArc
    minus: BoundaryArc
    tv: float
    anchor: str = "low"
    corner: float | None = None
    hull: object = field(default=None, compare=False, repr=False)
    cell: int | None = None

    kind: ClassVar[str] = "pair"

    def arcs(self):
        return (self.plus, self.minus)


class ChiPair(ArcPair):
    kind = "chi"


class GammaPair(ArcPair):
    kind = "gamma"


class EPair(ArcPair):
    kind = "E"


@dataclass(frozen=True)
class ArcDecomposition:
    chis: tuple
    gammas: tuple
    flats: tuple
    residual: tuple = ()

    @property
    def pairs(self) -> tuple:
        return tuple(sorted(self.chis + self.gammas, key=lambda p: p.plus.start))


@dataclass
class H1Report:
    passed: bool
    violations: list

    @property
    def verdict(self) -> str:
        return "satisfied" if self.passed else "violated"


@dataclass
class _Run:
    sign: int
    s0: float
    s1: float
    v0: float
    v1: float
    claim_lo: float = 0.0
    claim_hi: float = 0.0

    @property
    def tv(self):
        return self.v1 - self.v0


def _runs(f: SignedBoundaryMeasure):
    g = f.g
    out = []
    for sign, s0, length in f.runs():
        s1 = s0 + length
        out.append(_Run(sign, s0, s1, float(g.V(s0)), float(g.V(s1))))
    return out


def _grow_chis(f: SignedBoundaryMeasure, runs, tol: float):
    g, L = f.g, f.length
    n = len(runs)
    extrema = []
    for i in range(n):
        a, b = runs[i], runs[(i + 1) % n]
        if a.sign != 0 and b.sign == -a.sign:
            extrema.append((a.s1 % L, i, (i + 1) % n))
    extrema.sort()
    chis = []
    for c, i, j in extrema:
        A, B = runs[i], runs[j]
        avail_a = A.tv - A.claim_lo - A.claim_hi
        avail_b = B.tv - B.claim_lo - B.claim_hi
        tau = min(avail_a, avail_b)
        if tau <= tol or A.claim_hi > 0 or B.claim_lo > 0:
            continue
        A.claim_hi, B.claim_lo = tau, tau
        sa = float(np.ravel(g.s_of_V(A.v1 - tau, A.s0, A.s1))[0])
        sb = float(np.ravel(g.s_of_V(B.v0 + tau, B.s0, B.s1))[0])
        if avail_a - tau <= tol and A.claim_lo == 0:
            sa = A.s0
        if avail_b - tau <= tol and B.claim_hi == 0:
            sb = B.s1
        arc_a = BoundaryArc(sa, A.s1 - sa, L)
        arc_b = BoundaryArc(B.s0, sb - B.s0, L)
        if A.sign > 0:
            chis.append(ChiPair(arc_a, arc_b, tau, anchor="high", corner=c))
        else:
            chis.append(ChiPair(arc_b, arc_a, tau, anchor="low", corner=c))
    return chis


def _portions(f: SignedBoundaryMeasure, runs, tol: float):
    """Unclaimed parts of monotone runs as ``[sign, v_lo, v_hi, s_lo, s_hi]``."""
    g = f.g
    out = []
    for r in runs:
        if r.sign == 0:
            continue
        lo, hi = r.v0 + r.claim_lo, r.v1 - r.claim_hi
        if hi - lo > tol:
            s_lo = r.s0 if r.claim_lo == 0 else float(g.s_of_V(lo, r.s0, r.s1))
            s_hi = r.s1 if r.claim_hi == 0 else float(g.s_of_V(hi, r.s0, r.s1))
            out.append([r.sign, lo, hi, s_lo, s_hi])
    return out


def _match(f: SignedBoundaryMeasure, portions, opener: int, tol: float):
    """Balanced-parenthesis matching at equal variation.

    Portions of sign ``opener`` are pushed; portions of the opposite sign
    consume the stack top from its far end. Returns a list of matches
    ``(plus_s_lo, plus_s_hi, minus_s_lo, minus_s_hi)`` or ``None``.
    """
    g = f.g
    if not portions:
        return []
    key = [(p[0] == opener, (g(p[3]) if opener > 0 else -g(p[3]))) for p in portions]
    cands = [i for i, (ok, _) in enumerate(key) if ok]
    if not cands:
        return None
    start = min(cands, key=lambda i: (key[i][1], i))
    order = portions[start:] + portions[:start]
    stack = []
    matches = []
    for sign, lo, hi, s_lo, s_hi in order:
        if sign == opener:
            stack.append([lo, hi, s_lo, s_hi])
            continue
        v = lo
        while hi - v > tol:
            if not stack:
                return None
            top = stack[-1]
            take = min(top[1] - top[0], hi - v)
            # opener side consumed from its far end, closer side from its near end
            o_lo, o_hi = top[1] - take, top[1]
            c_lo, c_hi = v, v + take
            so = g.s_of_V(np.array([o_lo, o_hi]), top[2], top[3])
            sc = g.s_of_V(np.array([c_lo, c_hi]), s_lo, s_hi)
            if top[1] - take - top[0] <= tol:
                so[0] = top[2]
            if hi - (v + take) <= tol:
                sc[1] = s_hi
            matches.append((so, sc))
            top[1] -= take
            top[3] = so[0]
            v += take
            if top[1] - top[0] <= tol:
                stack.pop()
    if any(t[1] - t[0] > tol for t in stack):
        return None
    out = []
    for so, sc in matches:
        if opener > 0:
            out.append((so[0], so[1], sc[0], sc[1]))
        else:
            out.append((sc[0], sc[1], so[0], so[1]))
    return out


def _close(a: float, b: float, L: float, tol: float) -> bool:
    d = abs(a - b) % L
    return min(d, L - d) <= tol


def _group(matches, L: float, tol: float):
    groups = []
    for m in matches:
        p_lo, p_hi, m_lo, m_hi = m
        if groups:
            G = groups[-1]
            plus_adj = _close(G[0], p_hi, L, tol) or _close(G[1], p_lo, L, tol)
            minus_adj = _close(G[3], m_lo, L, tol) or _close(G[2], m_hi, L, tol)
            if plus_adj and minus_adj:
                if _close(G[0], p_hi, L, tol):
                    G[0] = p_lo
                else:
                    G[1] = p_hi
                if _close(G[3], m_lo, L, tol):
                    G[3] = m_hi
                else:
                    G[2] = m_lo
                continue
        groups.append([p_lo, p_hi, m_lo, m_hi])
    return groups


def _build(f: SignedBoundaryMeasure, curve: BoundaryCurve, opener: int, tol_rel: float):
    L = f.length
    tv_tol = tol_rel * max(f.total_variation, 1e-300)
    runs = _runs(f)
    chis = _grow_chis(f, runs, tv_tol)
    portions = _portions(f, runs, tv_tol)
    matches = _match(f, portions, opener, tv_tol)
    if matches is None:
        return None
    s_tol = 1e-12 * L
    gammas = []
    for p_lo, p_hi, m_lo, m_hi in _group(matches, L, s_tol):
        plus = BoundaryArc(p_lo, p_hi - p_lo, L)
        minus = BoundaryArc(m_lo, m_hi - m_lo, L)
        tv = 0.5 * (f.tv(plus) + f.tv(minus))
        gammas.append(GammaPair(plus, minus, tv, anchor="low",
                                hull=convex_hull_region(curve, [plus, minus])))
    chis = [ChiPair(c.plus, c.minus, c.tv, anchor=c.anchor, corner=c.corner,
                    hull=convex_hull_region(curve, [c.plus, c.minus])) for c in chis]
    flats = tuple(f.monotone_decomposition().flat)
    return ArcDecomposition(tuple(sorted(chis, key=lambda p: p.corner)),
                            tuple(sorted(gammas, key=lambda p: p.plus.start)), flats, ())


def decompose(f: SignedBoundaryMeasure, curve: BoundaryCurve, tol: float = 1e-9) -> ArcDecomposition:
    """Pair the monotone arcs of ``f`` into chi and gamma pairs.

    Raises
    ------
    H1UnsatisfiableError
        When neither matching convention yields a decomposition passing
        :func:`verify_H1`.
    """
    if f.total_variation == 0:
        return ArcDecomposition((), (), tuple(f.monotone_decomposition().flat), ())
    last = ["unmatched variation"]
    for opener in (1, -1):
        d = _build(f, curve, opener, tol)
        if d is None:
            continue
        rep = verify_H1(d, f, curve, tol)
        if rep.passed:
            return d
        last = rep.violations
    raise H1UnsatisfiableError("no (H1) decomposition found by the pairing algorithm", last)


def _arc_line(curve: BoundaryCurve, arc: BoundaryArc):
    from shapely.geometry import LineString, Point
    pts = curve.sample_arc(arc, 64)
    return LineString(pts) if len(pts) > 1 else Point(pts[0])


def verify_H1(d: ArcDecomposition, f: SignedBoundaryMeasure, curve: BoundaryCurve,
              tol: float = 1e-9) -> H1Report:
    """Check the decomposition clauses; failures are collected, not raised."""
    TV = max(f.total_variation, 1e-300)
    L = f.length
    margin = 8 * curve.eps
    bad = []
    pairs = list(d.chis) + list(d.gammas)
    for k, p in enumerate(pairs):
        tag = f"{p.kind}[{k}]"
        tp, tm = f.tv(p.plus), f.tv(p.minus)
        if abs(tp - tm) > tol * TV:
            bad.append(f"{tag}: TV mismatch {tp:.12g} vs {tm:.12g}")
        if f.minus_mass(p.plus) > tol * TV:
            bad.append(f"{tag}: plus arc not increasing")
        if f.plus_mass(p.minus) > tol * TV:
            bad.append(f"{tag}: minus arc not decreasing")
        if p.kind == "chi":
            c = p.corner
            if p.anchor == "high":
                touch = _close(p.plus.end, c, L, 1e-12 * L) and _close(p.minus.start, c, L, 1e-12 * L)
            else:
                touch = _close(p.minus.end, c, L, 1e-12 * L) and _close(p.plus.start, c, L, 1e-12 * L)
            if not touch or p.plus.length + p.minus.length > L * (1 + 1e-12):
                bad.append(f"{tag}: arcs do not meet exactly at the corner")
        else:
            dist = _arc_line(curve, p.plus).distance(_arc_line(curve, p.minus))
            if dist <= margin:
                bad.append(f"{tag}: arcs at distance {dist:.3g}")
            g = f.g
            lo = (g(p.plus.start), g(p.minus.end))
            hi = (g(p.plus.end), g(p.minus.start))
            if abs(lo[0] - lo[1]) > tol * TV or abs(hi[0] - hi[1]) > tol * TV:
                bad.append(f"{tag}: endpoint levels differ")
    hulls = [p.hull if p.hull is not None else convex_hull_region(curve, [p.plus, p.minus])
             for p in pairs]
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            inter = hulls[i].intersection(hulls[j])
            if inter.is_empty:
                continue
            if inter.area > margin * curve.diameter or inter.length > margin:
                bad.append(f"hulls of {pairs[i].kind}[{i}] and {pairs[j].kind}[{j}] intersect")
    for a in d.flats:
        if f.tv(a) > tol * TV:
            bad.append("flat arc carries variation")
    for a in d.flats:
        for b in d.flats:
            if a is not b and _close(a.end, b.start, L, 1e-12 * L) and a.length + b.length < L:
                bad.append("flat arcs not maximal")
    return H1Report(not bad, bad)
