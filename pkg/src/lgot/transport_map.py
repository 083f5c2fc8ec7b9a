"""The TV-matching transport map between paired plus and minus arcs."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import LevelMismatchError, MapConstructionError, NotInDomainError
from .geometry import BoundaryArc, BoundaryCurve, Point2
from .trace import SignedBoundaryMeasure


@dataclass(frozen=True)
class TransportRay:
    s_plus: float
    s_minus: float
    source: Point2
    target: Point2
    level: float
    length: float

    @property
    def segment(self):
        return (self.source, self.target)


@dataclass(frozen=True)
class _Table:
    pair: object
    p0: float
    p1: float
    m0: float
    m1: float
    vp0: float
    vp1: float
    vm0: float
    vm1: float

    @property
    def tv(self):
        return min(self.vp1 - self.vp0, self.vm1 - self.vm0)


class TransportMap:
    """Map ``T`` sending each plus-arc point to the equal-variation minus-arc point.

    Parameters
    ----------
    pairs : sequence of ArcPair
        Chi, gamma and E pairs in global boundary parameters.
    f : SignedBoundaryMeasure
    curve : BoundaryCurve
    """

    def __init__(self, pairs: Sequence, f: SignedBoundaryMeasure, curve: BoundaryCurve):
        self.pairs = tuple(pairs)
        self.f = f
        self.g = f.g
        self.curve = curve
        self.length = f.length
        tables = []
        for p in self.pairs:
            p0, m0 = p.plus.start, p.minus.start
            p1, m1 = p0 + p.plus.length, m0 + p.minus.length
            t = _Table(p, p0, p1, m0, m1, float(self.g.V(p0)), float(self.g.V(p1)),
                       float(self.g.V(m0)), float(self.g.V(m1)))
            if t.tv <= 0:
                raise MapConstructionError("pair with zero total variation")
            tables.append(t)
        self.tables = tuple(tables)

    def __len__(self):
        return len(self.tables)

    # ------------------------------------------------------------ TV coordinate
    def plus_from_tau(self, k: int, tau) -> np.ndarray:
        """Plus-side parameter at variation ``tau`` from the pair anchor."""
        t = self.tables[k]
        tau = np.asarray(tau, dtype=float)
        v = t.vp0 + tau if t.pair.anchor == "low" else t.vp1 - tau
        return np.mod(self.g.s_of_V(v, t.p0, t.p1), self.length)

    def minus_from_tau(self, k: int, tau) -> np.ndarray:
        t = self.tables[k]
        tau = np.asarray(tau, dtype=float)
        v = t.vm1 - tau if t.pair.anchor == "low" else t.vm0 + tau
        return np.mod(self.g.s_of_V(v, t.m0, t.m1), self.length)

    def tau_plus(self, k: int, s) -> np.ndarray:
        t = self.tables[k]
        u = t.p0 + np.mod(np.asarray(s, dtype=float) - t.p0, self.length)
        v = self.g.V(u)
        return np.clip(v - t.vp0 if t.pair.anchor == "low" else t.vp1 - v, 0.0, t.tv)

    def tau_minus(self, k: int, s) -> np.ndarray:
        t = self.tables[k]
        u = t.m0 + np.mod(np.asarray(s, dtype=float) - t.m0, self.length)
        v = self.g.V(u)
        return np.clip(t.vm1 - v if t.pair.anchor == "low" else v - t.vm0, 0.0, t.tv)

    def pair_rays(self, k: int, fractions) -> tuple:
        """Sources and targets at TV fractions of pair ``k``."""
        tau = np.asarray(fractions, dtype=float) * self.tables[k].tv
        return self.plus_from_tau(k, tau), self.minus_from_tau(k, tau)

    # -------------------------------------------------------------- evaluation
    def _locate(self, s, side: str):
        s = np.atleast_1d(np.mod(np.asarray(s, dtype=float), self.length))
        tol = 1e-12 * self.length
        best = np.full(s.shape, np.nan)
        owner = np.full(s.shape, -1)
        for k, p in enumerate(self.pairs):
            arc = p.plus if side == "+" else p.minus
            inside = arc.contains(s, closed=True, tol=tol)
            if not np.any(inside):
                continue
            if side == "+":
                img = self.minus_from_tau(k, self.tau_plus(k, s[inside]))
            else:
                img = self.plus_from_tau(k, self.tau_minus(k, s[inside]))
            cur = best[inside]
            take = np.isnan(cur) | (img < cur)
            idx = np.flatnonzero(inside)[take]
            best[idx] = img[take]
            owner[idx] = k
        return best, owner

    def eval(self, s_plus):
        """``T(s_plus)``; scalar in, scalar out."""
        out, owner = self._locate(s_plus, "+")
        if np.any(owner < 0):
            raise NotInDomainError(f"parameter(s) outside every plus arc: {np.atleast_1d(s_plus)[owner < 0][:5]}")
        return float(out[0]) if np.ndim(s_plus) == 0 else out

    def inverse(self, s_minus):
        out, owner = self._locate(s_minus, "-")
        if np.any(owner < 0):
            raise NotInDomainError("parameter(s) outside every minus arc")
        return float(out[0]) if np.ndim(s_minus) == 0 else out

    def owner(self, s_plus) -> np.ndarray:
        return self._locate(s_plus, "+")[1]

    def ray(self, s_plus: float, tol: float = 1e-9) -> TransportRay:
        s_minus = self.eval(s_plus)
        a, b = self.curve.points(np.array([s_plus, s_minus]))
        lp, lm = float(self.g(s_plus)), float(self.g(s_minus))
        if abs(lp - lm) > tol * max(self.f.total_variation, 1e-300):
            raise LevelMismatchError(f"levels {lp:.12g} and {lm:.12g} differ")
        return TransportRay(float(s_plus) % self.length, s_minus, Point2(*map(float, a)),
                            Point2(*map(float, b)), lp, float(np.hypot(*(b - a))))

    @property
    def total_mass(self) -> float:
        return float(sum(t.tv for t in self.tables))


def build(pairs: Sequence, f: SignedBoundaryMeasure, curve: BoundaryCurve) -> TransportMap:
    """Transport map of a decomposition (``d.pairs``) or any pair list."""
    if hasattr(pairs, "pairs"):
        pairs = pairs.pairs
    return TransportMap(pairs, f, curve)


def eval_map(tmap: TransportMap, s_plus):
    return tmap.eval(s_plus)


def ray(tmap: TransportMap, s_plus: float) -> TransportRay:
    return tmap.ray(s_plus)


def pushforward_distance(tmap: TransportMap, f: SignedBoundaryMeasure, k: int = 100,
                         seed: int = 0) -> float:
    """Largest ``|f^-(A) - f^+(T^{-1}(A))|`` over ``k`` random minus-side arcs."""
    if len(tmap) == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    worst = 0.0
    L = tmap.length
    for _ in range(k):
        j = int(rng.integers(len(tmap)))
        arc = tmap.pairs[j].minus
        u = np.sort(rng.uniform(0.0, arc.length, 2))
        if u[1] - u[0] <= 1e-12 * L:
            continue
        A = BoundaryArc(arc.start + u[0], u[1] - u[0], L)
        y1, y2 = arc.start + u[0], arc.start + u[1]
        x_hi = tmap.plus_from_tau(j, tmap.tau_minus(j, y1))
        x_lo = tmap.plus_from_tau(j, tmap.tau_minus(j, y2))
        pre = (x_hi - x_lo) % L
        if pre <= 0:
            mass_pre = 0.0
        else:
            mass_pre = f.plus_mass(BoundaryArc(float(np.ravel(x_lo)[0]), float(np.ravel(pre)[0]), L))
        worst = max(worst, abs(f.minus_mass(A) - mass_pre))
    return worst
