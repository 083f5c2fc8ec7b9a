"""Boundary datum g, its tangential derivative f, and arc queries.

The trace is piecewise linear in arclength. Cumulative arrays of total
variation, positive and negative increments make every arc query exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import EmptyMeasureError, InvalidTraceError
from .geometry import BoundaryArc, BoundaryCurve


class TraceFunction:
    """Continuous piecewise-linear function on a closed curve.

    Parameters
    ----------
    length : float
        Total arclength ``L`` of the carrier curve.
    s : array_like
        Strictly increasing breakpoints in ``[0, L)``.
    values : array_like
        Values at the breakpoints. Interpolation is linear and wraps
        around from the last breakpoint to ``s[0] + L``.
    """

    def __init__(self, length: float, s, values):
        s = np.asarray(s, dtype=float)
        v = np.asarray(values, dtype=float)
        if s.ndim != 1 or s.shape != v.shape or len(s) == 0:
            raise InvalidTraceError("breakpoints and values must be 1-d arrays of equal length")
        if not np.all(np.isfinite(s)) or not np.all(np.isfinite(v)):
            raise InvalidTraceError("non-finite breakpoint data")
        if np.any(s < 0) or np.any(s >= length):
            raise InvalidTraceError("breakpoints must lie in [0, L)")
        if np.any(np.diff(s) <= 0):
            raise InvalidTraceError("breakpoints must be strictly increasing "
                                    "(a repeated parameter would be a jump)")
        self.length = float(length)
        # nodes on [0, L] with g(L) = g(0)
        v0 = float(np.interp(0.0, np.r_[s[-1] - length, s], np.r_[v[-1], v]))
        nodes = np.r_[0.0, s, length]
        vals = np.r_[v0, v, v0]
        keep = np.r_[True, np.diff(nodes) > 0]
        keep[-1] = True
        nodes, vals = nodes[keep], vals[keep]
        if nodes[-2] == nodes[-1]:
            nodes, vals = nodes[:-1], vals[:-1]
        self.nodes = nodes
        self.vals = vals
        dv = np.diff(vals)
        self.cum_tv = np.r_[0.0, np.cumsum(np.abs(dv))]
        self.cum_plus = np.r_[0.0, np.cumsum(np.maximum(dv, 0.0))]
        self.cum_minus = np.r_[0.0, np.cumsum(np.maximum(-dv, 0.0))]
        self.total_variation = float(self.cum_tv[-1])
        L, T = self.length, self.total_variation
        self._nodes_ext = np.r_[nodes, nodes[1:] + L, nodes[1:] + 2 * L]
        self._tv_ext = np.r_[self.cum_tv, self.cum_tv[1:] + T, self.cum_tv[1:] + 2 * T]

    @property
    def breakpoints(self):
        return list(zip(self.nodes[:-1].tolist(), self.vals[:-1].tolist()))

    def __call__(self, s):
        s = np.mod(np.asarray(s, dtype=float), self.length)
        return np.interp(s, self.nodes, self.vals)

    def lipschitz(self) -> float:
        """Largest slope magnitude in arclength."""
        ds = np.diff(self.nodes)
        return float(np.max(np.abs(np.diff(self.vals)) / ds))

    # cumulative quantities, unwrapped: F(s + kL) = F(s) + k F(L)
    def _cumulative(self, table: np.ndarray, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        k = np.floor(s / self.length)
        r = s - k * self.length
        return k * table[-1] + np.interp(r, self.nodes, table)

    def V(self, s):
        """Cumulative total variation from parameter 0 (unwrapped)."""
        return self._cumulative(self.cum_tv, s)

    def s_of_V(self, q, s_lo: float, s_hi: float) -> np.ndarray:
        """Invert the unwrapped cumulative variation on ``[s_lo, s_hi]``.

        On a monotone stretch the inverse is unique; the result is clipped
        into the stretch so plateaus just outside it are never returned.
        """
        s = _invert_cumulative(self._nodes_ext, self._tv_ext, q)
        return np.clip(s, s_lo, s_hi)

    def Pplus(self, s):
        return self._cumulative(self.cum_plus, s)

    def Pminus(self, s):
        return self._cumulative(self.cum_minus, s)


def trace_from_breakpoints(curve: BoundaryCurve, breakpoints) -> TraceFunction:
    """Trace from a list of ``(s, value)`` pairs on ``curve``."""
    bp = np.asarray(breakpoints, dtype=float)
    if bp.ndim != 2 or bp.shape[1] != 2:
        raise InvalidTraceError("breakpoints must be (s, value) pairs")
    order = np.argsort(bp[:, 0], kind="stable")
    bp = bp[order]
    s = bp[:, 0]
    if np.any(s >= curve.length * (1 + 1e-12)) or np.any(s < 0):
        raise InvalidTraceError("breakpoint outside [0, L)")
    dup = np.flatnonzero(np.diff(s) <= 1e-14 * curve.length)
    for i in dup:
        if abs(bp[i, 1] - bp[i + 1, 1]) > 1e-12 * (1 + abs(bp[i, 1])):
            raise InvalidTraceError(f"discontinuous trace at s={s[i]}")
    keep = np.r_[True, np.diff(s) > 1e-14 * curve.length]
    bp = bp[keep]
    if bp[-1, 0] >= curve.length:
        # a breakpoint at s = L must agree with the value at s = 0
        if bp[0, 0] != 0.0:
            raise InvalidTraceError("breakpoint at s = L without one at s = 0")
        if abs(bp[-1, 1] - bp[0, 1]) > 1e-12 * (1 + abs(bp[0, 1])):
            raise InvalidTraceError("discontinuous wraparound: g(L) != g(0)")
        bp = bp[:-1]
    return TraceFunction(curve.length, bp[:, 0], bp[:, 1])


def trace_from_pieces(curve: BoundaryCurve, specs: Sequence[dict]) -> TraceFunction:
    """Trace from per-piece tags ``{"kind": "linear", "values": [a, b]}`` or
    ``{"kind": "constant", "value": c}``; continuity across joints is enforced.
    """
    if len(specs) != len(curve.pieces):
        raise InvalidTraceError("need one trace spec per boundary piece")
    ends = []
    for spec in specs:
        kind = spec.get("kind")
        if kind == "linear":
            a, b = map(float, spec["values"])
        elif kind == "constant":
            a = b = float(spec["value"])
        else:
            raise InvalidTraceError(f"unknown trace piece kind {kind!r}")
        ends.append((a, b))
    n = len(ends)
    for i in range(n):
        b, a = ends[i][1], ends[(i + 1) % n][0]
        if abs(a - b) > 1e-12 * (1 + abs(a)):
            raise InvalidTraceError(f"trace jumps at the joint after piece {i}" +
                                    (" (discontinuous wraparound)" if i == n - 1 else ""))
    pts = []
    for k, (a, b) in enumerate(ends):
        s0 = curve.offsets[k]
        pts.append((s0, a))
    return TraceFunction(curve.length, [p[0] for p in pts], [p[1] for p in pts])


def trace_from_function(curve: BoundaryCurve, func: Callable, per_piece: int = 64) -> TraceFunction:
    """Piecewise-linear interpolant of ``func(x, y)`` sampled along each piece.

    Arc pieces receive ``per_piece`` samples scaled by their sweep; line
    pieces are sampled uniformly with the same count.
    """
    s_list = []
    for k, piece in enumerate(curve.pieces):
        n = per_piece
        if piece.kind == "arc":
            n = max(2, int(round(per_piece * abs(piece.sweep) / (2 * np.pi))))
        t = np.linspace(0.0, piece.length, n, endpoint=False)
        s_list.append(curve.offsets[k] + t)
    s = np.concatenate(s_list)
    pts = curve.points(s)
    vals = np.asarray(func(pts[:, 0], pts[:, 1]), dtype=float)
    return TraceFunction(curve.length, s, vals)


@dataclass(frozen=True)
class MonotoneDecomposition:
    plus: tuple
    minus: tuple
    flat: tuple


class SignedBoundaryMeasure:
    """The measure ``f = d g / d tau`` with exact arc queries.

    Parameters
    ----------
    g : TraceFunction
    """

    def __init__(self, g: TraceFunction):
        self.g = g
        self.length = g.length
        self._decomp = None

    # ----------------------------------------------------------- arc queries
    def _ends(self, arc: BoundaryArc):
        return arc.start, arc.start + arc.length

    def measure(self, arc: BoundaryArc) -> float:
        a, b = self._ends(arc)
        if arc.length >= self.length:
            return 0.0
        return float(self.g(b) - self.g(a))

    def tv(self, arc: BoundaryArc) -> float:
        a, b = self._ends(arc)
        return float(self.g.V(b) - self.g.V(a))

    def plus_mass(self, arc: BoundaryArc) -> float:
        a, b = self._ends(arc)
        return float(self.g.Pplus(b) - self.g.Pplus(a))

    def minus_mass(self, arc: BoundaryArc) -> float:
        a, b = self._ends(arc)
        return float(self.g.Pminus(b) - self.g.Pminus(a))

    @property
    def total_variation(self) -> float:
        return self.g.total_variation

    @property
    def total_plus(self) -> float:
        return float(self.g.cum_plus[-1])

    @property
    def total_minus(self) -> float:
        return float(self.g.cum_minus[-1])

    def total(self, sign: str) -> float:
        return self.total_plus if sign == "+" else self.total_minus

    # ------------------------------------------------------ monotone structure
    def runs(self):
        """Maximal monotone runs as ``(sign, start, length)`` with sign in {+1, -1, 0}.

        Runs are cyclic; a run crossing ``s = 0`` starts before ``L``.
        """
        g = self.g
        dv = np.diff(g.vals)
        sgn = np.sign(dv).astype(int)
        starts = g.nodes[:-1]
        ends = g.nodes[1:]
        runs = []
        for k in range(len(sgn)):
            if runs and runs[-1][0] == sgn[k]:
                runs[-1][2] = ends[k]
            else:
                runs.append([sgn[k], starts[k], ends[k]])
        if len(runs) > 1 and runs[0][0] == runs[-1][0]:
            last = runs.pop()
            runs[0] = [last[0], last[1], runs[0][2] + self.length]
        out = []
        for sg, a, b in runs:
            length = b - a
            out.append((int(sg), float(a % self.length) if length < self.length else float(a), float(length)))
        out.sort(key=lambda r: r[1])
        return out

    def monotone_decomposition(self) -> MonotoneDecomposition:
        if self._decomp is None:
            plus, minus, flat = [], [], []
            for sg, a, length in self.runs():
                arc = BoundaryArc(a, length, self.length)
                {1: plus, -1: minus, 0: flat}[sg].append(arc)
            self._decomp = MonotoneDecomposition(tuple(plus), tuple(minus), tuple(flat))
        return self._decomp

    # --------------------------------------------------------------- sampling
    def quantile(self, sign: str, q) -> np.ndarray:
        """Parameters where the cumulative ``f^sign`` mass equals ``q``."""
        table = self.g.cum_plus if sign == "+" else self.g.cum_minus
        return _invert_cumulative(self.g.nodes, table, q)

    def inverse_cdf_sample(self, sign: str, n: int):
        """``n`` equal-mass atoms of ``f^sign`` at TV-quantile midpoints.

        Returns
        -------
        s : ndarray
            Atom parameters.
        mass : ndarray
            Atom masses summing to ``f^sign(boundary)``.
        """
        if sign not in ("+", "-"):
            raise ValueError("sign must be '+' or '-'")
        if n < 1:
            raise ValueError("n must be at least 1")
        total = self.total(sign)
        if total <= 0:
            raise EmptyMeasureError(f"f^{sign} vanishes")
        q = (np.arange(n) + 0.5) / n * total
        s = self.quantile(sign, q)
        mass = np.full(n, total / n)
        # nudge the last atom until the correctly rounded sum is the total
        for _ in range(64):
            err = math.fsum(mass) - total
            if err == 0:
                break
            mass[-1] = np.nextafter(mass[-1], -np.inf if err > 0 else np.inf)
        return s, mass


def _invert_cumulative(nodes: np.ndarray, table: np.ndarray, q) -> np.ndarray:
    q = np.atleast_1d(np.asarray(q, dtype=float))
    idx = np.searchsorted(table, q, side="left")
    idx = np.clip(idx, 1, len(table) - 1)
    lo, hi = table[idx - 1], table[idx]
    span = hi - lo
    frac = np.where(span > 0, (q - lo) / np.where(span > 0, span, 1.0), 0.0)
    return nodes[idx - 1] + np.clip(frac, 0.0, 1.0) * (nodes[idx] - nodes[idx - 1])


def tangential_derivative(g: TraceFunction) -> SignedBoundaryMeasure:
    return SignedBoundaryMeasure(g)


def measure_of_arc(f: SignedBoundaryMeasure, arc: BoundaryArc) -> float:
    return f.measure(arc)


def tv_of_arc(f: SignedBoundaryMeasure, arc: BoundaryArc) -> float:
    return f.tv(arc)


def monotone_decomposition(f: SignedBoundaryMeasure) -> MonotoneDecomposition:
    return f.monotone_decomposition()


def inverse_cdf_sample(f: SignedBoundaryMeasure, sign: str, n: int):
    return f.inverse_cdf_sample(sign, n)
