"""Planar boundary curves made of line segments and circular arcs.

A :class:`BoundaryCurve` is a closed, simple, counterclockwise chain of
:class:`LinePiece` and :class:`ArcPiece` objects parametrized by arclength.
Everything here is immutable; all queries are pure functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from shapely.geometry import MultiPoint

from .errors import DegenerateSegmentError, GeometryError, ParameterDomainError

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-9

INSIDE = 1
BOUNDARY = 0
OUTSIDE = -1
_CLASS_NAMES = {INSIDE: "inside", BOUNDARY: "boundary", OUTSIDE: "outside"}


class Point2(NamedTuple):
    x: float
    y: float


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def _as_points(pts) -> np.ndarray:
    arr = np.asarray(pts, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, 2)
    return arr


@dataclass(frozen=True)
class LinePiece:
    """Straight boundary piece from ``start`` to ``end``."""

    start: Point2
    end: Point2

    kind = "line"

    def __post_init__(self):
        object.__setattr__(self, "start", Point2(float(self.start[0]), float(self.start[1])))
        object.__setattr__(self, "end", Point2(float(self.end[0]), float(self.end[1])))
        if not all(math.isfinite(v) for v in (*self.start, *self.end)):
            raise GeometryError("non-finite line endpoint")
        if self.length <= 0.0:
            raise GeometryError("line piece of zero length")

    @property
    def length(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])

    @property
    def direction(self) -> np.ndarray:
        d = np.subtract(self.end, self.start)
        return d / np.linalg.norm(d)

    def points(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)[..., None]
        return np.asarray(self.start) + t * self.direction

    def tangents(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(self.direction, t.shape + (2,)).copy()

    def start_tangent(self) -> np.ndarray:
        return self.direction

    def end_tangent(self) -> np.ndarray:
        return self.direction

    def sub(self, t0: float, t1: float) -> "LinePiece":
        p = self.points(np.array([t0, t1]))
        return LinePiece(Point2(*p[0]), Point2(*p[1]))

    def nearest(self, pts: np.ndarray):
        a = np.asarray(self.start)
        e = np.subtract(self.end, self.start)
        t = np.clip(((pts - a) @ e) / (e @ e), 0.0, 1.0)
        foot = a + t[:, None] * e
        return np.hypot(*(pts - foot).T), t * self.length

    def area_term(self) -> float:
        return 0.5 * _cross(self.start[0], self.start[1], self.end[0], self.end[1])

    def sample(self, density: int) -> np.ndarray:
        return np.array([self.start, self.end])

    def winding_angles(self, z: np.ndarray) -> np.ndarray:
        ax, ay = self.start[0] - z[:, 0], self.start[1] - z[:, 1]
        bx, by = self.end[0] - z[:, 0], self.end[1] - z[:, 1]
        return np.arctan2(_cross(ax, ay, bx, by), ax * bx + ay * by)


@dataclass(frozen=True)
class ArcPiece:
    """Circular arc with signed sweep (positive means counterclockwise).

    Parameters
    ----------
    center : Point2
    radius : float
    theta0 : float
        Polar angle of the start point seen from ``center``.
    sweep : float
        Signed swept angle in ``(-2*pi, 2*pi)``, nonzero.
    """

    center: Point2
    radius: float
    theta0: float
    sweep: float

    kind = "arc"

    def __post_init__(self):
        object.__setattr__(self, "center", Point2(float(self.center[0]), float(self.center[1])))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise GeometryError("arc radius must be positive")
        if not (0.0 < abs(self.sweep) < TWO_PI):
            raise GeometryError("arc sweep must lie in (-2pi, 2pi) minus 0")

    @classmethod
    def from_points(cls, center, start, sweep: float) -> "ArcPiece":
        """Arc around ``center`` starting at ``start`` and sweeping ``sweep``."""
        dx, dy = start[0] - center[0], start[1] - center[1]
        return cls(Point2(*center), math.hypot(dx, dy), math.atan2(dy, dx), float(sweep))

    @property
    def sigma(self) -> float:
        return 1.0 if self.sweep > 0 else -1.0

    @property
    def length(self) -> float:
        return self.radius * abs(self.sweep)

    @property
    def start(self) -> Point2:
        return Point2(*self.points(0.0))

    @property
    def end(self) -> Point2:
        return Point2(*self.points(self.length))

    def angles(self, t) -> np.ndarray:
        return self.theta0 + self.sigma * np.asarray(t, dtype=float) / self.radius

    def points(self, t) -> np.ndarray:
        th = self.angles(t)
        return np.stack([self.center[0] + self.radius * np.cos(th),
                         self.center[1] + self.radius * np.sin(th)], axis=-1)

    def tangents(self, t) -> np.ndarray:
        th = self.angles(t)
        return self.sigma * np.stack([-np.sin(th), np.cos(th)], axis=-1)

    def start_tangent(self) -> np.ndarray:
        return self.tangents(0.0)

    def end_tangent(self) -> np.ndarray:
        return self.tangents(self.length)

    def sub(self, t0: float, t1: float) -> "ArcPiece":
        return ArcPiece(self.center, self.radius, float(self.angles(t0)),
                        self.sigma * (t1 - t0) / self.radius)

    def relative_angle(self, z: np.ndarray) -> np.ndarray:
        phi = np.arctan2(z[:, 1] - self.center[1], z[:, 0] - self.center[0])
        return np.mod((phi - self.theta0) * self.sigma, TWO_PI)

    def on_arc(self, z: np.ndarray, tol: float) -> np.ndarray:
        rel = self.relative_angle(z)
        atol = tol / self.radius
        return (rel <= abs(self.sweep) + atol) | (rel >= TWO_PI - atol)

    def nearest(self, pts: np.ndarray):
        rel = self.relative_angle(pts)
        rad = np.hypot(pts[:, 0] - self.center[0], pts[:, 1] - self.center[1])
        inside = rel <= abs(self.sweep)
        d_arc = np.abs(rad - self.radius)
        d0 = np.hypot(*(pts - np.asarray(self.start)).T)
        d1 = np.hypot(*(pts - np.asarray(self.end)).T)
        dist = np.where(inside, d_arc, np.minimum(d0, d1))
        t = np.where(inside, rel * self.radius, np.where(d0 <= d1, 0.0, self.length))
        return dist, t

    def area_term(self) -> float:
        s, e = self.start, self.end
        chord = 0.5 * _cross(s[0], s[1], e[0], e[1])
        return chord + 0.5 * self.radius ** 2 * (self.sweep - math.sin(self.sweep))

    def sample(self, density: int) -> np.ndarray:
        n = max(2, int(math.ceil(density * abs(self.sweep) / TWO_PI)) + 1)
        return self.points(np.linspace(0.0, self.length, n))

    def winding_angles(self, z: np.ndarray) -> np.ndarray:
        s, e = self.start, self.end
        ax, ay = s[0] - z[:, 0], s[1] - z[:, 1]
        bx, by = e[0] - z[:, 0], e[1] - z[:, 1]
        chord = np.arctan2(_cross(ax, ay, bx, by), ax * bx + ay * by)
        mid = self.points(0.5 * self.length)
        cx, cy = e[0] - s[0], e[1] - s[1]
        side_mid = _cross(cx, cy, mid[0] - s[0], mid[1] - s[1])
        side_z = _cross(cx, cy, z[:, 0] - s[0], z[:, 1] - s[1])
        rad = np.hypot(z[:, 0] - self.center[0], z[:, 1] - self.center[1])
        in_segment = (rad < self.radius) & (side_z * side_mid > 0)
        return chord + self.sigma * TWO_PI * in_segment


BoundaryPiece = LinePiece | ArcPiece


@dataclass(frozen=True)
class BoundaryArc:
    """Open arc of a closed curve: parameters ``(start, start + length)`` mod ``total``.

    A length equal to ``total`` denotes the whole boundary.
    """

    start: float
    length: float
    total: float

    def __post_init__(self):
        if not (0.0 < self.length <= self.total * (1 + 1e-15)):
            raise ParameterDomainError(f"arc length {self.length} outside (0, L]")
        object.__setattr__(self, "start", float(self.start) % self.total)
        object.__setattr__(self, "length", min(float(self.length), self.total))

    @classmethod
    def between(cls, s0: float, s1: float, total: float) -> "BoundaryArc":
        """Arc running counterclockwise from ``s0`` to ``s1``."""
        length = (s1 - s0) % total
        if length == 0.0:
            length = total
        return cls(s0, length, total)

    @property
    def end(self) -> float:
        return (self.start + self.length) % self.total

    @property
    def stop(self) -> float:
        """Unwrapped end parameter ``start + length``."""
        return self.start + self.length

    @property
    def wraps(self) -> bool:
        return self.start + self.length > self.total

    def offset(self, s):
        return np.mod(np.asarray(s, dtype=float) - self.start, self.total)

    def contains(self, s, closed: bool = False, tol: float = 0.0):
        off = self.offset(s)
        if closed:
            return (off <= self.length + tol) | (off >= self.total - tol)
        return (off > tol) & (off < self.length - tol)

    def at(self, u):
        return np.mod(self.start + np.asarray(u, dtype=float), self.total)


def _turn_angle(t_in: np.ndarray, t_out: np.ndarray) -> float:
    return math.atan2(_cross(t_in[0], t_in[1], t_out[0], t_out[1]), float(t_in @ t_out))


class BoundaryCurve:
    """Closed, simple, positively oriented piecewise line/arc curve.

    Parameters
    ----------
    pieces : sequence of LinePiece or ArcPiece
        Consecutive pieces; the end of each must meet the start of the next.
    eps : float, optional
        Geometric tolerance. Defaults to ``1e-9`` times the bounding-box diagonal.
    check : bool
        Run closure, orientation, cusp and simplicity checks.
    """

    def __init__(self, pieces: Sequence[BoundaryPiece], eps: float | None = None,
                 check: bool = True):
        if len(pieces) == 0:
            raise GeometryError("empty boundary")
        self.pieces = tuple(pieces)
        lengths = np.array([p.length for p in self.pieces])
        self.piece_lengths = lengths
        self.offsets = np.concatenate([[0.0], np.cumsum(lengths)])
        self.length = float(self.offsets[-1])
        samples = np.vstack([p.sample(64) for p in self.pieces])
        self.bbox = (samples[:, 0].min(), samples[:, 1].min(),
                     samples[:, 0].max(), samples[:, 1].max())
        self.diameter = math.hypot(self.bbox[2] - self.bbox[0], self.bbox[3] - self.bbox[1])
        self.eps = float(eps) if eps is not None else 1e-9 * self.diameter
        self.signed_area = float(sum(p.area_term() for p in self.pieces))
        if check:
            self._check_closed()
            if self.signed_area <= 0:
                raise GeometryError("curve must be positively oriented (signed area > 0)")
            self._check_cusps()
            self._check_simple()

    @classmethod
    def polygon(cls, vertices, eps: float | None = None) -> "BoundaryCurve":
        """Polygon through ``vertices`` (closed automatically)."""
        v = [Point2(*map(float, p)) for p in vertices]
        pieces = [LinePiece(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]
        return cls(pieces, eps=eps)

    # ------------------------------------------------------------------ checks
    def _check_closed(self):
        n = len(self.pieces)
        tol = max(1e3 * self.eps, 1e-12)
        for i in range(n):
            a = self.pieces[i].end
            b = self.pieces[(i + 1) % n].start
            if math.hypot(a[0] - b[0], a[1] - b[1]) > tol:
                raise GeometryError(f"pieces {i} and {(i + 1) % n} do not meet")

    def joint_turns(self) -> np.ndarray:
        """Turning angle at the start of every piece (joint with its predecessor)."""
        n = len(self.pieces)
        return np.array([_turn_angle(self.pieces[i - 1].end_tangent(),
                                     self.pieces[i].start_tangent()) for i in range(n)])

    def _check_cusps(self):
        for i, turn in enumerate(self.joint_turns()):
            if abs(turn) > math.pi - 1e-9:
                raise GeometryError(f"cusp at the start of piece {i}")

    def _check_simple(self):
        n = len(self.pieces)
        tol = max(1e3 * self.eps, 1e-12)
        for i in range(n):
            for j in range(i + 1, n):
                joints = []
                if j == i + 1:
                    joints.append(np.asarray(self.pieces[j].start))
                if i == 0 and j == n - 1:
                    joints.append(np.asarray(self.pieces[0].start))
                pts, overlap = _piece_intersections(self.pieces[i], self.pieces[j], self.eps)
                if overlap:
                    raise GeometryError(f"pieces {i} and {j} overlap")
                for p in pts:
                    if not any(np.hypot(*(p - q)) <= tol for q in joints):
                        raise GeometryError(f"pieces {i} and {j} intersect at {tuple(p)}")

    # --------------------------------------------------------- parametrization
    def point_at(self, s: float) -> Point2:
        if not (0.0 <= s < self.length):
            raise ParameterDomainError(f"s={s} outside [0, {self.length})")
        x, y = self.points(np.array([s]))[0]
        return Point2(float(x), float(y))

    def piece_index(self, s: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.offsets, s, side="right") - 1
        return np.clip(idx, 0, len(self.pieces) - 1)

    def points(self, s) -> np.ndarray:
        """Vectorized ``point_at`` with wraparound modulo ``L``."""
        s = np.mod(np.atleast_1d(np.asarray(s, dtype=float)), self.length)
        idx = self.piece_index(s)
        out = np.empty(s.shape + (2,))
        for k in np.unique(idx):
            m = idx == k
            out[m] = self.pieces[k].points(s[m] - self.offsets[k])
        return out

    def tangents(self, s) -> np.ndarray:
        s = np.mod(np.atleast_1d(np.asarray(s, dtype=float)), self.length)
        idx = self.piece_index(s)
        out = np.empty(s.shape + (2,))
        for k in np.unique(idx):
            m = idx == k
            out[m] = self.pieces[k].tangents(s[m] - self.offsets[k])
        return out

    def subpieces(self, arc: BoundaryArc) -> list:
        """Pieces (trimmed) covering ``arc`` in orientation order."""
        out = []
        s, stop = arc.start, arc.stop
        while s < stop - 1e-15 * self.length:
            sm = s % self.length
            k = int(self.piece_index(np.array([sm]))[0])
            t0 = sm - self.offsets[k]
            if self.piece_lengths[k] - t0 <= 1e-14 * self.length:
                # sitting on the end of piece k
                k = (k + 1) % len(self.pieces)
                t0 = 0.0
            t1 = min(self.piece_lengths[k], t0 + (stop - s))
            if t1 - t0 > 1e-14 * self.length:
                out.append(self.pieces[k].sub(t0, t1))
            s += t1 - t0
        return out

    def sample_arc(self, arc: BoundaryArc, density: int = 64) -> np.ndarray:
        """Vertices of the arc plus ``density`` samples per full turn of circular parts."""
        return np.vstack([p.sample(density) for p in self.subpieces(arc)])

    def polyline(self, density: int = 256) -> np.ndarray:
        """Closed polyline approximation (first point not repeated)."""
        pts = [p.sample(density)[:-1] for p in self.pieces]
        return np.vstack(pts)

    def vertex_params(self) -> np.ndarray:
        return self.offsets[:-1].copy()

    # ------------------------------------------------------------ point tests
    def project(self, pts):
        """Nearest boundary parameter and distance for each point."""
        pts = _as_points(pts)
        best_d = np.full(len(pts), np.inf)
        best_s = np.zeros(len(pts))
        for k, piece in enumerate(self.pieces):
            d, t = piece.nearest(pts)
            better = d < best_d
            best_d[better] = d[better]
            best_s[better] = self.offsets[k] + t[better]
        return np.mod(best_s, self.length), best_d

    def winding(self, pts) -> np.ndarray:
        pts = _as_points(pts)
        total = np.zeros(len(pts))
        for piece in self.pieces:
            total += piece.winding_angles(pts)
        return np.rint(total / TWO_PI).astype(int)

    def classify(self, pts, tol: float | None = None) -> np.ndarray:
        """Codes ``INSIDE`` / ``BOUNDARY`` / ``OUTSIDE`` for each point."""
        tol = self.eps if tol is None else tol
        pts = _as_points(pts)
        _, d = self.project(pts)
        w = self.winding(pts)
        return np.where(d <= tol, BOUNDARY, np.where(w != 0, INSIDE, OUTSIDE))

    @property
    def area(self) -> float:
        return self.signed_area

    # --------------------------------------------------------- segment tests
    def segments_blocked(self, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
        """True where segment ``]P, Q[`` touches the curve away from its endpoints."""
        P, Q = _as_points(P), _as_points(Q)
        blocked = np.zeros(len(P), dtype=bool)
        for piece in self.pieces:
            if piece.kind == "line":
                blocked |= _line_blocks(P, Q, piece, self.eps)
            else:
                blocked |= _arc_blocks(P, Q, piece, self.eps)
        return blocked

    def open_segments_inside(self, P, Q) -> np.ndarray:
        """Vectorized :func:`open_segment_in_domain`."""
        P, Q = _as_points(P), _as_points(Q)
        lengths = np.hypot(*(Q - P).T)
        if np.any(lengths <= self.eps):
            raise DegenerateSegmentError("segment endpoints coincide")
        ok = ~self.segments_blocked(P, Q)
        if np.any(ok):
            mids = 0.5 * (P[ok] + Q[ok])
            ok[ok] = self.classify(mids) == INSIDE
        return ok


def _line_blocks(P, Q, piece: LinePiece, eps: float) -> np.ndarray:
    D = Q - P
    dl = np.hypot(D[:, 0], D[:, 1])
    a = np.asarray(piece.start)
    e = np.subtract(piece.end, piece.start)
    el = math.hypot(*e)
    AP = a - P
    denom = _cross(D[:, 0], D[:, 1], e[0], e[1])
    parallel = np.abs(denom) <= 1e-12 * dl * el
    safe = np.where(parallel, 1.0, denom)
    u = _cross(AP[:, 0], AP[:, 1], e[0], e[1]) / safe
    v = _cross(AP[:, 0], AP[:, 1], D[:, 0], D[:, 1]) / safe
    vt = eps / el
    hit = (~parallel) & (v >= -vt) & (v <= 1 + vt) & (u * dl > eps) & ((1 - u) * dl > eps)
    # colinear overlap
    off = np.abs(_cross(D[:, 0], D[:, 1], AP[:, 0], AP[:, 1])) / dl
    colinear = parallel & (off <= eps)
    if np.any(colinear):
        b = np.asarray(piece.end)
        ua = np.einsum("ij,ij->i", a - P, D) / dl ** 2
        ub = np.einsum("ij,ij->i", b - P, D) / dl ** 2
        lo = np.maximum(0.0, np.minimum(ua, ub))
        hi = np.minimum(1.0, np.maximum(ua, ub))
        hit |= colinear & ((hi - lo) * dl > eps)
    return hit


def _arc_blocks(P, Q, piece: ArcPiece, eps: float) -> np.ndarray:
    D = Q - P
    c = np.asarray(piece.center)
    r = piece.radius
    A = np.einsum("ij,ij->i", D, D)
    PC = P - c
    B = 2.0 * np.einsum("ij,ij->i", D, PC)
    C = np.einsum("ij,ij->i", PC, PC) - r * r
    disc = B * B - 4 * A * C
    dl = np.sqrt(A)
    h = np.abs(_cross(D[:, 0], D[:, 1], -PC[:, 0], -PC[:, 1])) / dl
    tangent = np.abs(h - r) <= eps
    valid = (disc >= 0) | tangent
    sq = np.sqrt(np.maximum(disc, 0.0))
    sq = np.where(tangent & (disc < 0), 0.0, sq)
    blocked = np.zeros(len(P), dtype=bool)
    for sgn in (-1.0, 1.0):
        u = (-B + sgn * sq) / (2 * A)
        interior = valid & (u * dl > eps) & ((1 - u) * dl > eps)
        if np.any(interior):
            pts = P[interior] + u[interior, None] * D[interior]
            on = piece.on_arc(pts, eps)
            idx = np.flatnonzero(interior)
            blocked[idx[on]] = True
    return blocked


def _piece_intersections(pa, pb, eps: float):
    """Intersection points of two pieces and an overlap flag."""
    if pa.kind == "line" and pb.kind == "line":
        return _line_line(pa, pb, eps)
    if pa.kind == "arc" and pb.kind == "arc":
        return _arc_arc(pa, pb, eps)
    line, arc = (pa, pb) if pa.kind == "line" else (pb, pa)
    return _line_arc(line, arc, eps), False


def _line_line(l1: LinePiece, l2: LinePiece, eps: float):
    p, q = np.asarray(l1.start), np.asarray(l1.end)
    a, b = np.asarray(l2.start), np.asarray(l2.end)
    d, e = q - p, b - a
    denom = _cross(*d, *e)
    if abs(denom) <= 1e-12 * np.hypot(*d) * np.hypot(*e):
        off = abs(_cross(*d, *(a - p))) / np.hypot(*d)
        if off > eps:
            return [], False
        dd = d @ d
        ua, ub = (a - p) @ d / dd, (b - p) @ d / dd
        lo, hi = max(0.0, min(ua, ub)), min(1.0, max(ua, ub))
        span = (hi - lo) * math.sqrt(dd)
        if span > 10 * eps:
            return [], True
        if span >= -10 * eps:
            return [p + max(lo, min(hi, lo)) * d], False
        return [], False
    u = _cross(*(a - p), *e) / denom
    v = _cross(*(a - p), *d) / denom
    tu, tv = eps / np.hypot(*d), eps / np.hypot(*e)
    if -tu <= u <= 1 + tu and -tv <= v <= 1 + tv:
        return [p + u * d], False
    return [], False


def _line_arc(line: LinePiece, arc: ArcPiece, eps: float):
    p, q = np.asarray(line.start), np.asarray(line.end)
    d = q - p
    c = np.asarray(arc.center)
    A = d @ d
    B = 2 * d @ (p - c)
    C = (p - c) @ (p - c) - arc.radius ** 2
    disc = B * B - 4 * A * C
    if disc < 0:
        h = abs(_cross(*d, *(c - p))) / math.sqrt(A)
        if abs(h - arc.radius) > eps:
            return []
        disc = 0.0
    out = []
    tu = eps / math.sqrt(A)
    for sgn in (-1.0, 1.0):
        u = (-B + sgn * math.sqrt(disc)) / (2 * A)
        if -tu <= u <= 1 + tu:
            pt = p + u * d
            if arc.on_arc(pt[None, :], eps)[0]:
                out.append(pt)
    return out


def _arc_arc(a1: ArcPiece, a2: ArcPiece, eps: float):
    c1, c2 = np.asarray(a1.center), np.asarray(a2.center)
    r1, r2 = a1.radius, a2.radius
    dvec = c2 - c1
    dist = math.hypot(*dvec)
    if dist <= eps:
        if abs(r1 - r2) > eps:
            return [], False
        # same circle: overlap iff angular ranges share an interval
        pts = a2.points(np.linspace(0, a2.length, 65))
        inside = a1.on_arc(pts, -10 * eps)
        if np.count_nonzero(inside) > 1:
            return [], True
        hits = [p for p, m in zip(pts, a1.on_arc(pts, 10 * eps)) if m]
        return hits, False
    if dist > r1 + r2 + eps or dist < abs(r1 - r2) - eps:
        return [], False
    x = (dist ** 2 + r1 ** 2 - r2 ** 2) / (2 * dist)
    h = math.sqrt(max(r1 ** 2 - x ** 2, 0.0))
    base = c1 + x * dvec / dist
    perp = np.array([-dvec[1], dvec[0]]) / dist
    out = []
    for sgn in ((1.0,) if h <= eps else (1.0, -1.0)):
        pt = base + sgn * h * perp
        if a1.on_arc(pt[None, :], eps)[0] and a2.on_arc(pt[None, :], eps)[0]:
            out.append(pt)
    return out, False


# ---------------------------------------------------------------- public API
def point_at(curve: BoundaryCurve, s: float) -> Point2:
    """Point at arclength ``s`` in ``[0, L)``."""
    return curve.point_at(s)


def classify_point(curve: BoundaryCurve, p, tol: float | None = None) -> str:
    """Return ``'inside'``, ``'boundary'`` or ``'outside'``."""
    if tol is not None and tol <= 0:
        raise ValueError("tol must be positive")
    return _CLASS_NAMES[int(curve.classify(np.asarray(p, dtype=float), tol)[0])]


def open_segment_in_domain(curve: BoundaryCurve, p, q) -> bool:
    """True iff the open segment ``]p, q[`` lies in the open domain."""
    return bool(curve.open_segments_inside(np.asarray(p, float), np.asarray(q, float))[0])


def segments_cross_interior(r1, r2, tol: float = 1e-12) -> bool:
    """True iff two segments meet at a point interior to at least one of them.

    Parameters
    ----------
    r1, r2 : pair of points
        Segment endpoints.
    tol : float
        Relative tolerance for endpoint contact and parallelism.
    """
    p, q = np.asarray(r1[0], float), np.asarray(r1[1], float)
    a, b = np.asarray(r2[0], float), np.asarray(r2[1], float)
    d, e = q - p, b - a
    ld, le = math.hypot(*d), math.hypot(*e)
    if ld == 0 or le == 0:
        raise DegenerateSegmentError("segment endpoints coincide")
    denom = _cross(*d, *e)
    if abs(denom) <= tol * ld * le:
        if abs(_cross(*d, *(a - p))) / ld > tol * max(ld, le):
            return False
        ua, ub = (a - p) @ d / ld ** 2, (b - p) @ d / ld ** 2
        return min(1.0, max(ua, ub)) - max(0.0, min(ua, ub)) > tol
    u = _cross(*(a - p), *e) / denom
    v = _cross(*(a - p), *d) / denom
    if u < -tol or u > 1 + tol or v < -tol or v > 1 + tol:
        return False
    u_end = u <= tol or u >= 1 - tol
    v_end = v <= tol or v >= 1 - tol
    return not (u_end and v_end)


@dataclass(frozen=True)
class ConvexityReport:
    """Convexity classification of a boundary curve.

    ``reflex_params`` lists reflex corners; each also appears in
    ``reflex_spans`` as a window of half-width ``eps`` around the corner.
    """

    cls: str
    flat_spans: tuple
    reflex_spans: tuple
    singular_params: tuple
    reflex_params: tuple = ()


def convexity_report(curve: BoundaryCurve) -> ConvexityReport:
    """Classify ``curve`` as strictly-convex, convex or non-convex."""
    L = curve.length
    turns = curve.joint_turns()
    singular = tuple(float(curve.offsets[i]) for i, t in enumerate(turns) if abs(t) > ANGLE_TOL)
    reflex_params = tuple(float(curve.offsets[i]) for i, t in enumerate(turns) if t < -ANGLE_TOL)
    reflex = [BoundaryArc(s - curve.eps, 2 * curve.eps, L) for s in reflex_params]
    for k, piece in enumerate(curve.pieces):
        if piece.kind == "arc" and piece.sweep < 0:
            reflex.append(BoundaryArc(curve.offsets[k], piece.length, L))
    # maximal flat spans: runs of line pieces joined without turning
    n = len(curve.pieces)
    flats = []
    is_line = [p.kind == "line" for p in curve.pieces]
    if all(is_line) and all(abs(t) <= ANGLE_TOL for t in turns):
        raise GeometryError("degenerate curve")
    starts = [k for k in range(n) if is_line[k] and not (is_line[k - 1] and abs(turns[k]) <= ANGLE_TOL)]
    for k in starts:
        length = curve.piece_lengths[k]
        j = (k + 1) % n
        while is_line[j] and abs(turns[j]) <= ANGLE_TOL and j != k:
            length += curve.piece_lengths[j]
            j = (j + 1) % n
        flats.append(BoundaryArc(curve.offsets[k], length, L))
    flats.sort(key=lambda a: a.start)
    if reflex:
        cls = "non-convex"
    elif flats:
        cls = "convex"
    else:
        cls = "strictly-convex"
    return ConvexityReport(cls, tuple(flats), tuple(reflex), singular, reflex_params)


def convex_hull_region(curve: BoundaryCurve, arcs: Sequence[BoundaryArc], samples: int = 64):
    """Convex hull of the given arcs as a shapely geometry.

    Degenerate hulls come back as a ``LineString`` or ``Point``.
    """
    if len(arcs) == 0:
        raise ValueError("convex_hull_region needs at least one arc")
    pts = np.vstack([curve.sample_arc(a, samples) for a in arcs])
    return MultiPoint(pts).convex_hull
