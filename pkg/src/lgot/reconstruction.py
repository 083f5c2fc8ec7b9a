"""Least gradient solution from the ray foliation.

Inside the region swept by a pair's rays, ``u`` equals the level of the ray
through the point. Outside every swept region ``u`` is locally constant and
its value is read off the region's boundary by casting probes in eight
directions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DegenerateRegionError, DomainError
from .geometry import INSIDE, BoundaryCurve

PROBE_DIRECTIONS = np.array([(math.cos(a), math.sin(a)) for a in np.arange(8) * math.pi / 4])

INTERIOR, BOUNDARY_ADJACENT, EXTERIOR = 1, 0, -1


@dataclass
class ScalarField:
    """Values of ``u`` at cell centres; ``values`` is ``nan`` where undefined.

    ``mask`` holds ``1`` (interior), ``0`` (boundary-adjacent) or ``-1``
    (exterior) per cell; arrays are indexed ``[i, j]`` with ``i`` along x.
    """

    x0: float
    y0: float
    h: float
    values: np.ndarray
    mask: np.ndarray
    invalid: int = 0

    @property
    def shape(self):
        return self.values.shape

    @property
    def centers(self):
        nx, ny = self.shape
        xc = self.x0 + (np.arange(nx) + 0.5) * self.h
        yc = self.y0 + (np.arange(ny) + 0.5) * self.h
        return np.meshgrid(xc, yc, indexing="ij")

    @property
    def inside(self) -> np.ndarray:
        return self.mask >= 0


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


class Foliation:
    """Point evaluation of ``u`` for a transport map.

    Parameters
    ----------
    tmap : TransportMap
    probe_tol : float
        Relative agreement tolerance (times ``TV(g)``) for flat-region probes.
    """

    def __init__(self, tmap, probe_tol: float = 1e-6, iters: int = 64):
        self.tmap = tmap
        self.curve: BoundaryCurve = tmap.curve
        self.g = tmap.g
        self.iters = iters
        tv = tmap.f.total_variation
        self.level_tol = probe_tol * max(tv, 1e-300)
        self.geo_tol = 1e-9 * self.curve.diameter
        # bounding rays of every swept region, for flat-region probes
        segs, lev = [], []
        for k, t in enumerate(tmap.tables):
            for fr in (0.0, 1.0):
                sp, sm = tmap.pair_rays(k, [fr])
                a, b = self.curve.points(np.r_[sp, sm])
                if np.hypot(*(b - a)) > self.geo_tol:
                    segs.append((a, b))
                    lev.append(float(self.g(sp[0])))
        self.bound_A = np.array([s[0] for s in segs]).reshape(-1, 2)
        self.bound_B = np.array([s[1] for s in segs]).reshape(-1, 2)
        self.bound_level = np.array(lev)

    # ----------------------------------------------------------- swept regions
    def _side(self, k, tau, Z):
        sp = self.tmap.plus_from_tau(k, tau)
        sm = self.tmap.minus_from_tau(k, tau)
        X = self.curve.points(sp)
        Y = self.curve.points(sm)
        d = Y - X
        return _cross(d[:, 0], d[:, 1], Z[:, 0] - X[:, 0], Z[:, 1] - X[:, 1]), X, Y

    def swept_levels(self, Z: np.ndarray):
        """Ray level for points inside some swept region, ``nan`` elsewhere."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        out = np.full(len(Z), np.nan)
        for k, t in enumerate(self.tmap.tables):
            todo = np.flatnonzero(np.isnan(out))
            if not len(todo):
                break
            Zk = Z[todo]
            # chi fans degenerate at tau = 0, so start just inside
            lo = np.full(len(Zk), 1e-12 * t.tv)
            hi = np.full(len(Zk), t.tv)
            h_lo, _, _ = self._side(k, lo, Zk)
            h_hi, _, _ = self._side(k, hi, Zk)
            cand = np.flatnonzero(h_lo * h_hi <= 0)
            if not len(cand):
                continue
            lo, hi, Zc = lo[cand], hi[cand], Zk[cand]
            s_lo = np.sign(h_lo[cand])
            at_hi = np.sign(h_hi[cand]) == 0
            at_lo = (s_lo == 0) & ~at_hi
            for _ in range(self.iters):
                mid = 0.5 * (lo + hi)
                hm, _, _ = self._side(k, mid, Zc)
                same = np.sign(hm) == s_lo
                lo = np.where(same, mid, lo)
                hi = np.where(same, hi, mid)
            tau = 0.5 * (lo + hi)
            tau = np.where(at_hi, t.tv, np.where(at_lo, 1e-12 * t.tv, tau))
            _, X, Y = self._side(k, tau, Zc)
            d = Y - X
            L2 = np.einsum("ij,ij->i", d, d)
            proj = np.einsum("ij,ij->i", Zc - X, d) / np.where(L2 > 0, L2, 1.0)
            foot = X + proj[:, None] * d
            dist = np.hypot(*(Zc - foot).T)
            Lr = np.sqrt(L2)
            ok = (dist <= self.geo_tol + 1e-9 * Lr) & (proj >= -1e-12) & (proj <= 1 + 1e-12)
            idx = todo[cand[ok]]
            out[idx] = self.g(self.tmap.plus_from_tau(k, tau[ok]))
        return out

    # ------------------------------------------------------------ flat regions
    def _first_hit(self, Z, u):
        """Distance and level of the first bounding ray or boundary point along ``u``."""
        n = len(Z)
        best = np.full(n, np.inf)
        level = np.full(n, np.nan)
        # bounding rays
        for A, B, lev in zip(self.bound_A, self.bound_B, self.bound_level):
            t, ok = _ray_segment(Z, u, A, B)
            better = ok & (t < best)
            best[better], level[better] = t[better], lev
        # boundary
        tb = np.full(n, np.inf)
        for piece in self.curve.pieces:
            if piece.kind == "line":
                t, ok = _ray_segment(Z, u, np.asarray(piece.start), np.asarray(piece.end))
            else:
                t, ok = _ray_arc(Z, u, piece)
            tb = np.where(ok & (t < tb), t, tb)
        hit_b = tb < best
        if np.any(hit_b):
            P = Z[hit_b] + tb[hit_b, None] * u
            s, _ = self.curve.project(P)
            level[hit_b] = self.g(s)
            best[hit_b] = tb[hit_b]
        return best, level

    def flat_levels(self, Z):
        """Common probe level per point, ``nan`` where probes disagree."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        levels = np.stack([self._first_hit(Z, u)[1] for u in PROBE_DIRECTIONS], axis=1)
        lo, hi = np.nanmin(levels, axis=1), np.nanmax(levels, axis=1)
        agree = (hi - lo) <= self.level_tol
        return np.where(agree, 0.5 * (lo + hi), np.nan), hi - lo

    def __call__(self, Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        out = self.swept_levels(Z)
        rest = np.isnan(out)
        if np.any(rest):
            out[rest] = self.flat_levels(Z[rest])[0]
        return out


def _ray_segment(Z, u, A, B):
    """Hit distance of half-lines ``Z + t u`` (t > 0) with segment ``AB``."""
    e = B - A
    den = _cross(u[0], u[1], e[0], e[1])
    if abs(den) < 1e-300:
        n = len(Z)
        return np.full(n, np.inf), np.zeros(n, bool)
    w = A - Z
    t = _cross(w[:, 0], w[:, 1], e[0], e[1]) / den
    s = _cross(w[:, 0], w[:, 1], u[0], u[1]) / den
    ok = (t > 1e-12) & (s >= -1e-12) & (s <= 1 + 1e-12)
    return np.where(ok, t, np.inf), ok


def _ray_arc(Z, u, arc):
    c = np.asarray(arc.center)
    w = Z - c
    b = w @ u
    cc = np.einsum("ij,ij->i", w, w) - arc.radius ** 2
    disc = b * b - cc
    n = len(Z)
    best = np.full(n, np.inf)
    ok_any = np.zeros(n, bool)
    root = np.sqrt(np.clip(disc, 0.0, None))
    for t in (-b - root, -b + root):
        P = Z + t[:, None] * u
        on = (disc >= 0) & (t > 1e-12) & arc.on_arc(P, 1e-9 * arc.radius)
        better = on & (t < best)
        best[better] = t[better]
        ok_any |= on
    return best, ok_any


# ----------------------------------------------------------------- public API
def evaluate_u(tmap, z, foliation: Foliation | None = None) -> float:
    """``u(z)`` for a point inside the domain.

    Raises
    ------
    DomainError
        When ``z`` is not inside the domain.
    DegenerateRegionError
        When flat-region probes disagree.
    """
    fol = foliation or Foliation(tmap)
    z = np.asarray(z, dtype=float).reshape(1, 2)
    if fol.curve.classify(z)[0] != INSIDE:
        raise DomainError(f"point {tuple(z[0])} is not inside the domain")
    val = fol.swept_levels(z)[0]
    if not np.isnan(val):
        return float(val)
    lev, spread = fol.flat_levels(z)
    if np.isnan(lev[0]):
        raise DegenerateRegionError(f"flat-region probes disagree by {spread[0]:.3g} at {tuple(z[0])}")
    return float(lev[0])


def cell_mask(curve: BoundaryCurve, x0, y0, h, shape) -> np.ndarray:
    nx, ny = shape
    xc = x0 + (np.arange(nx) + 0.5) * h
    yc = y0 + (np.arange(ny) + 0.5) * h
    X, Y = np.meshgrid(xc, yc, indexing="ij")
    Z = np.c_[X.ravel(), Y.ravel()]
    cls = curve.classify(Z)
    mask = np.full(len(Z), EXTERIOR)
    inside = cls == INSIDE
    _, dist = curve.project(Z[inside])
    m = np.where(dist < h * math.sqrt(0.5), BOUNDARY_ADJACENT, INTERIOR)
    mask[inside] = m
    return mask.reshape(nx, ny)


def u_grid(tmap, resolution=(256, 256), bbox=None) -> ScalarField:
    """Evaluate ``u`` at every cell centre inside the domain; failures become ``nan``."""
    from .fields import grid_for

    nx, ny = (resolution, resolution) if np.isscalar(resolution) else resolution
    if nx * ny < 256:
        raise ValueError("resolution must be at least 16x16")
    curve = tmap.curve
    x0, y0, h = grid_for(bbox or curve.bbox, (nx, ny))
    mask = cell_mask(curve, x0, y0, h, (nx, ny))
    vals = np.full((nx, ny), np.nan)
    X = x0 + (np.arange(nx) + 0.5) * h
    Y = y0 + (np.arange(ny) + 0.5) * h
    XX, YY = np.meshgrid(X, Y, indexing="ij")
    sel = mask >= 0
    Z = np.c_[XX[sel], YY[sel]]
    fol = Foliation(tmap)
    v = np.empty(len(Z))
    for lo in range(0, len(Z), 8192):
        v[lo:lo + 8192] = fol(Z[lo:lo + 8192])
    vals[sel] = v
    return ScalarField(x0, y0, h, vals, mask, int(np.count_nonzero(np.isnan(v))))


def constant_field(curve: BoundaryCurve, value: float, resolution=(64, 64)) -> ScalarField:
    from .fields import grid_for

    nx, ny = (resolution, resolution) if np.isscalar(resolution) else resolution
    x0, y0, h = grid_for(curve.bbox, (nx, ny))
    mask = cell_mask(curve, x0, y0, h, (nx, ny))
    return ScalarField(x0, y0, h, np.where(mask >= 0, float(value), np.nan), mask)


def gradient(field: ScalarField):
    """Central differences where both neighbours are defined, one-sided otherwise."""
    u = field.values
    h = field.h

    def diff(axis):
        up = np.roll(u, -1, axis)
        dn = np.roll(u, 1, axis)
        # no wrap-around
        if axis == 0:
            up[-1, :] = np.nan
            dn[0, :] = np.nan
        else:
            up[:, -1] = np.nan
            dn[:, 0] = np.nan
        c = (up - dn) / (2 * h)
        c = np.where(np.isnan(c), (up - u) / h, c)
        c = np.where(np.isnan(c), (u - dn) / h, c)
        return np.where(np.isnan(u), np.nan, c)

    return diff(0), diff(1)


def total_variation(field: ScalarField):
    """``sum |grad u| h^2`` over defined cells; returns ``(value, resolution)``."""
    gx, gy = gradient(field)
    mag = np.hypot(gx, gy)
    return float(np.nansum(mag) * field.h ** 2), field.shape


def rotation_check(field: ScalarField, raster, sigma: float = 3.0) -> float:
    """Normalized L1 gap between ``R_{pi/2} grad(u) h^2`` and the flow raster.

    Both fields are mollified with a Gaussian of ``sigma`` cells first.
    """
    if field.shape != raster.shape:
        raise ValueError("field and raster resolutions differ")
    gx, gy = gradient(field)
    gx, gy = np.nan_to_num(gx), np.nan_to_num(gy)
    h2 = field.h ** 2
    rx, ry = -gy * h2, gx * h2
    sm = lambda a: ndimage.gaussian_filter(a, sigma, mode="constant")
    dx = sm(rx) - sm(raster.vx)
    dy = sm(ry) - sm(raster.vy)
    ref = np.sum(np.hypot(sm(raster.vx), sm(raster.vy)))
    if ref == 0:
        return float(np.sum(np.hypot(dx, dy)))
    return float(np.sum(np.hypot(dx, dy)) / ref)


def max_principle_violation(field: ScalarField, g) -> float:
    """Largest excursion of ``u`` outside ``[min g, max g]`` (0 when respected)."""
    v = field.values[~np.isnan(field.values)]
    if not len(v):
        return 0.0
    lo, hi = float(np.min(g.vals)), float(np.max(g.vals))
    return float(max(lo - v.min(), v.max() - hi, 0.0))


def trace_gap(field: ScalarField, curve: BoundaryCurve, g) -> float:
    """Max ``|u - g(nearest boundary point)|`` over boundary-adjacent cells."""
    X, Y = field.centers
    sel = (field.mask == BOUNDARY_ADJACENT) & ~np.isnan(field.values)
    if not np.any(sel):
        return 0.0
    s, _ = curve.project(np.c_[X[sel], Y[sel]])
    return float(np.max(np.abs(field.values[sel] - g(s))))


def max_jump(field: ScalarField) -> float:
    """Largest difference between horizontally or vertically adjacent defined cells."""
    u = field.values
    j1 = np.abs(np.diff(u, axis=0))
    j2 = np.abs(np.diff(u, axis=1))
    return float(max(np.nanmax(j1, initial=0.0), np.nanmax(j2, initial=0.0)))
