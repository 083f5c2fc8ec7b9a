"""Transport plan atoms, transport density and flow rasters, divergence audits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numba
import numpy as np

from .errors import EmptyMeasureError
from .geometry import BoundaryCurve
from .trace import SignedBoundaryMeasure


@dataclass
class TransportPlan:
    """Equal-mass atoms of ``(Id, T)#f+``.

    Attributes
    ----------
    sources, targets : ndarray, shape (n, 2)
    mass, level : ndarray, shape (n,)
    s_plus, s_minus : ndarray
        Boundary parameters of sources and targets.
    """

    sources: np.ndarray
    targets: np.ndarray
    mass: np.ndarray
    level: np.ndarray
    s_plus: np.ndarray
    s_minus: np.ndarray
    source_map: object = field(default=None, repr=False)

    def __len__(self):
        return len(self.mass)

    @property
    def lengths(self) -> np.ndarray:
        return np.hypot(*(self.targets - self.sources).T)

    @property
    def cost(self) -> float:
        return float(np.sum(self.mass * self.lengths))

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.mass))

    @property
    def atoms(self) -> list:
        return [(tuple(a), tuple(b), float(m), float(t))
                for a, b, m, t in zip(self.sources, self.targets, self.mass, self.level)]

    @classmethod
    def empty(cls):
        z = np.empty((0, 2))
        e = np.empty(0)
        return cls(z, z.copy(), e, e.copy(), e.copy(), e.copy())


def make_plan(tmap, f: SignedBoundaryMeasure, n: int = 800) -> TransportPlan:
    """Atomize ``f+`` by TV quantiles and push every atom through ``T``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    try:
        s, mass = f.inverse_cdf_sample("+", n)
    except EmptyMeasureError:
        return TransportPlan.empty()
    t = np.atleast_1d(tmap.eval(s))
    curve = tmap.curve
    return TransportPlan(curve.points(s), curve.points(t), mass, f.g(s), s, t, tmap)


# ----------------------------------------------------------------- rasters
@dataclass
class FieldRaster:
    """Per-cell transport density ``sigma`` and flow ``v`` on a square grid.

    Arrays are indexed ``[i, j]`` with ``i`` along x and ``j`` along y.
    """

    x0: float
    y0: float
    h: float
    sigma: np.ndarray
    vx: np.ndarray
    vy: np.ndarray

    @property
    def shape(self):
        return self.sigma.shape

    @property
    def centers(self):
        nx, ny = self.shape
        xc = self.x0 + (np.arange(nx) + 0.5) * self.h
        yc = self.y0 + (np.arange(ny) + 0.5) * self.h
        return np.meshgrid(xc, yc, indexing="ij")

    @property
    def total(self) -> float:
        return float(self.sigma.sum())


def grid_for(bbox, resolution) -> tuple:
    """Origin and square cell size covering ``bbox`` with ``(nx, ny)`` cells."""
    nx, ny = resolution
    xmin, ymin, xmax, ymax = bbox
    h = max((xmax - xmin) / nx, (ymax - ymin) / ny)
    # centre the grid on the box
    x0 = 0.5 * (xmin + xmax) - 0.5 * nx * h
    y0 = 0.5 * (ymin + ymax) - 0.5 * ny * h
    return x0, y0, h


@numba.njit(cache=True)
def _clip_accumulate(P, Q, mass, x0, y0, h, nx, ny, sig, vx, vy):
    for a in range(P.shape[0]):
        px, py = P[a, 0], P[a, 1]
        dx, dy = Q[a, 0] - px, Q[a, 1] - py
        length = math.hypot(dx, dy)
        if length == 0.0:
            continue
        ux, uy = dx / length, dy / length
        # crossing parameters with grid lines
        ts = [0.0, 1.0]
        if dx != 0.0:
            i0 = (min(px, px + dx) - x0) / h
            i1 = (max(px, px + dx) - x0) / h
            for i in range(int(math.floor(i0)) + 1, int(math.ceil(i1))):
                t = (x0 + i * h - px) / dx
                if 0.0 < t < 1.0:
                    ts.append(t)
        if dy != 0.0:
            j0 = (min(py, py + dy) - y0) / h
            j1 = (max(py, py + dy) - y0) / h
            for j in range(int(math.floor(j0)) + 1, int(math.ceil(j1))):
                t = (y0 + j * h - py) / dy
                if 0.0 < t < 1.0:
                    ts.append(t)
        tt = np.sort(np.array(ts))
        for k in range(tt.shape[0] - 1):
            t0, t1 = tt[k], tt[k + 1]
            if t1 <= t0:
                continue
            tm = 0.5 * (t0 + t1)
            i = int(math.floor((px + tm * dx - x0) / h))
            j = int(math.floor((py + tm * dy - y0) / h))
            i = min(max(i, 0), nx - 1)
            j = min(max(j, 0), ny - 1)
            w = mass[a] * (t1 - t0) * length
            sig[i, j] += w
            vx[i, j] += w * ux
            vy[i, j] += w * uy


def rasterize(plan: TransportPlan, resolution=(256, 256), bbox=None) -> FieldRaster:
    """Distribute every atom's segment over the grid cells it crosses.

    ``bbox`` defaults to the bounding box of the plan's boundary curve.
    """
    nx, ny = (resolution, resolution) if np.isscalar(resolution) else resolution
    nx, ny = int(nx), int(ny)
    if nx < 1 or ny < 1:
        raise ValueError("resolution must be positive")
    if bbox is None:
        if plan.source_map is None:
            raise ValueError("bbox required for a plan without a boundary curve")
        bbox = plan.source_map.curve.bbox
    x0, y0, h = grid_for(bbox, (nx, ny))
    sig = np.zeros((nx, ny))
    vx = np.zeros((nx, ny))
    vy = np.zeros((nx, ny))
    if len(plan):
        _clip_accumulate(np.ascontiguousarray(plan.sources, dtype=float),
                         np.ascontiguousarray(plan.targets, dtype=float),
                         np.ascontiguousarray(plan.mass, dtype=float), x0, y0, h, nx, ny, sig, vx, vy)
    return FieldRaster(x0, y0, h, sig, vx, vy)


def boundary_mass(plan: TransportPlan, curve: BoundaryCurve) -> float:
    """``sum mass * H1(segment & boundary)`` from collinear overlaps with line pieces."""
    if len(plan) == 0:
        return 0.0
    P, Q = plan.sources, plan.targets
    d = Q - P
    L = np.hypot(d[:, 0], d[:, 1])
    ok = L > 0
    u = np.zeros_like(d)
    u[ok] = d[ok] / L[ok, None]
    eps = curve.eps
    overlap = np.zeros(len(P))
    for piece in curve.pieces:
        if piece.kind != "line":
            continue  # a segment meets an arc in finitely many points
        A, B = np.asarray(piece.start), np.asarray(piece.end)
        ca = u[:, 0] * (A[1] - P[:, 1]) - u[:, 1] * (A[0] - P[:, 0])
        cb = u[:, 0] * (B[1] - P[:, 1]) - u[:, 1] * (B[0] - P[:, 0])
        col = ok & (np.abs(ca) <= eps) & (np.abs(cb) <= eps)
        ta = (A - P) @ np.eye(2)
        ta = ta[:, 0] * u[:, 0] + ta[:, 1] * u[:, 1]
        tb = (B - P)[:, 0] * u[:, 0] + (B - P)[:, 1] * u[:, 1]
        lo = np.maximum(np.minimum(ta, tb), 0.0)
        hi = np.minimum(np.maximum(ta, tb), L)
        overlap += np.where(col, np.clip(hi - lo, 0.0, None), 0.0)
    return float(np.sum(plan.mass * np.minimum(overlap, L)))


# --------------------------------------------------------------- divergence
@dataclass(frozen=True)
class TestFunction:
    __test__ = False

    name: str
    value: Callable
    grad: Callable


def test_battery(bbox) -> list:
    """Monomials up to degree 3 and two Gaussians in box-normalized coordinates."""
    xmin, ymin, xmax, ymax = bbox
    cx, cy = 0.5 * (xmin + xmax), 0.5 * (ymin + ymax)
    r = 0.5 * max(xmax - xmin, ymax - ymin)
    out = []
    for p in range(4):
        for q in range(4 - p):
            def val(x, y, p=p, q=q):
                return ((x - cx) / r) ** p * ((y - cy) / r) ** q

            def grad(x, y, p=p, q=q):
                X, Y = (x - cx) / r, (y - cy) / r
                gx = p * X ** max(p - 1, 0) * Y ** q / r if p else np.zeros_like(X)
                gy = q * X ** p * Y ** max(q - 1, 0) / r if q else np.zeros_like(Y)
                return gx, gy

            out.append(TestFunction(f"x^{p}y^{q}", val, grad))
    for name, (mx, my, w) in {"gauss0": (0.0, 0.0, 0.5), "gauss1": (0.3, -0.2, 0.3)}.items():
        def val(x, y, mx=mx, my=my, w=w):
            X, Y = (x - cx) / r - mx, (y - cy) / r - my
            return np.exp(-(X * X + Y * Y) / w)

        def grad(x, y, mx=mx, my=my, w=w):
            X, Y = (x - cx) / r - mx, (y - cy) / r - my
            e = np.exp(-(X * X + Y * Y) / w)
            return -2 * X / (w * r) * e, -2 * Y / (w * r) * e

        out.append(TestFunction(name, val, grad))
    return out


def boundary_integral(phi: Callable, f: SignedBoundaryMeasure, curve: BoundaryCurve,
                      order: int = 8) -> float:
    """``int phi df`` with Gauss-Legendre nodes on every linear stretch of ``g``."""
    g = f.g
    knots = np.unique(np.r_[g.nodes, curve.offsets, curve.length])
    knots = knots[(knots >= 0) & (knots <= curve.length)]
    a, b = knots[:-1], knots[1:]
    keep = b - a > 0
    a, b = a[keep], b[keep]
    slope = (g(b - 0.0) - g(a)) / (b - a)
    # g(L) wraps to g(0); recover the left limit on the final interval
    slope[-1] = (g(0.0) - g(a[-1])) / (b[-1] - a[-1]) if b[-1] >= curve.length else slope[-1]
    xg, wg = np.polynomial.legendre.leggauss(order)
    s = 0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * xg[None, :]
    pts = curve.points(s.ravel())
    vals = phi(pts[:, 0], pts[:, 1]).reshape(s.shape)
    return float(np.sum(slope * 0.5 * (b - a) * (vals @ wg)))


def divergence_residual(raster: FieldRaster, f: SignedBoundaryMeasure, curve: BoundaryCurve,
                        tests: Sequence[TestFunction] | None = None) -> list:
    """Weak-divergence defects ``|sum grad(phi).v + int phi df|`` per test function."""
    tests = test_battery(curve.bbox) if tests is None else tests
    X, Y = raster.centers
    out = []
    for t in tests:
        gx, gy = t.grad(X, Y)
        flow = float(np.sum(gx * raster.vx + gy * raster.vy))
        out.append(abs(flow + boundary_integral(t.value, f, curve)))
    return out
