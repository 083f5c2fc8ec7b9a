"""Discrete Monge-Kantorovich oracle on equal-mass atoms.

The assignment is solved with the shortest-augmenting-path Hungarian method,
which also yields dual potentials ``u_i + v_j <= c_ij`` tight on matched
pairs.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import AttributionError, DegenerateSegmentError, OracleInputError
from .geometry import BoundaryCurve


@numba.njit(cache=True)
def _hungarian(C):
    """Square assignment; returns ``(col_of_row, u, v)``."""
    n = C.shape[0]
    INF = np.inf
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, np.int64)       # p[j]: row matched to column j (1-based, 0 = free)
    way = np.zeros(n + 1, np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, INF)
        used = np.zeros(n + 1, np.bool_)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = INF
            j1 = -1
            for j in range(1, n + 1):
                if not used[j]:
                    cur = C[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    col = np.empty(n, np.int64)
    for j in range(1, n + 1):
        col[p[j] - 1] = j - 1
    return col, u[1:].copy(), v[1:].copy()


@dataclass
class DiscretePlan:
    """Matching of source atoms to target atoms with equal atom mass.

    Attributes
    ----------
    assignment : ndarray of int
        ``assignment[i]`` is the target matched to source ``i``.
    u, v : ndarray or None
        Dual potentials (per unit mass).
    """

    sources: np.ndarray
    targets: np.ndarray
    mass: float
    assignment: np.ndarray
    u: np.ndarray | None = None
    v: np.ndarray | None = None

    def __len__(self):
        return len(self.assignment)

    @property
    def matched_targets(self) -> np.ndarray:
        return self.targets[self.assignment]

    @property
    def lengths(self) -> np.ndarray:
        return np.hypot(*(self.matched_targets - self.sources).T)

    @property
    def cost(self) -> float:
        return float(self.mass * np.sum(self.lengths))

    def cost_matrix(self) -> np.ndarray:
        return _cost_matrix(self.sources, self.targets)


def _cost_matrix(X, Y):
    return np.hypot(X[:, None, 0] - Y[None, :, 0], X[:, None, 1] - Y[None, :, 1])


def _atoms(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[1] != 2:
        raise OracleInputError("atoms must be an (n, 2) array of points")
    return a


def solve_assignment(sources, targets, mass=None) -> DiscretePlan:
    """Optimal equal-mass matching under Euclidean cost.

    Parameters
    ----------
    sources, targets : array_like, shape (n, 2)
    mass : float or array_like, optional
        Common atom mass (default ``1/n``); per-atom arrays must be constant.
    """
    X, Y = _atoms(sources), _atoms(targets)
    n = len(X)
    if len(Y) != n:
        raise OracleInputError(f"unequal atom counts: {n} sources, {len(Y)} targets")
    if mass is None:
        m = 1.0 / max(n, 1)
    else:
        arr = np.atleast_1d(np.asarray(mass, dtype=float))
        if np.ptp(arr) > 1e-9 * max(abs(arr[0]), 1e-300):
            raise OracleInputError("atom masses must be equal")
        m = float(arr.mean())
    if n == 0:
        return DiscretePlan(X, Y, m, np.empty(0, int), np.empty(0), np.empty(0))
    col, u, v = _hungarian(_cost_matrix(X, Y))
    return DiscretePlan(X, Y, m, col, u, v)


def plan_from_assignment(sources, targets, assignment, mass=None) -> DiscretePlan:
    """Wrap a given matching (no duals), e.g. a map plan, for auditing."""
    X, Y = _atoms(sources), _atoms(targets)
    a = np.asarray(assignment, dtype=int)
    if len(X) != len(Y) or sorted(a.tolist()) != list(range(len(Y))):
        raise OracleInputError("assignment must be a permutation")
    m = 1.0 / max(len(X), 1) if mass is None else float(np.mean(mass))
    return DiscretePlan(X, Y, m, a)


def duality_gap(plan: DiscretePlan) -> float:
    """``|primal - dual|`` with dual objective ``sum(u) m + sum(v) m``."""
    if plan.u is None:
        raise OracleInputError("plan carries no dual potentials")
    dual = plan.mass * (float(np.sum(plan.u)) + float(np.sum(plan.v)))
    return abs(plan.cost - dual)


def dual_feasibility(plan: DiscretePlan) -> float:
    """Largest violation of ``u_i + v_j <= c_ij`` (0 when feasible)."""
    C = plan.cost_matrix()
    return float(max(np.max(plan.u[:, None] + plan.v[None, :] - C), 0.0))


def c_transform(plan: DiscretePlan) -> np.ndarray:
    """``u_i = min_j (c_ij - v_j)``."""
    return np.min(plan.cost_matrix() - plan.v[None, :], axis=1)


@dataclass
class CycleAudit:
    margin: float
    cycle: list
    exhaustive: bool
    seed: int | None = None


def cyclical_violation(plan: DiscretePlan, m_max: int = 3, samples: int = 100_000,
                       seed: int = 0) -> CycleAudit:
    """Min over cycles of matched pairs of ``shifted sum - matched sum``.

    Exhaustive for ``n <= 40``; otherwise 2-cycles are exact and longer
    cycles are sampled with a fixed seed.
    """
    if m_max < 2:
        raise ValueError("m_max must be at least 2")
    n = len(plan)
    if n < 2:
        return CycleAudit(math.inf, [], True)
    X, Y = plan.sources, plan.matched_targets
    own = np.hypot(*(X - Y).T)
    W = _cost_matrix(X, Y) - own[:, None]          # W[p, q] = |x_p - y_q| - |x_p - y_p|
    two = W + W.T
    np.fill_diagonal(two, np.inf)
    k = int(np.argmin(two))
    best, cyc = float(two.flat[k]), list(np.unravel_index(k, two.shape))
    exhaustive = n <= 40
    m_top = min(m_max, n)
    if exhaustive:
        for m in range(3, m_top + 1):
            for combo in itertools.combinations(range(n), m):
                for perm in itertools.permutations(combo[1:]):
                    c = (combo[0],) + perm
                    val = sum(W[c[t], c[(t + 1) % m]] for t in range(m))
                    if val < best:
                        best, cyc = float(val), list(c)
    elif m_top >= 3:
        rng = np.random.default_rng(seed)
        lengths = rng.integers(3, m_top + 1, size=samples)
        for m in np.unique(lengths):
            cnt = int(np.count_nonzero(lengths == m))
            C = np.argsort(rng.random((cnt, n)), axis=1)[:, :m]
            vals = sum(W[C[:, t], C[:, (t + 1) % m]] for t in range(m))
            j = int(np.argmin(vals))
            if vals[j] < best:
                best, cyc = float(vals[j]), C[j].tolist()
    return CycleAudit(best * plan.mass, [int(c) for c in cyc], exhaustive,
                      None if exhaustive else seed)


# ------------------------------------------------------------------ audits
def attribute(curve: BoundaryCurve, points, cells) -> np.ndarray:
    """Index of the cell whose trace arcs contain each boundary point.

    Raises
    ------
    AttributionError
        For points on no cell's trace arcs.
    """
    s, dist = curve.project(np.asarray(points, dtype=float))
    out = np.full(len(s), -1)
    tol = 1e-9 * curve.length
    for i, cell in enumerate(cells):
        for arc in cell.trace_arcs:
            hit = (out < 0) & arc.contains(s, closed=True, tol=tol)
            out[hit] = i
    bad = (out < 0) | (dist > 1e-6 * curve.diameter)
    if np.any(bad):
        raise AttributionError(f"{int(np.count_nonzero(bad))} atoms lie on no cell trace arc")
    return out


def cross_cell_mass(plan: DiscretePlan, vp) -> np.ndarray:
    """Mass matrix ``M[i, j]`` from sources on cell ``i`` to targets on cell ``j``.

    ``vp`` is a validated partition (its ``cells`` and ``curve`` are used).
    """
    cells = vp.cells
    n = len(cells)
    M = np.zeros((n, n))
    if len(plan) == 0:
        return M
    a = attribute(vp.curve, plan.sources, cells)
    b = attribute(vp.curve, plan.matched_targets, cells)
    np.add.at(M, (a, b), plan.mass)
    return M


def off_diagonal(M: np.ndarray) -> float:
    return float(M.sum() - np.trace(M))


@dataclass
class SupportAudit:
    interior_fraction: float
    boundary_touching: list = field(default_factory=list)


def ray_support_audit(plan: DiscretePlan, curve: BoundaryCurve) -> SupportAudit:
    """Fraction of mass whose open segments lie inside the domain."""
    n = len(plan)
    if n == 0:
        return SupportAudit(1.0, [])
    P, Q = plan.sources, plan.matched_targets
    L = np.hypot(*(Q - P).T)
    moving = L > curve.eps
    inside = np.ones(n, bool)
    if np.any(moving):
        try:
            inside[moving] = curve.open_segments_inside(P[moving], Q[moving])
        except DegenerateSegmentError:  # pragma: no cover - filtered above
            pass
    bad = np.flatnonzero(~inside)
    return SupportAudit(float(np.count_nonzero(inside) / n),
                        [(int(i), int(plan.assignment[i])) for i in bad])
