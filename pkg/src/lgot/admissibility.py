"""Admissibility checks for transport maps and partitions.

Cycle inequalities are evaluated on sampled boundary points. For a cycle
of distinct nodes ``k_1, ..., k_m`` with representatives ``e_k^+`` and
``e_k^-`` the slack is::

    sum_k |e_k^+ - e_{k+1}^-| - sum_k |e_k^+ - e_k^-|

and a strict condition fails when the slack drops to zero. Sampled states
turn the minimization over representatives into a min-plus matrix chain.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numba
import numpy as np

from .errors import ScanError
from .geometry import BoundaryCurve, convexity_report
from .trace import SignedBoundaryMeasure

SATISFIED = "satisfied"
VIOLATED = "violated"
UNDECIDED = "undecided"

ENDPOINT_FRACTION = 1e-9
EXACT_NODES = 12


@dataclass
class CycleWitness:
    """Cycle of representatives ``(s_plus, s_minus)`` with both sums."""

    points: list
    lhs: float
    rhs: float
    nodes: list = field(default_factory=list)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


@dataclass
class AdmissibilityReport:
    condition: str
    verdict: str
    witnesses: list = field(default_factory=list)
    margin: float = math.inf
    notes: list = field(default_factory=list)
    exhaustive: bool = True

    @property
    def satisfied(self) -> bool:
        return self.verdict == SATISFIED

    def summary(self) -> str:
        return f"{self.condition}: {self.verdict} (margin {self.margin:.12g})"


def replay_witness(curve: BoundaryCurve, w: CycleWitness):
    """Recompute ``(lhs, rhs)`` of a cycle witness from its parameters."""
    sp = curve.points([p[0] for p in w.points])
    sm = curve.points([p[1] for p in w.points])
    lhs = float(np.sum(np.hypot(*(sp - sm).T)))
    rhs = float(np.sum(np.hypot(*(sp - np.roll(sm, -1, axis=0)).T)))
    return lhs, rhs


# ------------------------------------------------------------ cycle engine
def _minplus(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.min(A[:, :, :, None] + B[:, None, :, :], axis=2)


def _cycle_values(W: np.ndarray, cycles: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Min-trace of the min-plus chain for each cycle (rows of node indices)."""
    B, m = cycles.shape
    out = np.empty(B)
    for lo in range(0, B, chunk):
        c = cycles[lo:lo + chunk]
        M = W[c[:, 0], c[:, 1]]
        for t in range(1, m):
            M = _minplus(M, W[c[:, t], c[:, (t + 1) % m]])
        out[lo:lo + chunk] = np.min(np.diagonal(M, axis1=1, axis2=2), axis=1)
    return out


def _cycle_states(W: np.ndarray, cyc: Sequence[int]):
    """Optimal state sequence for one cycle (dynamic programming with backpointers)."""
    m = len(cyc)
    K = W.shape[2]
    best_val, best_states = math.inf, None
    for a0 in range(K):
        cost = W[cyc[0], cyc[1 % m]][a0].copy()
        back = []
        for t in range(1, m):
            step = W[cyc[t], cyc[(t + 1) % m]]
            tot = cost[:, None] + step
            back.append(np.argmin(tot, axis=0))
            cost = np.min(tot, axis=0)
        val = cost[a0]
        if val < best_val:
            states = [a0]
            b = a0
            for t in range(m - 2, -1, -1):
                b = back[t][b]
                states.append(int(b))
            best_val, best_states = val, [a0] + states[1:][::-1]
    return best_val, best_states


def _walk_bound(W: np.ndarray) -> float:
    """Minimum weight of a closed walk in the state graph (no self transitions).

    A positive value certifies every cycle of distinct nodes.
    """
    P, _, K, _ = W.shape
    N = P * K
    D = W.transpose(0, 2, 1, 3).reshape(N, N).copy()
    for p in range(P):
        D[p * K:(p + 1) * K, p * K:(p + 1) * K] = np.inf
    for k in range(N):
        D = np.minimum(D, D[:, k:k + 1] + D[k:k + 1, :])
        if D[k, k] < -1e12:
            return -math.inf
    return float(np.min(np.diagonal(D)))


@numba.njit(cache=True)
def _held_karp(W, s, a0, back_v, back_b):
    """Best node-distinct cycle through start node ``s`` (state ``a0``) using only nodes > ``s``.

    Returns ``(value, mask, v, b)`` of the closing state; backpointers are
    written to ``back_v``/``back_b``.
    """
    P = W.shape[0]
    K = W.shape[2]
    nm = 1 << P
    dp = np.full((nm, P, K), np.inf)
    for v in range(s + 1, P):
        for b in range(K):
            dp[1 << v, v, b] = W[s, v, a0, b]
            back_v[1 << v, v, b] = -1
    low = (1 << (s + 1)) - 1
    best = np.inf
    bm, bv, bb = 0, -1, -1
    for mask in range(1, nm):
        if mask & low:
            continue
        for v in range(s + 1, P):
            if not (mask >> v) & 1:
                continue
            for b in range(K):
                cur = dp[mask, v, b]
                if cur == np.inf:
                    continue
                close = cur + W[v, s, b, a0]
                if close < best:
                    best, bm, bv, bb = close, mask, v, b
                for w in range(s + 1, P):
                    if (mask >> w) & 1:
                        continue
                    nmask = mask | (1 << w)
                    for c in range(K):
                        val = cur + W[v, w, b, c]
                        if val < dp[nmask, w, c]:
                            dp[nmask, w, c] = val
                            back_v[nmask, w, c] = v
                            back_b[nmask, w, c] = b
    return best, bm, bv, bb


def _exact_min_cycle(W: np.ndarray):
    """Exact minimum over node-distinct cycles by subset dynamic programming."""
    P, _, K, _ = W.shape
    Wf = np.where(np.isfinite(W), W, np.inf).astype(np.float64)
    back_v = np.full((1 << P, P, K), -1, dtype=np.int16)
    back_b = np.full((1 << P, P, K), -1, dtype=np.int16)
    best, arg = math.inf, None
    for s in range(P - 1):
        for a0 in range(K):
            val, _, _, _ = _held_karp(Wf, s, a0, back_v, back_b)
            if val < best:
                best, arg = val, (s, a0)
    if arg is None:
        return math.inf, []
    s, a0 = arg
    _, mask, v, b = _held_karp(Wf, s, a0, back_v, back_b)
    nodes = []
    while v >= 0:
        nodes.append(int(v))
        pv, pb = int(back_v[mask, v, b]), int(back_b[mask, v, b])
        mask &= ~(1 << v)
        v, b = pv, pb
    return float(best), [s] + nodes[::-1]


@dataclass
class _CycleResult:
    value: float
    cycle: list
    exhaustive: bool
    max_len: int
    bound: float
    sampled: int = 0


def min_cycle(W: np.ndarray, tol: float, budget: int = 200_000, samples: int = 100_000,
              seed: int = 0) -> _CycleResult:
    """Smallest cycle slack over cycles of distinct nodes.

    Up to ``EXACT_NODES`` nodes the minimum is exact (subset dynamic
    programming). Larger graphs enumerate cycles while their count stays
    within ``budget``. A closed-walk relaxation certifies longer cycles; if it is
    inconclusive, ``samples`` random longer cycles are drawn.
    """
    P = W.shape[0]
    best_val, best_cyc = math.inf, None
    if P < 2:
        return _CycleResult(math.inf, [], True, 0, math.inf)
    if P <= EXACT_NODES:
        val, cyc = _exact_min_cycle(W)
        return _CycleResult(val, cyc, True, P, math.inf)
    # m = 2 in closed form
    two = np.min(W + W.transpose(1, 0, 3, 2), axis=(2, 3))
    iu = np.triu_indices(P, 1)
    vals = two[iu]
    j = int(np.argmin(vals))
    best_val, best_cyc = float(vals[j]), [int(iu[0][j]), int(iu[1][j])]
    used = len(vals)
    m_done = 2
    for m in range(3, P + 1):
        count = math.comb(P, m) * math.factorial(m - 1)
        if used + count > budget:
            break
        cyc = []
        for combo in itertools.combinations(range(P), m):
            for perm in itertools.permutations(combo[1:]):
                cyc.append((combo[0],) + perm)
        cyc = np.array(cyc, dtype=np.intp)
        vals = _cycle_values(W, cyc)
        j = int(np.argmin(vals))
        if vals[j] < best_val:
            best_val, best_cyc = float(vals[j]), cyc[j].tolist()
        used += count
        m_done = m
    exhaustive = m_done == P
    bound = math.inf if exhaustive else _walk_bound(W)
    res = _CycleResult(best_val, best_cyc, exhaustive, m_done, bound)
    if exhaustive or best_val <= tol or bound > tol:
        return res
    rng = np.random.default_rng(seed)
    lengths = rng.integers(m_done + 1, P + 1, size=samples)
    for m in np.unique(lengths):
        n = int(np.count_nonzero(lengths == m))
        cyc = np.argsort(rng.random((n, P)), axis=1)[:, :m]
        vals = _cycle_values(W, cyc)
        j = int(np.argmin(vals))
        if vals[j] < res.value:
            res.value, res.cycle = float(vals[j]), cyc[j].tolist()
    res.sampled = samples
    return res


def _verdict_from_cycles(res: _CycleResult, tol: float, strict: bool):
    bad = res.value <= tol if strict else res.value < -tol
    if bad:
        return VIOLATED
    if res.exhaustive or res.bound > (tol if strict else -tol):
        return SATISFIED
    return UNDECIDED


# ------------------------------------------------------------------- samples
def _fractions(k: int, endpoints: bool) -> np.ndarray:
    mid = (np.arange(k) + 0.5) / k
    if endpoints:
        return np.r_[ENDPOINT_FRACTION, mid, 1.0 - ENDPOINT_FRACTION]
    return mid


def _ray_tensor(tmap, groups: Sequence[Sequence[int]], k: int, endpoints: bool = True,
                dedupe: bool = False):
    """Weight tensor with matched representatives ``e^- = T(e^+)``.

    ``groups`` lists, per node, the pair indices of ``tmap`` it contains.
    """
    curve = tmap.curve
    fr = _fractions(k, endpoints)
    per_node = []
    for grp in groups:
        sp, sm = [], []
        for j in grp:
            a, b = tmap.pair_rays(j, fr)
            sp.append(a)
            sm.append(b)
        per_node.append((np.concatenate(sp), np.concatenate(sm)))
    K = max(len(a) for a, _ in per_node)
    Sp = np.array([np.resize(a, K) for a, _ in per_node])
    Sm = np.array([np.resize(b, K) for _, b in per_node])
    X = curve.points(Sp.ravel()).reshape(len(groups), K, 2)
    if dedupe and len(groups) > 1:
        # near-end samples of adjacent slices reproduce the shared ray
        P = len(groups)
        d = np.linalg.norm(X[:, :, None, None, :] - X[None, None, :, :, :], axis=-1)
        d[np.arange(P), :, np.arange(P), :] = np.inf
        shared = d.min(axis=(2, 3)) <= 1e-7 * curve.diameter
        for p in range(P):
            keep = np.flatnonzero(~shared[p])
            if len(keep) and len(keep) < K:
                Sp[p] = np.resize(Sp[p, keep], K)
                Sm[p] = np.resize(Sm[p, keep], K)
        X = curve.points(Sp.ravel()).reshape(P, K, 2)
    Y = curve.points(Sm.ravel()).reshape(len(groups), K, 2)
    own = np.hypot(*(X - Y).transpose(2, 0, 1))                       # (P, K)
    cross = np.linalg.norm(X[:, None, :, None, :] - Y[None, :, None, :, :], axis=-1)  # (P,P,K,K)
    W = cross - own[:, None, :, None]
    P = len(groups)
    W[np.arange(P), np.arange(P)] = np.inf
    return W, Sp, Sm


def _ray_witness(W, Sp, Sm, curve, cycle) -> CycleWitness:
    _, states = _cycle_states(W, cycle)
    pts = [(float(Sp[n, a]), float(Sm[n, a])) for n, a in zip(cycle, states)]
    w = CycleWitness(pts, 0.0, 0.0, list(cycle))
    w.lhs, w.rhs = replay_witness(curve, w)
    return w


# ----------------------------------------------------------------- H2 / H3 / S
def check_H2(tmap, curve: BoundaryCurve, n: int = 16) -> AdmissibilityReport:
    """Open rays ``]x, T(x)[`` must lie inside the domain."""
    if n < 2:
        raise ValueError("n must be at least 2")
    fr = np.r_[1e-6, np.linspace(0.0, 1.0, n + 2)[1:-1], 1.0 - 1e-6]
    witnesses = []
    checked = 0
    # shorter chords of a curved side sit within eps of it and cannot be resolved
    floor = max(10 * curve.eps, 4 * math.sqrt(curve.eps * curve.diameter))
    for j in range(len(tmap)):
        sp, sm = tmap.pair_rays(j, fr)
        P, Q = curve.points(sp), curve.points(sm)
        long = np.hypot(*(P - Q).T) > floor
        if not np.any(long):
            continue
        ok = curve.open_segments_inside(P[long], Q[long])
        checked += int(np.count_nonzero(long))
        for a, b in zip(np.flatnonzero(long)[~ok], np.flatnonzero(~ok)):
            witnesses.append({"pair": j, "s_plus": float(sp[a]), "s_minus": float(sm[a]),
                              "source": P[a].tolist(), "target": Q[a].tolist()})
    verdict = VIOLATED if witnesses else SATISFIED
    return AdmissibilityReport("H2", verdict, witnesses, 0.0 if witnesses else math.inf,
                               [f"{checked} rays tested"], exhaustive=False)


def check_H3(tmap, d=None, k: int = 6, strict_margin: float = 0.0, budget: int = 200_000,
             samples: int = 100_000, seed: int = 0) -> AdmissibilityReport:
    """Cycle inequality over distinct pairs with TV-quantile and endpoint samples.

    With ``strict_margin > 0`` the report also states whether the primed
    variant holds with ``delta_m = margin >= strict_margin``.
    """
    curve = tmap.curve
    tol = 1e-12 * curve.diameter
    if len(tmap) < 2:
        return AdmissibilityReport("H3", SATISFIED, [], math.inf,
                                   ["fewer than two pairs: no cycles"], True)
    W, Sp, Sm = _ray_tensor(tmap, [[j] for j in range(len(tmap))], k)
    res = min_cycle(W, tol, budget, samples, seed)
    verdict = _verdict_from_cycles(res, tol, strict=True)
    notes = ["verdict relies on sampled representatives"]
    if not res.exhaustive:
        notes.append(f"cycles enumerated up to length {res.max_len}; "
                     f"closed-walk bound {res.bound:.6g}" +
                     (f"; {res.sampled} random cycles" if res.sampled else ""))
    witnesses = [_ray_witness(W, Sp, Sm, curve, res.cycle)] if res.cycle else []
    if strict_margin > 0:
        ok = res.value >= strict_margin
        notes.append(f"H3' with delta_m={strict_margin:.6g}: {'holds' if ok else 'fails'}")
    return AdmissibilityReport("H3", verdict, witnesses if verdict == VIOLATED else witnesses[:1],
                               res.value, notes, res.exhaustive)


def check_H3prime(tmap, d=None, k: int = 6, delta_m: float = 1e-3, **kw) -> AdmissibilityReport:
    rep = check_H3(tmap, d, k, strict_margin=delta_m, **kw)
    ok = rep.verdict == SATISFIED and rep.margin >= delta_m
    return AdmissibilityReport("H3'", SATISFIED if ok else VIOLATED, rep.witnesses,
                               rep.margin - delta_m, rep.notes, rep.exhaustive)


def check_S(curve: BoundaryCurve, f: SignedBoundaryMeasure, d) -> AdmissibilityReport:
    """|f|-mass of eps-windows around corners inside paired arcs."""
    from .geometry import BoundaryArc
    rep = convexity_report(curve)
    eps = curve.eps
    TV = max(f.total_variation, 1e-300)
    total = 0.0
    hits = []
    arcs = [a for p in d.pairs for a in p.arcs()]
    for s in rep.singular_params:
        if any(a.contains(s, closed=True) for a in arcs):
            m = f.tv(BoundaryArc(s - eps, 2 * eps, f.length))
            total += m
            hits.append({"s": s, "mass": m})
    ok = total <= 1e-6 * TV
    return AdmissibilityReport("S", SATISFIED if ok else VIOLATED, [] if ok else hits,
                               1e-6 * TV - total,
                               [f"window mass {total:.3g} over {len(hits)} singular points; "
                                "atomless piecewise-linear data carries no corner mass"])


# ------------------------------------------------------------ partition checks
def _drop_shared(curve: BoundaryCurve, groups: list) -> list:
    pts = [curve.points(s) for s in groups]
    tol = 1e-9 * curve.diameter
    out = []
    for p, s in enumerate(groups):
        others = np.concatenate([q for r, q in enumerate(pts) if r != p]) if len(pts) > 1 else np.empty((0, 2))
        if len(others) == 0:
            out.append(s)
            continue
        d = np.min(np.linalg.norm(pts[p][:, None, :] - others[None, :, :], axis=-1), axis=1)
        keep = d > tol
        out.append(s[keep] if np.any(keep) else s)
    return out


def _arbitrary_tensor(vp, k: int):
    """Alternating-chain tensor with independent plus and minus representatives."""
    curve = vp.curve
    fr = np.r_[0.0, (np.arange(k) + 0.5) / k, 1.0]
    Pl, Mi = [], []
    for cell in vp.mass_cells:
        sp = np.concatenate([vp.tmap.plus_from_tau(j, fr * vp.tmap.tables[j].tv) for j in cell.pair_ids])
        sm = np.concatenate([vp.tmap.minus_from_tau(j, fr * vp.tmap.tables[j].tv) for j in cell.pair_ids])
        Pl.append(sp)
        Mi.append(sm)
    # closed arcs, except end points shared with a neighbouring cell
    Pl = _drop_shared(curve, Pl)
    Mi = _drop_shared(curve, Mi)
    K = max(len(a) for a in Pl)
    Sp = np.array([np.resize(a, K) for a in Pl])
    Sm = np.array([np.resize(a, K) for a in Mi])
    n = len(Pl)
    X = curve.points(Sp.ravel()).reshape(n, K, 2)
    Y = curve.points(Sm.ravel()).reshape(n, K, 2)
    own = np.linalg.norm(Y[:, :, None, :] - X[:, None, :, :], axis=-1)       # (n, i, j)
    cross = np.linalg.norm(X[:, None, :, None, :] - Y[None, :, None, :, :], axis=-1)  # (k,l,j,i')
    # C[k,l,i,i'] = min_j (-own[k,i,j] + cross[k,l,j,i'])
    W = np.min(-own[:, None, :, :, None] + cross[:, :, None, :, :], axis=3)
    W[np.arange(n), np.arange(n)] = np.inf
    return W, Sp, Sm, own, cross


def _arbitrary_witness(W, Sp, Sm, own, cross, curve, cycle) -> CycleWitness:
    _, states = _cycle_states(W, cycle)
    m = len(cycle)
    pts = []
    for t in range(m):
        kk, ll = cycle[t], cycle[(t + 1) % m]
        i, i2 = states[t], states[(t + 1) % m]
        j = int(np.argmin(-own[kk, i, :] + cross[kk, ll, :, i2]))
        pts.append((float(Sp[kk, j]), float(Sm[kk, i])))
    w = CycleWitness(pts, 0.0, 0.0, list(cycle))
    w.lhs, w.rhs = replay_witness(curve, w)
    return w


def check_L2_A3(vp, variant: str = "L2", k: int = 8, representatives: str = "arbitrary",
                budget: int = 200_000, samples: int = 100_000, seed: int = 0) -> AdmissibilityReport:
    """Cycle inequality over distinct mass-carrying cells of a validated partition.

    Parameters
    ----------
    vp : ValidatedPartition
    variant : {'L2', 'A3', 'A3~'}
        ``A3~`` is the non-strict form.
    representatives : {'arbitrary', 'rays'}
        Independent plus/minus samples per cell, or matched pairs
        ``(x, T(x))`` including near-endpoint samples.
    """
    if variant not in ("L2", "A3", "A3~"):
        raise ValueError(f"unknown variant {variant!r}")
    curve = vp.curve
    tol = 1e-12 * curve.diameter
    cells = vp.mass_cells
    if len(cells) < 2:
        return AdmissibilityReport(variant, SATISFIED, [], math.inf, ["fewer than two cells"], True)
    if representatives == "rays":
        W, Sp, Sm = _ray_tensor(vp.tmap, [c.pair_ids for c in cells], k, dedupe=True)
    elif representatives == "arbitrary":
        W, Sp, Sm, own, cross = _arbitrary_tensor(vp, k)
    else:
        raise ValueError("representatives must be 'arbitrary' or 'rays'")
    res = min_cycle(W, tol, budget, samples, seed)
    strict = variant != "A3~"
    verdict = _verdict_from_cycles(res, tol, strict)
    if representatives == "rays":
        wit = _ray_witness(W, Sp, Sm, curve, res.cycle)
    else:
        wit = _arbitrary_witness(W, Sp, Sm, own, cross, curve, res.cycle)
    wit.nodes = [cells[n].index for n in res.cycle]
    notes = [f"{representatives} representatives, k={k}"]
    if not res.exhaustive:
        notes.append(f"cycles enumerated up to length {res.max_len}; closed-walk bound {res.bound:.6g}")
    return AdmissibilityReport(variant, verdict, [wit], res.value, notes, res.exhaustive)


def check_A2(vp, curve: BoundaryCurve | None = None, k: int = 8) -> AdmissibilityReport:
    """Every segment between the two trace arcs of an E cell lies inside the domain."""
    curve = curve or vp.curve
    fr = np.r_[1e-6, (np.arange(k) + 0.5) / k, 1 - 1e-6]
    witnesses = []
    e_cells = [c for c in vp.mass_cells if c.kind == "E"]
    for cell in e_cells:
        for j in cell.pair_ids:
            tv = vp.tmap.tables[j].tv
            sp = vp.tmap.plus_from_tau(j, fr * tv)
            sm = vp.tmap.minus_from_tau(j, fr * tv)
            A = np.repeat(sp, len(sm))
            B = np.tile(sm, len(sp))
            P, Q = curve.points(A), curve.points(B)
            ok = curve.open_segments_inside(P, Q)
            for i in np.flatnonzero(~ok)[:3]:
                witnesses.append({"cell": cell.index, "s_plus": float(A[i]), "s_minus": float(B[i]),
                                  "source": P[i].tolist(), "target": Q[i].tolist()})
    verdict = VIOLATED if witnesses else SATISFIED
    note = f"{len(e_cells)} E cells" if e_cells else "no E cells"
    return AdmissibilityReport("A2", verdict, witnesses, 0.0 if witnesses else math.inf, [note],
                               exhaustive=False)


# ------------------------------------------------------------------ scans
@dataclass
class ScanResult:
    critical: float
    lo: float
    hi: float
    history: list
    satisfied_below: bool


def threshold_scan(family: Callable[[float], AdmissibilityReport], lo: float, hi: float,
                   tol: float = 1e-6) -> ScanResult:
    """Bisect the satisfied/violated frontier of ``family`` on ``[lo, hi]``.

    ``family(param)`` returns an :class:`AdmissibilityReport`; undecided
    verdicts count as not satisfied.
    """
    history = []

    def probe(x):
        rep = family(x)
        history.append((float(x), rep.verdict, float(rep.margin)))
        return rep.verdict == SATISFIED

    a, b = probe(lo), probe(hi)
    if a == b:
        raise ScanError(f"verdict '{SATISFIED if a else 'not satisfied'}' at both ends of "
                        f"[{lo}, {hi}]: no frontier")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if probe(mid) == a:
            lo = mid
        else:
            hi = mid
    return ScanResult(0.5 * (lo + hi), lo, hi, history, a)
