"""Acceptance suite: one test and one summary line per criterion."""
import math
import time

import numpy as np

from lgot import admissibility as adm
from lgot.decomposition import decompose
from lgot.fields import boundary_mass, divergence_residual, make_plan
from lgot.geometry import BoundaryArc, segments_cross_interior
from lgot.oracle import (cross_cell_mass, duality_gap, off_diagonal, plan_from_assignment,
                         ray_support_audit, solve_assignment)
from lgot.partition import auto_refine_until, evaluate_conditions, validate
from lgot.pipeline import run, scan
from lgot.reconstruction import (max_principle_violation, rotation_check, total_variation,
                                 trace_gap, u_grid)
from lgot.scenarios import builtin
from lgot.transport_map import build, pushforward_distance


def _atoms(sc, n):
    sp, mass = sc.f.inverse_cdf_sample("+", n)
    sm, _ = sc.f.inverse_cdf_sample("-", n)
    return sc.curve.points(sp), sc.curve.points(sm), mass


def _convex_map(sc):
    d = decompose(sc.f, sc.curve)
    return d, build(d, sc.f, sc.curve)


def _rel_gap(sc, tmap, n):
    dp = solve_assignment(*_atoms(sc, n))
    mp = make_plan(tmap, sc.f, n).cost
    return (mp - dp.cost) / dp.cost, dp.cost, mp


def test_criterion_1_delta_threshold(criterion):
    t0 = time.perf_counter()
    res = scan("delta_square", 0.05, 0.45, "H3", 1e-6)
    dt = time.perf_counter() - t0
    exact = 1 / (2 + math.sqrt(2))
    criterion(1, "delta-square H3 threshold", {
        "delta*": (abs(res.critical - exact) <= 1e-3, f"{res.critical:.7f} vs {exact:.7f}"),
        "runtime<10s": (dt < 10, f"{dt:.2f}s"),
    }, dt)


def test_criterion_2_delta_optimality(criterion):
    t0 = time.perf_counter()
    sc = builtin("delta_square", delta=0.25)
    _, m = _convex_map(sc)
    g200, _, _ = _rel_gap(sc, m, 200)
    g400, _, _ = _rel_gap(sc, m, 400)
    bad = builtin("delta_square", delta=0.40)
    d, mb = _convex_map(bad)
    gbad, oc, mc = _rel_gap(bad, mb, 200)
    h3 = adm.check_H3(mb, d)
    dt = time.perf_counter() - t0
    criterion(2, "delta-square optimality", {
        "gap@200<=1e-3": (abs(g200) <= 1e-3, f"{g200:.2e}"),
        "gap@400<=5e-4": (abs(g400) <= 5e-4, f"{g400:.2e}"),
        "0.40 oracle<map": (oc < mc and gbad > 1e-2, f"{oc:.6f}<{mc:.6f} gap {gbad:.3f}"),
        "0.40 H3 violated": (h3.verdict == adm.VIOLATED, h3.verdict),
        "runtime<30s": (dt < 30, f"{dt:.2f}s"),
    }, dt)


def test_criterion_3_disk(criterion):
    t0 = time.perf_counter()
    sc = builtin("disk_cosine")
    _, m = _convex_map(sc)
    u = u_grid(m, (256, 256))
    X, _ = u.centers
    sel = u.mask == 1
    err = float(np.max(np.abs(u.values[sel] - X[sel])))
    tv = total_variation(u)[0]
    cost = make_plan(m, sc.f, 800).cost
    dt = time.perf_counter() - t0
    criterion(3, "disk cosine", {
        "max|u-x|<=2h": (err <= 2 * u.h, f"{err:.2e} vs {2 * u.h:.2e}"),
        "TV~pi": (abs(tv - math.pi) <= 3e-2, f"{tv:.5f}"),
        "cost~pi": (abs(cost - math.pi) <= 2e-2, f"{cost:.5f}"),
        "runtime<60s": (dt < 60, f"{dt:.2f}s"),
    }, dt)


def test_criterion_4_rect_cshape(criterion):
    t0 = time.perf_counter()
    sc = builtin("rect_cshape", a=0.25, b=0.5, n=1)
    p = auto_refine_until(sc.partition, ["L1", "L2"], 64, sc.f, sc.curve)
    vp = validate(p, sc.f, sc.curve)
    reps = evaluate_conditions(vp, ["L1", "L2"])
    off = off_diagonal(cross_cell_mass(solve_assignment(*_atoms(sc, 400)), vp))
    bad = builtin("rect_cshape", a=0.04, b=0.5, n=4)
    vb = validate(bad.partition, bad.f, bad.curve)
    l2_bad = adm.check_L2_A3(vb, "L2")
    off_bad = off_diagonal(cross_cell_mass(solve_assignment(*_atoms(bad, 400)), vb))
    res = scan("rect_cshape", 0.01, 0.5, "L2", 1e-6, {"b": 0.5})
    dt = time.perf_counter() - t0
    criterion(4, "rectilinear C-shape", {
        "L1/L2 after refine": (all(r.satisfied for r in reps),
                               f"n={[f.n for f in p.families]}"),
        "cross-cell<=1e-9": (off <= 1e-9, f"{off:.2e}"),
        "a=0.04 L2 violated": (l2_bad.verdict == adm.VIOLATED, l2_bad.verdict),
        "a=0.04 cross-cell>0": (off_bad > 0, f"{off_bad:.3f}"),
        "a*": (abs(res.critical - 0.0625) <= 1e-3, f"{res.critical:.6f}"),
    }, dt)


def test_criterion_5_circ_cshape(criterion, tmp_path):
    t0 = time.perf_counter()
    res = scan("circ_cshape", 0.5, 1.5, "A3", 1e-6, {"R": 2.0})
    exact = math.acos(1 / 3)
    rep = run(builtin("circ_cshape", R=2.0, alpha=1.0), out=tmp_path, emit=("csv",))
    v = {c: rep.verdicts[c]["verdict"] for c in ("A1", "A2", "A3")}
    dt = time.perf_counter() - t0
    criterion(5, "circular C-shape", {
        "alpha*": (abs(res.critical - exact) <= 1e-3, f"{res.critical:.6f} vs {exact:.6f}"),
        "A1/A2/A3": (all(x == adm.SATISFIED for x in v.values()) and rep.passed, str(v)),
        "u emitted": ((tmp_path / "u.csv").exists() and rep.objects.get("u") is not None,
                      "u.csv"),
    }, dt)


def test_criterion_6_nonuniqueness(criterion):
    t0 = time.perf_counter()
    sc = builtin("nonuniq_squares", a=1.0, b=2.0)
    vp = validate(sc.partition, sc.f, sc.curve)
    n = 200
    X, Y, mass = _atoms(sc, n)
    dp = solve_assignment(X, Y, mass)
    mp = make_plan(vp.tmap, sc.f, n)
    blue = plan_from_assignment(mp.sources, mp.targets, range(n), mass)
    # horizontal pairing across the removed trapezoids: same length for every atom
    red = plan_from_assignment(mp.sources, mp.sources * [-1, 1], range(n), mass)
    rel = abs(dp.cost - mp.cost) / mp.cost
    fb = ray_support_audit(blue, sc.curve).interior_fraction
    fr = ray_support_audit(red, sc.curve).interior_fraction
    dt = time.perf_counter() - t0
    criterion(6, "non-uniqueness squares", {
        "oracle=map": (rel <= 1e-6, f"{rel:.1e}"),
        "alt cost equal": (abs(red.cost - mp.cost) <= 1e-6 * mp.cost, f"{red.cost:.6f}"),
        "interior(map)=1": (fb == 1.0, f"{fb:.3f}"),
        "interior(alt)<1": (fr < 1.0, f"{fr:.3f}"),
    }, dt)


PASSING = [("delta_square", {"delta": 0.25}), ("disk_cosine", {}),
           ("rect_cshape", {"a": 0.25, "b": 0.5}), ("circ_cshape", {"R": 2.0, "alpha": 1.0}),
           ("nonuniq_squares", {})]


def _properties(name, kw):
    sc = builtin(name, **kw)
    rep = run(sc, oracle=True, grid=256, atoms=800)
    assert rep.passed, rep.messages
    m, f = rep.objects["tmap"], sc.f
    TV = f.total_variation
    r = np.random.default_rng(11)
    k = r.integers(len(m.pairs), size=1000)
    a = r.uniform(0.001, 0.999, size=1000)
    s = np.array([m.pairs[j].plus.start + a[i] * m.pairs[j].plus.length
                  for i, j in enumerate(k)]) % m.length
    t = np.atleast_1d(m.eval(s))
    level = float(np.max(np.abs(m.g(s) - m.g(t))))
    flux = max(abs(f.measure(BoundaryArc.between(x, y, m.length))) for x, y in zip(s, t))
    P, Q = m.curve.points(s), m.curve.points(t)
    cross = sum(segments_cross_interior((P[i], Q[i]), (P[i + 1], Q[i + 1]), tol=1e-9)
                for i in range(0, 1000, 2))
    raster = rep.objects["raster"]
    div = max(divergence_residual(raster, f, sc.curve))
    u = rep.objects["u"]
    return {
        "pushforward": pushforward_distance(m, f) <= 1e-9,
        "level": level <= 1e-9 * TV,
        "zero-flux": flux <= 1e-9 * TV,
        "non-crossing": cross == 0,
        "boundary-mass": boundary_mass(rep.objects["plan"], sc.curve) == 0.0,
        "duality": duality_gap(rep.objects["oracle"]) <= 1e-9,
        "divergence": div <= 5e-3,
        "rotation": rotation_check(u, raster) <= 0.15,
        "max-principle": max_principle_violation(u, sc.trace) == 0.0,
        "trace": trace_gap(u, sc.curve, sc.trace) <= 2 * u.h * sc.trace.lipschitz(),
    }


def test_criterion_7_property_suite(criterion):
    t0 = time.perf_counter()
    checks = {}
    for name, kw in PASSING:
        props = _properties(name, kw)
        bad = [k for k, v in props.items() if not v]
        checks[name] = (not bad, "ok" if not bad else ",".join(bad))
    dt = time.perf_counter() - t0
    checks["runtime<300s"] = (dt < 300, f"{dt:.1f}s")
    criterion(7, "property suite on passing built-ins", checks, dt)


def test_criterion_8_negative_control(criterion):
    t0 = time.perf_counter()
    rep = run(builtin("boundary_counterexample"))
    bm, cost = rep.residuals.get("boundary_mass"), rep.costs.get("map_plan")
    dt = time.perf_counter() - t0
    criterion(8, "boundary-transport counterexample", {
        "boundary_mass=cost": (bm is not None and cost > 0 and abs(bm - cost) <= 1e-12 * cost,
                               f"{bm} vs {cost}"),
        "H2 violated": (rep.verdicts["H2"]["verdict"] == adm.VIOLATED,
                        rep.verdicts["H2"]["verdict"]),
        "no trace-sense solution": (any("no trace-sense solution" in x for x in rep.messages),
                                    "message"),
        "exit 2": (rep.exit_code == 2, str(rep.exit_code)),
    }, dt)
