import math

import pytest
from hypothesis import given, settings, strategies as st

from lgot import admissibility as adm
from lgot.admissibility import (check_A2, check_H2, check_H3, check_H3prime, check_L2_A3,
                                check_S, replay_witness, threshold_scan)
from lgot.decomposition import decompose
from lgot.errors import ScanError
from lgot.geometry import ArcPiece, BoundaryCurve, Point2
from lgot.partition import validate
from lgot.scenarios import builtin
from lgot.trace import SignedBoundaryMeasure, trace_from_breakpoints
from lgot.transport_map import build


def _convex(sc):
    d = decompose(sc.f, sc.curve)
    return d, build(d, sc.f, sc.curve)


@pytest.mark.parametrize("name", ["delta_square", "disk_cosine"])
def test_H2_satisfied_on_convex_examples(name):
    sc = builtin(name)
    _, m = _convex(sc)
    assert check_H2(m, sc.curve).verdict == adm.SATISFIED


def test_H2_counterexample_violated():
    sc = builtin("boundary_counterexample")
    _, m = _convex(sc)
    rep = check_H2(m, sc.curve)
    assert rep.verdict == adm.VIOLATED and rep.witnesses


def test_H3_delta_quarter_margin():
    sc = builtin("delta_square", delta=0.25)
    d, m = _convex(sc)
    rep = check_H3(m, d)
    assert rep.verdict == adm.SATISFIED
    expected = 4 * (1 - 2 * 0.25) - 4 * math.sqrt(2) * 0.25
    # endpoint samples sit 1e-9 of an arc inside the corners
    assert rep.margin == pytest.approx(expected, abs=1e-8)
    assert expected == pytest.approx(0.5858, abs=1e-4)


def test_H3_delta_040_violated_with_replayable_witness():
    sc = builtin("delta_square", delta=0.4)
    d, m = _convex(sc)
    rep = check_H3(m, d)
    assert rep.verdict == adm.VIOLATED
    w = rep.witnesses[0]
    assert sorted(w.nodes) == [0, 1, 2, 3]
    lhs, rhs = replay_witness(sc.curve, w)
    assert lhs == pytest.approx(w.lhs, abs=1e-12) and rhs == pytest.approx(w.rhs, abs=1e-12)
    assert lhs >= rhs - 1e-12
    assert rep.margin == pytest.approx(4 * (1 - 2 * 0.4) - 4 * math.sqrt(2) * 0.4, abs=1e-8)


def test_H3_single_pair_vacuous():
    sc = builtin("disk_cosine")
    d, m = _convex(sc)
    assert check_H3(m, d).verdict == adm.SATISFIED


def test_H3prime():
    sc = builtin("delta_square", delta=0.25)
    d, m = _convex(sc)
    assert check_H3prime(m, d, delta_m=0.5).verdict == adm.SATISFIED
    assert check_H3prime(m, d, delta_m=0.7).verdict == adm.VIOLATED


@pytest.mark.parametrize("name, kw", [("delta_square", {}), ("disk_cosine", {}),
                                      ("boundary_counterexample", {})])
def test_S_satisfied(name, kw):
    sc = builtin(name, **kw)
    d, _ = _convex(sc)
    rep = check_S(sc.curve, sc.f, d)
    assert rep.verdict == adm.SATISFIED and rep.margin > 0


def test_S_polygonal_cshape():
    sc = builtin("rect_cshape", n=4)
    vp = validate(sc.partition, sc.f, sc.curve)
    assert check_S(sc.curve, sc.f, vp.decomposition).verdict == adm.SATISFIED


def _partition_report(name, variant, reps="arbitrary", **kw):
    sc = builtin(name, **kw)
    return check_L2_A3(validate(sc.partition, sc.f, sc.curve), variant, 8, reps)


def test_L2_rect_satisfied():
    assert _partition_report("rect_cshape", "L2", "rays", a=0.25, b=0.5).verdict == adm.SATISFIED


def test_L2_rect_violated():
    rep = _partition_report("rect_cshape", "L2", "rays", a=0.04, b=0.5)
    assert rep.verdict == adm.VIOLATED
    w = rep.witnesses[0]
    lhs, rhs = replay_witness(builtin("rect_cshape", a=0.04).curve, w)
    assert lhs >= rhs - 1e-9


def test_A3_circ_satisfied():
    assert _partition_report("circ_cshape", "A3", "rays", alpha=1.0, n=1).verdict == adm.SATISFIED


def test_A3_circ_violated_beyond_threshold():
    rep = _partition_report("circ_cshape", "A3", "rays", alpha=1.4, n=1)
    assert rep.verdict == adm.VIOLATED


def test_A2():
    sc = builtin("circ_cshape", alpha=1.0, n=6)
    vp = validate(sc.partition, sc.f, sc.curve)
    assert check_A2(vp, sc.curve).verdict == adm.SATISFIED
    giant = builtin("circ_cshape", alpha=1.5, n=1)
    rep = check_A2(validate(giant.partition, giant.f, giant.curve), giant.curve)
    assert rep.verdict == adm.VIOLATED and rep.witnesses
    rect = builtin("rect_cshape", n=4)
    assert check_A2(validate(rect.partition, rect.f, rect.curve)).verdict == adm.SATISFIED


def _delta_family(x):
    d, m = _convex(builtin("delta_square", delta=x))
    return check_H3(m, d)


def test_scan_delta():
    res = threshold_scan(_delta_family, 0.05, 0.45, 1e-6)
    assert res.satisfied_below
    assert res.critical == pytest.approx(1 / (2 + math.sqrt(2)), abs=1e-5)


def test_scan_same_verdict_raises():
    with pytest.raises(ScanError):
        threshold_scan(_delta_family, 0.05, 0.1, 1e-3)


def _moved_delta(delta, angle, shift, scale):
    c, s = math.cos(angle), math.sin(angle)
    sq = [(0, 0), (1, 0), (1, 1), (0, 1)]
    pts = [(scale * (c * x - s * y) + shift[0], scale * (s * x + c * y) + shift[1]) for x, y in sq]
    curve = BoundaryCurve.polygon(pts)
    bp = []
    for k in range(4):
        bp += [(scale * k, 0.0), (scale * (k + delta), scale * delta),
               (scale * (k + 1 - delta), scale * delta)]
    f = SignedBoundaryMeasure(trace_from_breakpoints(curve, bp))
    d = decompose(f, curve)
    return check_H3(build(d, f, curve), d)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 2 * math.pi), st.floats(-5, 5), st.floats(-5, 5), st.floats(0.2, 5.0),
       st.sampled_from([0.2, 0.25, 0.35, 0.4]))
def test_H3_rigid_motion_invariant(angle, dx, dy, scale, delta):
    ref = _moved_delta(delta, 0.0, (0.0, 0.0), 1.0)
    rep = _moved_delta(delta, angle, (dx, dy), scale)
    assert rep.verdict == ref.verdict
    assert rep.margin == pytest.approx(scale * ref.margin, rel=1e-7, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 2 * math.pi), st.floats(0.4, 3.0))
def test_H2_strictly_convex_always_satisfied(phase, top):
    curve = BoundaryCurve([ArcPiece(Point2(0, 0), 1.0, 0.0, math.pi),
                           ArcPiece(Point2(0, 0), 1.0, math.pi, math.pi)])
    L = curve.length
    bp = sorted([(phase % L, top), ((phase + 2.5) % L, 0.0), ((phase + 4.0) % L, 0.7 * top)])
    f = SignedBoundaryMeasure(trace_from_breakpoints(curve, bp))
    d = decompose(f, curve)
    assert check_H2(build(d, f, curve), curve).verdict == adm.SATISFIED
