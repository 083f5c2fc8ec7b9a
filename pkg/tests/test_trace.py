import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lgot.errors import EmptyMeasureError, InvalidTraceError
from lgot.geometry import BoundaryArc
from lgot.trace import (SignedBoundaryMeasure, inverse_cdf_sample, measure_of_arc,
                        monotone_decomposition, tangential_derivative, trace_from_breakpoints,
                        trace_from_pieces, tv_of_arc)


def arc(f, s0, s1):
    return BoundaryArc.between(s0, s1, f.length)


def test_chi_plus_arc_measure(delta25):
    f = delta25.f
    assert measure_of_arc(f, BoundaryArc(0.0, 0.25, 4.0)) == pytest.approx(0.25, abs=1e-15)


def test_constant_trace_zero_measure(constant_square):
    _, f = constant_square
    assert f.total_variation == 0
    assert measure_of_arc(f, BoundaryArc(0.3, 2.0, 4.0)) == 0


def test_circle_cosine_upper_half(disk):
    f, L = disk.f, disk.curve.length
    assert measure_of_arc(f, BoundaryArc(0.0, L / 2, L)) == pytest.approx(-2.0, abs=1e-12)
    assert measure_of_arc(f, BoundaryArc(L / 2, L / 2, L)) == pytest.approx(2.0, abs=1e-12)


def test_zero_measure_arc_through_three_corners(delta25):
    f = delta25.f
    assert measure_of_arc(f, arc(f, 0.25, 4.0 - 0.25)) == pytest.approx(0.0, abs=1e-15)


def test_full_boundary_zero(delta25, disk):
    for sc in (delta25, disk):
        L = sc.curve.length
        assert measure_of_arc(sc.f, BoundaryArc(0.7, L, L)) == pytest.approx(0.0, abs=1e-12)


def test_tv_of_arcs(delta25, disk):
    assert tv_of_arc(delta25.f, BoundaryArc(0.0, 0.25, 4.0)) == pytest.approx(0.25)
    assert tv_of_arc(delta25.f, BoundaryArc(0.4, 0.2, 4.0)) == 0.0
    L = disk.curve.length
    assert tv_of_arc(disk.f, BoundaryArc(0.0, L, L)) == pytest.approx(4.0, abs=1e-12)


def test_monotone_decomposition_delta_square(delta25):
    md = monotone_decomposition(delta25.f)
    assert (len(md.plus), len(md.minus), len(md.flat)) == (4, 4, 4)


def test_monotone_decomposition_constant(constant_square):
    _, f = constant_square
    md = monotone_decomposition(f)
    assert md.plus == () and md.minus == ()
    assert len(md.flat) == 1 and md.flat[0].length == pytest.approx(4.0)


def test_monotone_decomposition_cosine(disk):
    md = monotone_decomposition(disk.f)
    L = disk.curve.length
    assert len(md.plus) == 1 and len(md.minus) == 1 and md.flat == ()
    assert md.minus[0].start == pytest.approx(0.0, abs=1e-12)
    assert md.minus[0].length == pytest.approx(L / 2)
    assert md.plus[0].start == pytest.approx(L / 2)


def test_monotone_decomposition_idempotent(delta25):
    f = SignedBoundaryMeasure(delta25.trace)
    assert monotone_decomposition(f) == monotone_decomposition(f)


def test_sample_one_atom_per_corner(delta25):
    s, m = inverse_cdf_sample(delta25.f, "+", 4)
    assert np.allclose(m, 0.25)
    # one atom inside each plus arc
    md = monotone_decomposition(delta25.f)
    hits = sorted(int(np.flatnonzero([a.contains(x) for a in md.plus])[0]) for x in s)
    assert hits == [0, 1, 2, 3]


def test_sample_single_atom_median(delta25):
    s, m = inverse_cdf_sample(delta25.f, "+", 1)
    assert m[0] == pytest.approx(1.0)
    assert delta25.f.plus_mass(BoundaryArc(0.0, s[0], 4.0)) == pytest.approx(0.5)


def test_sample_cosine_minus_quantiles(disk):
    s, m = inverse_cdf_sample(disk.f, "-", 2)
    # oracle: 1 - cos(theta) = 0.5, 1.5
    want = np.arccos(1 - np.array([0.5, 1.5]))
    assert np.allclose(s, want, atol=1e-5)
    assert np.allclose(m, 1.0)


def test_sample_empty_measure(constant_square):
    _, f = constant_square
    with pytest.raises(EmptyMeasureError):
        inverse_cdf_sample(f, "+", 3)


@settings(max_examples=60)
@given(st.integers(1, 500))
def test_sample_masses_sum_exactly(n):
    from lgot.scenarios import builtin
    f = builtin("delta_square", delta=0.3).f
    s, m = inverse_cdf_sample(f, "-", n)
    assert math.fsum(m) == f.total("-")
    q = f.g.Pminus(s)
    assert np.all(np.diff(q) > 0)


def test_discontinuous_wraparound_rejected(unit_square):
    with pytest.raises(InvalidTraceError):
        trace_from_pieces(unit_square, [{"kind": "linear", "values": [0, 1]},
                                        {"kind": "constant", "value": 1},
                                        {"kind": "constant", "value": 1},
                                        {"kind": "linear", "values": [1, 0.5]}])


def test_repeated_breakpoint_is_a_jump(unit_square):
    with pytest.raises(InvalidTraceError):
        trace_from_breakpoints(unit_square, [(0.0, 0.0), (1.0, 1.0), (1.0, 2.0)])


def _random_trace(seed, n):
    from lgot.geometry import BoundaryCurve
    r = np.random.default_rng(seed)
    curve = BoundaryCurve.polygon([(0, 0), (1, 0), (1, 1), (0, 1)])
    s = np.sort(r.choice(np.arange(1, 400), size=n, replace=False)) / 100.0
    v = r.normal(size=n)
    v[r.random(n) < 0.3] = 0.0
    return SignedBoundaryMeasure(trace_from_breakpoints(curve, np.c_[s, v]))


@settings(max_examples=60)
@given(st.integers(0, 10_000), st.integers(3, 30), st.floats(0, 4), st.floats(0.01, 2),
       st.floats(0.01, 1.5))
def test_measure_is_additive(seed, n, s0, la, lb):
    f = _random_trace(seed, n)
    A = BoundaryArc(s0, la, 4.0)
    B = BoundaryArc(s0 + la, lb, 4.0)
    AB = BoundaryArc(s0, la + lb, 4.0)
    assert f.measure(AB) == pytest.approx(f.measure(A) + f.measure(B), abs=1e-12)
    assert f.tv(A) >= abs(f.measure(A)) - 1e-12


@settings(max_examples=60)
@given(st.integers(0, 10_000), st.integers(3, 30))
def test_total_masses(seed, n):
    f = _random_trace(seed, n)
    assert f.measure(BoundaryArc(0.0, 4.0, 4.0)) == pytest.approx(0.0, abs=1e-12)
    assert f.total_variation == pytest.approx(2 * f.total("+"), rel=1e-12, abs=1e-12)
    md = f.monotone_decomposition()
    for a in md.plus + md.minus:
        assert f.tv(a) == pytest.approx(abs(f.measure(a)), abs=1e-12)
    cover = sum(a.length for a in md.plus + md.minus + md.flat)
    assert cover == pytest.approx(4.0)


def test_tangential_derivative_wraps(delta25):
    f = tangential_derivative(delta25.trace)
    assert f.total_variation == pytest.approx(2.0)
