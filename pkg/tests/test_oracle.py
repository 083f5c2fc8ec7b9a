import math

import numpy as np
import pytest

from lgot.decomposition import decompose
from lgot.errors import AttributionError, OracleInputError
from lgot.fields import make_plan
from lgot.oracle import (c_transform, cross_cell_mass, cyclical_violation, dual_feasibility,
                         duality_gap, off_diagonal, plan_from_assignment, ray_support_audit,
                         solve_assignment)
from lgot.partition import single_cell, validate
from lgot.scenarios import builtin
from lgot.transport_map import build
from scipy.optimize import linear_sum_assignment


def _atoms(sc, n):
    sp, mass = sc.f.inverse_cdf_sample("+", n)
    sm, _ = sc.f.inverse_cdf_sample("-", n)
    return sc.curve.points(sp), sc.curve.points(sm), mass


def _map_cost(sc, n):
    return make_plan(build(decompose(sc.f, sc.curve), sc.f, sc.curve), sc.f, n).cost


def test_two_by_two_identity():
    p = solve_assignment([(0, 0), (1, 0)], [(0, 1), (1, 1)], 0.5)
    assert p.assignment.tolist() == [0, 1]
    assert p.cost == pytest.approx(2 * 0.5)


def test_against_scipy_assignment():
    # independent solver on random instances
    r = np.random.default_rng(7)
    for n in (5, 17, 60):
        X, Y = r.random((n, 2)), r.random((n, 2))
        p = solve_assignment(X, Y)
        C = np.hypot(X[:, None, 0] - Y[None, :, 0], X[:, None, 1] - Y[None, :, 1])
        rows, cols = linear_sum_assignment(C)
        assert p.cost == pytest.approx(C[rows, cols].sum() / n, rel=1e-12)


@pytest.mark.parametrize("n, tol", [(200, 1e-3), (400, 5e-4)])
def test_delta_quarter_agrees_with_map(n, tol):
    sc = builtin("delta_square", delta=0.25)
    X, Y, mass = _atoms(sc, n)
    dp = solve_assignment(X, Y, mass)
    mp = _map_cost(sc, n)
    assert dp.cost <= mp * (1 + 1e-12)
    assert (mp - dp.cost) / dp.cost <= tol


@pytest.mark.parametrize("n", [200, 400])
def test_delta_040_beats_map(n):
    sc = builtin("delta_square", delta=0.4)
    X, Y, mass = _atoms(sc, n)
    dp = solve_assignment(X, Y, mass)
    assert (_map_cost(sc, n) - dp.cost) / dp.cost > 1e-2


@pytest.mark.parametrize("name", ["delta_square", "disk_cosine"])
def test_duality(name):
    sc = builtin(name)
    dp = solve_assignment(*_atoms(sc, 200))
    assert duality_gap(dp) <= 1e-9
    assert dual_feasibility(dp) <= 1e-9
    assert np.max(np.abs(c_transform(dp) - dp.u)) <= 1e-9


def test_duality_needs_potentials():
    p = plan_from_assignment([(0, 0)], [(1, 0)], [0])
    with pytest.raises(OracleInputError):
        duality_gap(p)


def test_cycles_on_optimal_plan():
    sc = builtin("delta_square", delta=0.25)
    audit = cyclical_violation(solve_assignment(*_atoms(sc, 40)))
    assert audit.exhaustive and audit.margin >= -1e-9


def _corner_rays(d):
    # far-end rays of the four chi pairs, each cutting a corner of the square
    P = np.array([(d, 0), (1, d), (1 - d, 1), (0, 1 - d)], float)
    M = np.array([(0, d), (1 - d, 0), (1, 1 - d), (d, 1)], float)
    return P, M


def test_swapped_corner_cycle_detected():
    P, M = _corner_rays(0.4)
    audit = cyclical_violation(plan_from_assignment(P, M, range(4), 0.25), m_max=4)
    assert audit.margin < 0
    assert sorted(audit.cycle) == [0, 1, 2, 3]
    assert audit.margin == pytest.approx(0.25 * (4 * 0.2 - 4 * math.sqrt(2) * 0.4), abs=1e-12)


def test_corner_cycle_below_threshold():
    P, M = _corner_rays(0.2)
    assert cyclical_violation(plan_from_assignment(P, M, range(4), 0.25), m_max=4).margin > 0


def test_single_atom_no_cycles():
    audit = cyclical_violation(solve_assignment([(0, 0)], [(1, 1)]))
    assert audit.margin == math.inf


def test_cross_cell_examples():
    for a, expect_zero in ((0.25, True), (0.04, False)):
        sc = builtin("rect_cshape", a=a, b=0.5, n=2)
        vp = validate(sc.partition, sc.f, sc.curve)
        dp = solve_assignment(*_atoms(sc, 400))
        off = off_diagonal(cross_cell_mass(dp, vp))
        assert (off <= 1e-9) if expect_zero else (off > 0)


def test_cross_cell_single_cell(delta25):
    vp = validate(single_cell(delta25.curve), delta25.f, delta25.curve)
    M = cross_cell_mass(solve_assignment(*_atoms(delta25, 50)), vp)
    assert M.shape == (1, 1) and M[0, 0] == pytest.approx(delta25.f.total("+"))


def test_attribution_error(delta25):
    vp = validate(single_cell(delta25.curve), delta25.f, delta25.curve)
    p = solve_assignment([(0.5, 0.5)], [(0.2, 0.0)])
    with pytest.raises(AttributionError):
        cross_cell_mass(p, vp)


def test_nonuniqueness_two_plans():
    sc = builtin("nonuniq_squares", a=1.0, b=2.0)
    X, _, mass = _atoms(sc, 200)
    # blue: the map's vertical rays; red: horizontal pairing through the cut-out trapezoids
    blue = plan_from_assignment(X, X * [1, -1], range(len(X)), mass)
    red = plan_from_assignment(X, X * [-1, 1], range(len(X)), mass)
    dp = solve_assignment(X, X * [1, -1], mass)
    mp = _map_cost(sc, 200)
    assert blue.cost == pytest.approx(mp, rel=1e-12)
    assert red.cost == pytest.approx(dp.cost, rel=1e-6)
    assert blue.cost == pytest.approx(dp.cost, rel=1e-6)
    assert ray_support_audit(blue, sc.curve).interior_fraction == 1.0
    audit = ray_support_audit(red, sc.curve)
    assert audit.interior_fraction < 1.0 and audit.boundary_touching


def test_counterexample_audit():
    sc = builtin("boundary_counterexample")
    dp = solve_assignment(*_atoms(sc, 100))
    assert ray_support_audit(dp, sc.curve).interior_fraction == 0.0


def test_deterministic():
    r = np.random.default_rng(1)
    X, Y = r.random((80, 2)), r.random((80, 2))
    assert np.array_equal(solve_assignment(X, Y).assignment, solve_assignment(X, Y).assignment)


def test_input_errors():
    with pytest.raises(OracleInputError):
        solve_assignment(np.zeros((3, 2)), np.zeros((2, 2)))
    with pytest.raises(OracleInputError):
        solve_assignment(np.zeros((2, 2)), np.zeros((2, 2)), [0.1, 0.2])
