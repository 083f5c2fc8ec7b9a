
import pytest

from lgot import admissibility as adm
from lgot.errors import PartitionGeometryError, RefinementError, RefinementExhaustedError
from lgot.partition import (Cell, Partition, auto_refine_until, cell_geometry, refine,
                            single_cell, validate)
from lgot.scenarios import builtin


def test_rect_n4_passes():
    sc = builtin("rect_cshape", a=0.25, b=0.5, n=4)
    vp = validate(sc.partition, sc.f, sc.curve)
    assert vp.passed
    assert vp.report("L1").verdict == adm.SATISFIED
    assert len(vp.cells) == 3 + 8
    assert sum(r.area for r in vp.cell_reports) == pytest.approx(sc.curve.area, rel=1e-6)


def test_circ_n6_passes():
    sc = builtin("circ_cshape", R=2.0, alpha=1.0, n=6)
    vp = validate(sc.partition, sc.f, sc.curve)
    assert vp.passed
    assert vp.report("A1").verdict == adm.SATISFIED
    assert sum(c.kind == "E" for c in vp.cells) == 12


def test_single_cell_reduces_to_convex(delta25):
    vp = validate(single_cell(delta25.curve), delta25.f, delta25.curve)
    assert vp.passed and len(vp.pairs) == 4
    assert sorted(p.tv for p in vp.pairs) == pytest.approx([0.25] * 4)


def test_refine_rect_slices():
    sc = builtin("rect_cshape", a=0.25, b=0.5, n=1)
    p = refine(sc.partition, "right", 4)
    assert p.family("right").n == 4 and p.family("left").n == 1
    cells = [c for c in p.expand(sc.f) if c.family == "right"]
    assert len(cells) == 4
    # slices are counted from the low level g = -1
    for j, c in enumerate(cells):
        for arc in c.trace_arcs:
            lo = sorted([float(sc.trace(arc.start)), float(sc.trace(arc.stop))])
            assert lo == pytest.approx([-1 + j / 4, -1 + (j + 1) / 4], abs=1e-12)
    assert validate(p, sc.f, sc.curve).passed


def test_refine_identity():
    sc = builtin("rect_cshape", n=1)
    assert refine(sc.partition, "right", 1) is sc.partition


def test_refine_circ_annular_sectors():
    sc = builtin("circ_cshape", R=2.0, alpha=1.0, n=1)
    p = refine(sc.partition, "right", 6)
    cells = [c for c in p.expand(sc.f) if c.family == "right"]
    assert len(cells) == 6
    for c in cells:
        geo = cell_geometry(sc.curve, sc.f, c)
        # sector between angles j*alpha/6 and (j+1)*alpha/6 of the half annulus
        assert geo.curve.area == pytest.approx(0.5 * (4 - 1) * 1.0 / 6, rel=1e-3)


def test_refine_errors():
    sc = builtin("rect_cshape")
    with pytest.raises(RefinementError):
        refine(sc.partition, "middle", 2)
    with pytest.raises(RefinementError):
        refine(sc.partition, "right", 0)


def test_per_slice_tv():
    sc = builtin("rect_cshape", n=8)
    TV = sc.f.total_variation
    for c in sc.partition.expand(sc.f):
        if c.kind == "C":
            tvs = [sc.f.tv(a) for a in c.trace_arcs]
            assert tvs == pytest.approx([1 / 8, 1 / 8], abs=1e-12 * TV)


def test_zero_flux_per_cell():
    for sc in (builtin("rect_cshape", n=4), builtin("circ_cshape", n=6)):
        vp = validate(sc.partition, sc.f, sc.curve)
        for r in vp.cell_reports:
            assert abs(r.flux) <= 1e-12 * sc.f.total_variation


def test_auto_refine_succeeds():
    sc = builtin("rect_cshape", a=0.25, b=0.5, n=1)
    p = auto_refine_until(sc.partition, ["L2"], 64, sc.f, sc.curve)
    assert all(fam.n <= 64 for fam in p.families)
    vp = validate(p, sc.f, sc.curve)
    assert vp.passed


def test_auto_refine_exhausted():
    sc = builtin("rect_cshape", a=0.04, b=0.5, n=1)
    with pytest.raises(RefinementExhaustedError) as info:
        auto_refine_until(sc.partition, ["L2"], 16, sc.f, sc.curve)
    assert any(r.verdict == adm.VIOLATED for r in info.value.report)


def test_auto_refine_no_conditions(delta25):
    p = single_cell(delta25.curve)
    assert auto_refine_until(p, [], 8, delta25.f, delta25.curve) is p


def test_coverage_failure():
    sc = builtin("rect_cshape", n=2)
    missing = Partition(sc.partition.cells[:2], sc.partition.families)
    with pytest.raises(PartitionGeometryError):
        validate(missing, sc.f, sc.curve)


def test_nonconstant_X_cell_flagged():
    sc = builtin("rect_cshape", n=2)
    fams = sc.partition.families
    # relabel the first right slice as a constant cell
    right = fams[0].cells(sc.f)
    cells = (Cell("X", right[0].trace_arcs, "fake"),) + tuple(sc.partition.cells)
    rest = (Cell("C", right[1].trace_arcs, "r1"),) + tuple(fams[1].cells(sc.f))
    vp = validate(Partition(cells + rest), sc.f, sc.curve)
    assert not vp.passed
    assert vp.report("L1").verdict == adm.VIOLATED


def test_refinement_keeps_cells_disjoint():
    sc = builtin("circ_cshape", n=12)
    vp = validate(sc.partition, sc.f, sc.curve)
    assert vp.passed
    assert sum(r.area for r in vp.cell_reports) == pytest.approx(sc.curve.area, rel=1e-6)
