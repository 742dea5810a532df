import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cutquad.catalog import (
    CASE3_CURVE,
    catalog,
    get_case,
    parabola_shifts,
    parabolas,
    read_catalog,
    scaled_monomial,
    write_catalog,
)
from cutquad.errors import EvaluationError, GeometryError, ParameterError, UnsupportedCaseError
from cutquad.geometry import (
    BackgroundMesh,
    BoundaryChain,
    CellStatus,
    LevelSet,
    classify_cell,
    classify_cells,
    edge_roots,
    line_segment,
)
from cutquad.poly import Poly2D

UNIT = (0.0, 0.0, 1.0, 1.0)
x, y = Poly2D.x(), Poly2D.y()


def poly_ls(p):
    return LevelSet.from_poly(p)


def test_classify_examples():
    assert classify_cell(poly_ls(y - 2), UNIT) == CellStatus.INSIDE
    assert classify_cell(poly_ls(y + 1), UNIT) == CellStatus.OUTSIDE
    assert classify_cell(poly_ls(y - 0.5), UNIT, grid=3) == CellStatus.CUT
    with pytest.raises(ParameterError):
        classify_cell(poly_ls(y), UNIT, grid=1)


def test_classify_nonfinite():
    ls = LevelSet(lambda a, b: np.log(a - 0.5 + 0 * b), lambda a, b: (a, b))
    with pytest.raises(EvaluationError), np.errstate(invalid="ignore", divide="ignore"):
        classify_cell(ls, UNIT)


def test_classify_monotone_in_grid():
    for tc in catalog():
        cells = np.array(BackgroundMesh.uniform(tc.box, 8).cells())
        coarse = classify_cells(tc.levelset, cells, grid=5)
        fine = classify_cells(tc.levelset, cells, grid=9)  # contains the grid-5 samples
        assert np.all(fine[coarse == CellStatus.CUT] == CellStatus.CUT)


def test_edge_roots_examples():
    r = edge_roots(poly_ls(y - 0.5), UNIT)
    assert r.left == [0.5] and r.right == [0.5] and r.bottom == [] and r.top == []
    r = edge_roots(get_case("case1").levelset, UNIT)
    assert r.left == pytest.approx([0.2], abs=1e-15) and r.right == pytest.approx([0.8], abs=1e-15)
    circle = poly_ls((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5) - 0.16)
    assert edge_roots(circle, UNIT) == ([], [], [], [])


def test_levelset_gradient_fd():
    h = 1e-6
    pts = np.random.default_rng(1).uniform(0, 1, (200, 2))
    for tc in catalog():
        ls = tc.levelset
        gx, gy = ls.grad(pts[:, 0], pts[:, 1])
        fx = (ls(pts[:, 0] + h, pts[:, 1]) - ls(pts[:, 0] - h, pts[:, 1])) / (2 * h)
        fy = (ls(pts[:, 0], pts[:, 1] + h) - ls(pts[:, 0], pts[:, 1] - h)) / (2 * h)
        g = np.hypot(gx, gy)
        # skip points next to a kink of a composed level set
        vals = np.stack([p(pts[:, 0], pts[:, 1]) for p in ls.parts]) if ls.parts else None
        ok = g >= 1e-3
        if vals is not None:
            ok &= np.abs(vals[0] - vals[1]) > 1e-4
        err = np.hypot(gx - fx, gy - fy)[ok] / g[ok]
        assert err.max() <= 1e-5, tc.id


def test_compose_semantics():
    a, b = poly_ls(x - 0.6), poly_ls(y - 0.6)
    inter, union = LevelSet.compose_max(a, b), LevelSet.compose_min(a, b)
    assert inter(0.5, 0.5) <= 0 and inter(0.7, 0.5) > 0
    assert union(0.7, 0.5) <= 0 and union(0.7, 0.7) > 0
    with pytest.raises(ParameterError):
        LevelSet.compose_max(a)


def test_mesh_cells():
    cells = BackgroundMesh.uniform((0, 0, 2, 1), 4).cells()
    assert len(cells) == 16
    assert sum(c.area for c in cells) == pytest.approx(2.0, rel=1e-15)
    assert {round(c.width, 15) for c in cells} == {0.5}
    with pytest.raises(ParameterError):
        BackgroundMesh.uniform(UNIT, 0)


def test_chain_validation():
    sq = [line_segment((0, 0), (1, 0)), line_segment((1, 0), (1, 1)),
          line_segment((1, 1), (0, 1)), line_segment((0, 1), (0, 0))]
    assert BoundaryChain(tuple(sq)).signed_area() == pytest.approx(1.0)
    with pytest.raises(GeometryError):
        BoundaryChain(tuple(sq[:3]))
    rev = [line_segment(s.end, s.start) for s in reversed(sq)]
    with pytest.raises(GeometryError):
        BoundaryChain(tuple(rev))


# ---------------------------------------------------------------------------
# catalog


def test_catalog_contents():
    ids = [tc.id for tc in catalog()]
    assert ids == ["case1", "case2", "case3", "disk", "parabolas"]
    degrees = {tc.id: tc.degree for tc in catalog()}
    assert degrees == {"case1": 1, "case2": 2, "case3": 5, "disk": 2, "parabolas": 2}
    for tc in catalog():
        assert ("parametric" in tc.forms) == (tc.id != "parabolas")
    with pytest.raises(UnsupportedCaseError, match="valid ids"):
        get_case("case9999")


def test_catalog_reference_areas():
    assert get_case("case1").reference_area == pytest.approx(0.5, rel=1e-15)
    assert get_case("case2").reference_area == pytest.approx(0.5, rel=1e-15)
    assert get_case("disk").reference_area == pytest.approx(math.pi * 0.16, rel=1e-14)


def test_case3_shape():
    g = CASE3_CURVE
    assert g(0.0) == pytest.approx(0.6, abs=1e-15) and g(0.8) == pytest.approx(1.0, abs=1e-12)
    t = np.linspace(0, 0.8, 2001)[:-1]
    assert np.all((g(t) > 0) & (g(t) < 1))
    curv = g.deriv().deriv()(t)
    assert np.any(curv > 0) and np.any(curv < 0)  # has an inflection
    assert len(get_case("case3").chain.segments) == 5


def test_chains_match_levelsets():
    from cutquad.bench import form_mismatches

    for tc in catalog():
        if tc.chain is not None:
            assert form_mismatches(tc) == 0, tc.id
            assert tc.chain.signed_area(512) == pytest.approx(tc.reference_area, rel=1e-4)


def test_scaled_monomial_examples():
    tc = get_case("case2")
    xmin, xmax, ymin, ymax = tc.bbox
    assert scaled_monomial(tc, 0)(0.3, 0.4) == 1.0
    assert scaled_monomial(tc, 3)(xmin, ymin) == 0.0
    assert scaled_monomial(tc, 5)(xmax, ymax) == pytest.approx(1.0, rel=1e-15)


def test_parabola_shifts():
    s = parabola_shifts()
    assert len(s) == 1000 and s[0] == 0.10 and s[-1] == 0.47
    assert np.diff(s) == pytest.approx(0.37 / 999, rel=1e-9)
    with pytest.raises(ParameterError):
        parabola_shifts(1)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.10, 0.47))
def test_parabola_lens(s):
    tc = parabolas(s)
    xl, xr, ymin, ymax = tc.bbox
    ls = tc.levelset
    assert ls(0.5 * (xl + xr), 0.5 * (ymin + ymax)) <= 0.0 or tc.reference_area < 0.2
    assert 0 < tc.reference_area < 1
    if xl > 0.0:  # lens end inside the box: outside just beyond it
        assert ls(xl - 1e-3, 0.5 * (ymin + ymax)) > 0
    assert abs(float(ls(xl, 0.5 * (ymin + ymax)))) < 1.0


def test_catalog_roundtrip(tmp_path):
    path = tmp_path / "cat.jsonl"
    write_catalog(path)
    back = read_catalog(path)
    assert [tc.id for tc in back] == [tc.id for tc in catalog()]
    pts = np.random.default_rng(2).uniform(0, 1, (100, 2))
    for a, b in zip(catalog(), back):
        assert a.references == b.references
        assert a.bbox == b.bbox and a.degree == b.degree
        np.testing.assert_array_equal(a.levelset(pts[:, 0], pts[:, 1]), b.levelset(pts[:, 0], pts[:, 1]))
    text = path.read_text()
    assert text.endswith("\n") and "\r" not in text
