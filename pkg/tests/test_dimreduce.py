import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from cutquad.catalog import catalog, get_case, parabolas, scaled_monomial
from cutquad.dimreduce import GreenConfig, HeightConfig, green_rule, height_rule
from cutquad.errors import MethodFailure, ParameterError
from cutquad.geometry import BoundaryChain, LevelSet, line_segment
from cutquad.poly import Poly2D, RationalBezier
from cutquad.rules import integrate, tensor_rule

UNIT = (0.0, 0.0, 1.0, 1.0)
x, y = Poly2D.x(), Poly2D.y()


def rel(v, ref):
    return abs(v - ref) / abs(ref)


def polygon_chain(pts):
    n = len(pts)
    return BoundaryChain(tuple(line_segment(pts[k], pts[(k + 1) % n]) for k in range(n)))


# ---------------------------------------------------------------------------
# height functions


def test_height_inside_bit_identical():
    r = height_rule(LevelSet.from_poly(y - 2), UNIT, HeightConfig(3))
    ref = tensor_rule(3, 3, UNIT)
    assert np.array_equal(r.points, ref.points) and np.array_equal(r.weights, ref.weights)


def test_height_outside_empty():
    assert len(height_rule(LevelSet.from_poly(y + 1), UNIT, HeightConfig(2))) == 0


def test_height_examples():
    tc1, tc2 = get_case("case1"), get_case("case2")
    assert rel(height_rule(tc1.levelset, UNIT, HeightConfig(1)).total_weight, 0.5) <= 1e-14
    assert rel(height_rule(tc2.levelset, UNIT, HeightConfig(2)).total_weight, 0.5) <= 1e-13
    r = height_rule(tc2.levelset, UNIT, HeightConfig(11))
    assert rel(integrate(r, scaled_monomial(tc2, 6)), tc2.reference(6)) <= 1e-12


@pytest.mark.parametrize("n", [1, 2, 4])
def test_height_point_counts(n):
    assert len(height_rule(get_case("case2").levelset, UNIT, HeightConfig(n))) == n * n
    k = len(height_rule(get_case("case3").levelset, UNIT, HeightConfig(n)))
    assert 2 * n * n <= k <= 4 * n * n


@pytest.mark.parametrize("case", ["case1", "case2", "case3", "disk", "parabolas"])
def test_height_positive_and_deterministic(case):
    tc = get_case(case)
    a = height_rule(tc.levelset, tc.box, HeightConfig(3))
    b = height_rule(tc.levelset, tc.box, HeightConfig(3))
    assert np.all(a.weights > 0)
    assert np.array_equal(a.points, b.points) and np.array_equal(a.weights, b.weights)
    assert np.all(tc.levelset(a.points[:, 0], a.points[:, 1]) <= 1e-12)


def test_height_disk_converges():
    disk = get_case("disk")
    errs = [rel(height_rule(disk.levelset, UNIT, HeightConfig(n)).total_weight, disk.reference_area)
            for n in (2, 4, 8)]
    assert errs[0] > errs[1] > errs[2] and errs[2] <= 1e-9


@settings(max_examples=15, deadline=None)
@given(st.floats(0.10, 0.47))
def test_height_parabola_lens_single_cell(s):
    tc = parabolas(s)
    r = height_rule(tc.levelset, UNIT, HeightConfig(3))
    assert rel(r.total_weight, tc.reference_area) <= 1e-12


def test_height_depth_cap():
    tc = get_case("disk")  # no monotone direction on the whole square
    with pytest.raises(MethodFailure) as err:
        height_rule(tc.levelset, UNIT, HeightConfig(2, max_depth=0))
    assert err.value.cell is not None


def test_height_config_guards():
    with pytest.raises(ParameterError):
        HeightConfig(0)
    with pytest.raises(ParameterError):
        HeightConfig(2, m=3)


# ---------------------------------------------------------------------------
# Green's theorem


def test_green_unit_square():
    chain = polygon_chain([(0, 0), (1, 0), (1, 1), (0, 1)])
    r = green_rule(chain, GreenConfig(1, 1))
    assert r.total_weight == 1.0
    assert len(r) == 2  # horizontal edges contribute no points


def test_green_case1():
    r = green_rule(get_case("case1").chain, GreenConfig(1, 1))
    assert rel(r.total_weight, 0.5) <= 1e-14


def test_green_disk():
    tc = get_case("disk")
    r = green_rule(tc.chain, GreenConfig(10, 10))
    assert rel(r.total_weight, math.pi * 0.16) <= 1e-10


def test_green_control_point_constant():
    # C = min control-point x: antiderivative points never lie left of it
    tc = get_case("disk")
    r = green_rule(tc.chain, GreenConfig(4, 4))
    assert r.points[:, 0].min() >= tc.chain.control_points[:, 0].min()


def test_green_zero_length_segment_warns():
    pts = [(0, 0), (1, 0), (1, 1), (0, 1)]
    segs = [line_segment(pts[k], pts[(k + 1) % 4]) for k in range(4)]
    segs.insert(2, RationalBezier([(1, 1), (1, 1)]))
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        r = green_rule(BoundaryChain(tuple(segs)), GreenConfig(1, 1))
    assert r.total_weight == 1.0
    assert any("zero-length" in str(w.message) for w in rec)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.integers(3, 12))
def test_green_convex_polygons(seed, k):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-2, 2, (k, 2))
    hull = ConvexHull(pts)
    poly = pts[hull.vertices]  # counterclockwise
    if hull.volume < 1e-3:
        return
    r = green_rule(polygon_chain([tuple(p) for p in poly]), GreenConfig(1, 1))
    assert rel(r.total_weight, hull.volume) <= 1e-12


@pytest.mark.parametrize("q", range(0, 7))
def test_exactness_threshold_case1(q):
    tc = get_case("case1")
    f = scaled_monomial(tc, q)
    n = q + 1
    assert rel(integrate(height_rule(tc.levelset, UNIT, HeightConfig(n)), f), tc.reference(q)) <= 1e-12
    assert rel(integrate(green_rule(tc.chain, GreenConfig.from_n(n)), f), tc.reference(q)) <= 1e-12


def test_green_deterministic():
    for tc in catalog():
        if tc.chain is None:
            continue
        a, b = green_rule(tc.chain, GreenConfig(3, 3)), green_rule(tc.chain, GreenConfig(3, 3))
        assert np.array_equal(a.points, b.points) and np.array_equal(a.weights, b.weights)


def test_green_config_guards():
    with pytest.raises(ParameterError):
        GreenConfig(0, 2)
    assert GreenConfig.from_n(4) == GreenConfig(4, 4)
