import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cutquad.errors import DegenerateGeometryError, EvaluationError, ParameterError
from cutquad.rules import (
    AffineMap2D,
    QuadratureRule,
    gauss_legendre,
    integrate,
    map_rule,
    tensor_rule,
    triangle_rule,
)

UNIT = (0.0, 0.0, 1.0, 1.0)


def test_gauss_closed_forms():
    g1 = gauss_legendre(1)
    assert g1.nodes.tolist() == [0.0] and g1.weights.tolist() == [2.0]
    g2 = gauss_legendre(2)
    np.testing.assert_allclose(g2.nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)], rtol=0, atol=2e-16)
    np.testing.assert_allclose(g2.weights, [1.0, 1.0], rtol=0, atol=1e-15)
    g3 = gauss_legendre(3)
    np.testing.assert_allclose(g3.nodes, [-math.sqrt(0.6), 0.0, math.sqrt(0.6)], atol=1e-15)
    np.testing.assert_allclose(g3.weights, [5 / 9, 8 / 9, 5 / 9], atol=1e-15)


@pytest.mark.parametrize("n", [0, 65, -3])
def test_gauss_range(n):
    with pytest.raises(ParameterError):
        gauss_legendre(n)


@pytest.mark.parametrize("n", range(1, 21))
def test_gauss_invariants(n):
    g = gauss_legendre(n)
    assert np.all(np.diff(g.nodes) > 0)
    np.testing.assert_allclose(g.nodes, -g.nodes[::-1], atol=1e-15)
    np.testing.assert_allclose(g.weights, g.weights[::-1], atol=1e-15)
    assert np.all(g.weights > 0)
    assert abs(g.weights.sum() - 2.0) <= 1e-14
    # even power 2n-2 is exact too, compare to mpmath-free closed form 2/(2n-1)
    assert abs(np.dot(g.weights, g.nodes ** (2 * n - 2)) - 2.0 / (2 * n - 1)) <= 1e-13


def test_gauss_agrees_with_numpy():
    for n in (5, 17, 40, 64):
        x, w = np.polynomial.legendre.leggauss(n)
        g = gauss_legendre(n)
        np.testing.assert_allclose(g.nodes, x, atol=1e-14)
        np.testing.assert_allclose(g.weights, w, atol=1e-14)


def test_tensor_rule_examples():
    r = tensor_rule(1, 1, UNIT)
    assert r.points.tolist() == [[0.5, 0.5]] and r.weights.tolist() == [1.0]
    assert len(tensor_rule(2, 2, UNIT)) == 4
    assert tensor_rule(2, 2, UNIT).total_weight == pytest.approx(1.0, abs=1e-15)
    assert tensor_rule(2, 2, (0, 0, 0.5, 0.5)).total_weight == pytest.approx(0.25, abs=1e-15)


def test_tensor_rule_exactness():
    r = tensor_rule(3, 2, (0.0, -1.0, 2.0, 1.0))
    # x^5 y^3 is odd in y over [-1, 1]; x^5 y^2 -> 64/6 * 2/3
    assert integrate(r, lambda x, y: x**5 * y**2) == pytest.approx(64 / 6 * 2 / 3, rel=1e-14)


def test_tensor_rule_degenerate_box():
    with pytest.raises(ParameterError):
        tensor_rule(2, 2, (0.0, 0.0, 0.0, 1.0))


def test_map_rule_examples():
    r = tensor_rule(1, 1, UNIT)
    scaled = map_rule(r, AffineMap2D(np.eye(2) * 0.5, [0, 0]))
    assert scaled.weights.tolist() == [0.25]
    ident = map_rule(r, AffineMap2D(np.eye(2), [0, 0]))
    assert np.array_equal(ident.points, r.points) and np.array_equal(ident.weights, r.weights)
    rot = map_rule(tensor_rule(3, 3, UNIT), AffineMap2D([[0, -1], [1, 0]], [0, 0]))
    assert rot.total_weight == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ParameterError):
        map_rule(r, AffineMap2D([[1, 2], [2, 4]], [0, 0]))


@settings(max_examples=60, deadline=None)
@given(
    st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(-np.pi, np.pi),
    st.floats(-2, 2), st.floats(-2, 2), st.floats(-1, 1),
)
def test_map_rule_change_of_variables(sx, sy, angle, ox, oy, shear):
    lin = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]]) @ np.array(
        [[sx, shear], [0.0, sy]]
    )
    det = abs(np.linalg.det(lin))
    if not 0.1 <= det <= 10:
        return
    amap = AffineMap2D(lin, [ox, oy])
    ref = tensor_rule(4, 4, UNIT)
    mapped = map_rule(ref, amap)
    inv = np.linalg.inv(lin)

    def f(x, y):
        return 1 + x + x * y**2

    def pulled(u, v):
        return f(*amap(np.column_stack([u, v])).T)

    # int_T(K) f = |det| int_K f o T
    lhs = integrate(mapped, f)
    rhs = det * integrate(ref, pulled)
    assert lhs == pytest.approx(rhs, rel=1e-13, abs=1e-13)
    back = inv @ (mapped.points - [ox, oy]).T
    np.testing.assert_allclose(back.T, ref.points, atol=1e-12)


def test_triangle_examples():
    tri = [(0, 0), (1, 0), (0, 1)]
    assert triangle_rule(1, tri).total_weight == pytest.approx(0.5, abs=1e-16)
    r = triangle_rule(2, [(0.1, 0.3), (2.0, -0.5), (0.7, 1.9)])
    area = 0.5 * abs((2.0 - 0.1) * (1.9 - 0.3) - (-0.5 - 0.3) * (0.7 - 0.1))
    assert r.total_weight == pytest.approx(area, rel=1e-15)
    assert integrate(triangle_rule(3, tri), lambda x, y: x) == pytest.approx(1 / 6, rel=1e-14)
    with pytest.raises(DegenerateGeometryError):
        triangle_rule(2, [(0, 0), (1, 1), (2, 2)])


@pytest.mark.parametrize("n", [2, 3, 4])
def test_triangle_total_degree(n):
    # monomial x^a y^b over the reference triangle: a! b! / (a + b + 2)!
    r = triangle_rule(n, [(0, 0), (1, 0), (0, 1)])
    for a in range(2 * n - 1):
        for b in range(2 * n - 1 - a):
            exact = math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)
            assert integrate(r, lambda x, y: x**a * y**b) == pytest.approx(exact, rel=1e-13)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=6, max_size=6))
def test_triangle_shoelace(c):
    v = np.array(c).reshape(3, 2)
    area = 0.5 * abs((v[1, 0] - v[0, 0]) * (v[2, 1] - v[0, 1]) - (v[2, 0] - v[0, 0]) * (v[1, 1] - v[0, 1]))
    if area < 1e-3:
        return
    assert triangle_rule(1, v).total_weight == pytest.approx(area, rel=1e-13)


def test_integrate_examples():
    r = tensor_rule(2, 2, UNIT)
    assert integrate(r, lambda x, y: np.ones_like(x)) == r.total_weight
    assert integrate(QuadratureRule.empty(), lambda x, y: x) == 0.0
    assert integrate(r, lambda x, y: x**3 * y**3) == pytest.approx(1 / 16, rel=1e-15)


def test_integrate_nonfinite():
    r = tensor_rule(2, 2, UNIT)
    with pytest.raises(EvaluationError) as err:
        with np.errstate(divide="ignore"):
            integrate(r, lambda x, y: 1.0 / (x - r.points[2, 0]))
    assert err.value.point is not None


def test_rule_invariants():
    a, b = tensor_rule(2, 2, UNIT), tensor_rule(3, 1, (1, 0, 2, 3))
    c = QuadratureRule.concat([a, b])
    assert c.total_weight == pytest.approx(a.total_weight + b.total_weight, rel=1e-15)
    assert len(c) == len(a) + len(b)
    with pytest.raises(ParameterError):
        QuadratureRule(np.zeros((2, 2)), np.zeros(3))
    with pytest.raises(ParameterError):
        QuadratureRule(np.zeros((1, 2)), np.array([np.nan]))
    with pytest.raises(ValueError):
        a.weights[0] = 3.0
