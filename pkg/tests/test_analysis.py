import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cutquad.analysis import (
    MACHINE_FLOOR,
    MappingClass,
    fit_rate,
    max_degree,
    measured_bidegree,
    predict_bidegree,
    random_mapping,
    required_points,
)
from cutquad.errors import InsufficientDataError, ParameterError
from cutquad.poly import poly2d_jacobian_det


def test_predict_examples():
    assert max_degree(MappingClass.GENERAL, 5, 5) == 59
    assert predict_bidegree(MappingClass.AFFINE, 1, 3) == (3, 3)
    assert max_degree(MappingClass.DEGENERATE, 5, 5) == 29
    assert max_degree(MappingClass.ONE_CURVED_AXIS_ALIGNED, 5, 5) == 35
    assert predict_bidegree(MappingClass.ONE_CURVED_GENERIC, 2, 1) == (3, 7)
    with pytest.raises(ParameterError):
        predict_bidegree(MappingClass.GENERAL, 0, 1)


def test_required_points_examples():
    assert required_points(2, 6) == 11
    assert required_points(1, 0) == 1
    assert required_points(2, 6, conservative=True) == 14


def test_required_points_ordering():
    for p in range(1, 11):
        for q in range(0, 11):
            assert required_points(p, q) <= required_points(p, q, conservative=True)


@pytest.mark.parametrize("cls", list(MappingClass))
def test_degree_prediction_is_upper_bound(cls):
    rng = np.random.default_rng(11)
    hits = total = 0
    for p in (1, 2, 3):
        for q in (1, 2, 3):
            for _ in range(10):
                got = measured_bidegree(cls, p, q, rng)
                want = predict_bidegree(cls, p, q)
                assert got[0] <= want[0] and got[1] <= want[1]
                hits += got == want
                total += 1
    assert hits >= 0.9 * total


def test_straight_edge_generic_map_stays_below_bound():
    rng = np.random.default_rng(5)
    for p in (2, 3):
        for q in (1, 2):
            got = measured_bidegree(MappingClass.ONE_CURVED_GENERIC, p, q, rng, straight_edge=True)
            want = predict_bidegree(MappingClass.ONE_CURVED_GENERIC, p, q)
            assert got[0] <= want[0] and got[1] <= want[1]


def test_mapping_class_structure():
    rng = np.random.default_rng(0)
    tx, ty = random_mapping(MappingClass.AFFINE, 1, rng)
    assert poly2d_jacobian_det(tx, ty).bidegree() == (0, 0)
    tx, ty = random_mapping(MappingClass.ONE_CURVED_AXIS_ALIGNED, 3, rng)
    assert tx(1.0, 0.37) == pytest.approx(0.37)  # curved edge has x = v
    tx, ty = random_mapping(MappingClass.DEGENERATE, 3, rng)
    assert ty(0.0, 0.1) == ty(0.0, 0.9)  # edge u = 0 collapses to a point


def test_fit_rate_examples():
    f = fit_rate([(1, 1e-2), (2, 2.5e-3), (4, 6.25e-4)])
    assert abs(f.slope - 2.0) <= 1e-12
    assert abs(fit_rate([(1, 1e-3), (2, 1e-3), (4, 1e-3)]).slope) <= 1e-12
    assert fit_rate([(2, 1e-3), (4, 1.25e-4)]).slope == pytest.approx(3.0, rel=1e-12)


def test_fit_rate_floor_and_errors():
    f = fit_rate([(1, 1e-4), (2, 1e-6), (4, MACHINE_FLOOR), (8, 1e-17)])
    assert len(f.log_h) == 2 and f.slope == pytest.approx(math.log2(100), rel=1e-12)
    with pytest.raises(InsufficientDataError):
        fit_rate([(1, 1e-3), (2, 1e-16)])
    with pytest.raises(InsufficientDataError):
        fit_rate([(1, 1e-3)])


@settings(max_examples=50, deadline=None)
@given(st.floats(0.5, 8.0), st.floats(1e-6, 1.0))
def test_fit_rate_recovers_power_law(kappa, c):
    ns = [1, 2, 4, 8]
    samples = [(n, c * n**-kappa) for n in ns if c * n**-kappa > 1e-14]
    if len(samples) < 2:
        return
    assert fit_rate(samples).slope == pytest.approx(kappa, rel=1e-9)
