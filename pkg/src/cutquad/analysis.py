"""Degree prediction for mapped integrands and convergence-rate fitting."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InsufficientDataError, ParameterError
from .poly import Poly1D, Poly2D, poly2d_compose, poly2d_jacobian_det

MACHINE_FLOOR = 2.22e-15


class MappingClass(enum.Enum):
    GENERAL = "General"
    ONE_CURVED_GENERIC = "OneCurvedGeneric"
    ONE_CURVED_AXIS_ALIGNED = "OneCurvedAxisAligned"
    DEGENERATE = "Degenerate"
    AFFINE = "Affine"


def predict_bidegree(cls: MappingClass, p: int, q: int) -> tuple[int, int]:
    """Bi-degree of ``f o T * det J`` for ``f`` of bi-degree (q, q) and curve degree ``p``."""
    if q < 0 or p < 0:
        raise ParameterError("degrees must be non-negative")
    if cls is MappingClass.AFFINE:
        return q, q
    if p < 1:
        raise ParameterError("curved mapping classes need p >= 1")
    if cls is MappingClass.GENERAL:
        d = 2 * p * (q + 1) - 1
        return d, d
    if cls is MappingClass.ONE_CURVED_GENERIC:
        return 2 * q + 1, 2 * p * (q + 1) - 1
    if cls is MappingClass.ONE_CURVED_AXIS_ALIGNED:
        return 2 * q + 1, q * p + q + p
    if cls is MappingClass.DEGENERATE:
        return 2 * q + 1, p * (q + 1) - 1
    raise ParameterError(f"unknown mapping class {cls!r}")


def max_degree(cls: MappingClass, p: int, q: int) -> int:
    return max(predict_bidegree(cls, p, q))


def required_points(p: int, q: int, conservative: bool = False) -> int:
    """Gauss points per direction for exact integration of degree-q integrands.

    The conservative count assumes a general mapping; otherwise only one
    curved edge with an axis-aligned parametrisation is assumed.
    """
    if p < 1 or q < 0:
        raise ParameterError("need p >= 1 and q >= 0")
    if conservative:
        return p * (q + 1)
    return math.ceil((q * p + q + p + 1) / 2)


# ---------------------------------------------------------------------------
# symbolic verification


def _rand_int(rng: np.random.Generator, size=None):
    # nonzero integers in [-9, 9]; small ranges cancel leading terms too often
    v = rng.integers(1, 10, size=size) * rng.choice([-1, 1], size=size)
    return v.astype(float)


def _rand_poly1d(rng, p: int) -> Poly1D:
    return Poly1D(_rand_int(rng, p + 1))


def random_mapping(
    cls: MappingClass, p: int, rng: np.random.Generator, straight_edge: bool = False
) -> tuple[Poly2D, Poly2D]:
    """Random integer-coefficient map ``(u, v) -> (x, y)`` of the given class.

    The generic one-curved class is a generic map of bi-degree (1, p). With
    ``straight_edge`` the edge ``u = 0`` is a straight segment instead, which
    lowers the Jacobian degree below the predicted bound.
    """
    u, v = Poly2D.x(), Poly2D.y()
    one = Poly2D.constant(1.0)
    if cls is MappingClass.GENERAL:
        return Poly2D(_rand_int(rng, (p + 1, p + 1))), Poly2D(_rand_int(rng, (p + 1, p + 1)))
    if cls is MappingClass.AFFINE:
        a, b, c, d = _rand_int(rng, 4)
        return a * u + c, b * v + d
    bx = Poly2D.from_poly1d(_rand_poly1d(rng, p), "y")
    by = Poly2D.from_poly1d(_rand_poly1d(rng, p), "y")
    if cls is MappingClass.ONE_CURVED_GENERIC:
        deg_a = 1 if straight_edge else p
        ax = Poly2D.from_poly1d(_rand_poly1d(rng, deg_a), "y")
        ay = Poly2D.from_poly1d(_rand_poly1d(rng, deg_a), "y")
        return (one - u) * ax + u * bx, (one - u) * ay + u * by
    if cls is MappingClass.ONE_CURVED_AXIS_ALIGNED:
        # curved edge with B_x = v; straight edge A = (0, v)
        return u * v, (one - u) * v + u * by
    if cls is MappingClass.DEGENERATE:
        # straight edge collapsed to the point (0, A0)
        a0 = float(_rand_int(rng))
        return u, (one - u) * a0 + u * by
    raise ParameterError(f"unknown mapping class {cls!r}")


def measured_bidegree(
    cls: MappingClass, p: int, q: int, rng: np.random.Generator, straight_edge: bool = False
) -> tuple[int, int]:
    """Exact bi-degree of ``x^q y^q o T * det J`` for a random mapping of the class."""
    tx, ty = random_mapping(cls, p, rng, straight_edge)
    c = np.zeros((q + 1, q + 1))
    c[q, q] = 1.0
    g = poly2d_compose(Poly2D(c), tx, ty) * poly2d_jacobian_det(tx, ty)
    return g.bidegree(rtol=0.0)


# ---------------------------------------------------------------------------
# convergence rates


@dataclass(frozen=True)
class ConvergenceFit:
    log_h: np.ndarray
    log_error: np.ndarray
    slope: float
    residual: float


def fit_rate(samples: Iterable[tuple[float, float]], floor: float = MACHINE_FLOOR) -> ConvergenceFit:
    """Least-squares slope of log(error) against log(1/n_ele).

    Errors at or below the machine floor are dropped first.
    """
    pts = [(float(n), float(e)) for n, e in samples]
    if any(n <= 0 for n, _ in pts):
        raise ParameterError("element counts must be positive")
    use = [(n, e) for n, e in pts if math.isfinite(e) and e > floor]
    if len(use) < 2 or len({n for n, _ in use}) < 2:
        raise InsufficientDataError(f"need >= 2 usable samples above the floor, got {len(use)}")
    lh = np.log([1.0 / n for n, _ in use])
    le = np.log([e for _, e in use])
    A = np.column_stack([lh, np.ones_like(lh)])
    coef, *_ = np.linalg.lstsq(A, le, rcond=None)
    res = float(np.linalg.norm(A @ coef - le))
    return ConvergenceFit(lh, le, float(coef[0]), res)
