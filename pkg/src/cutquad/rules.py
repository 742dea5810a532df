"""Reference quadrature rules, affine mapping and rule application.

Every rule generator in the package returns a :class:`QuadratureRule` holding
points and weights in physical coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, NamedTuple

import numpy as np

from .errors import DegenerateGeometryError, EvaluationError, ParameterError

MAX_GAUSS_POINTS = 64


class Rect(NamedTuple):
    """Axis-aligned rectangle ``[x0, x1] x [y0, y1]``."""

    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return 0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1)

    def corners(self) -> np.ndarray:
        """Corners in counterclockwise order starting at the lower left."""
        return np.array(
            [[self.x0, self.y0], [self.x1, self.y0], [self.x1, self.y1], [self.x0, self.y1]]
        )

    def children(self) -> tuple["Rect", "Rect", "Rect", "Rect"]:
        """Bisection in both directions, in Morton (Z) order."""
        xm, ym = self.center
        return (
            Rect(self.x0, self.y0, xm, ym),
            Rect(xm, self.y0, self.x1, ym),
            Rect(self.x0, ym, xm, self.y1),
            Rect(xm, ym, self.x1, self.y1),
        )


def as_rect(box) -> Rect:
    r = Rect(*(float(v) for v in box))
    if not (r.width > 0 and r.height > 0) or not all(map(math.isfinite, r)):
        raise ParameterError(f"degenerate box {tuple(box)}")
    return r


def _frozen(a, shape_tail) -> np.ndarray:
    arr = np.array(a, dtype=float).reshape((-1,) + shape_tail)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray
    provenance: str = "unknown"

    def __post_init__(self):
        pts = _frozen(self.points, (2,))
        wts = _frozen(self.weights, ())
        if len(pts) != len(wts):
            raise ParameterError(f"{len(pts)} points but {len(wts)} weights")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(wts))):
            raise ParameterError("quadrature rule with non-finite entries")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))

    @classmethod
    def empty(cls, provenance: str = "empty") -> "QuadratureRule":
        return cls(np.zeros((0, 2)), np.zeros(0), provenance)

    @classmethod
    def concat(cls, rules: Iterable["QuadratureRule"], provenance: str | None = None):
        rules = list(rules)
        if not rules:
            return cls.empty(provenance or "empty")
        if provenance is None:
            provenance = rules[0].provenance
        return cls(
            np.concatenate([r.points for r in rules]),
            np.concatenate([r.weights for r in rules]),
            provenance,
        )


@dataclass(frozen=True)
class Gauss1D:
    n: int
    nodes: np.ndarray
    weights: np.ndarray = field(repr=False)


def _legendre(n: int, x: float) -> tuple[float, float]:
    """P_n(x) and P_n'(x) by the three-term recurrence."""
    p0, p1 = 1.0, x
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


def _legendre_root(n: int, k: int) -> float:
    # k-th root counted from +1; Bruns' bounds on its angle give the bracket
    lo = math.cos(k * math.pi / (n + 0.5))
    hi = math.cos((k - 0.5) * math.pi / (n + 0.5))
    plo, _ = _legendre(n, lo)
    x = math.cos((k - 0.25) * math.pi / (n + 0.5))
    for _ in range(100):
        p, dp = _legendre(n, x)
        if p == 0.0:
            return x
        if (p > 0) == (plo > 0):
            lo, plo = x, p
        else:
            hi = x
        step = p / dp
        x_new = x - step
        if not (min(lo, hi) < x_new < max(lo, hi)):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1e-15:
            return x_new
        x = x_new
    return x


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> Gauss1D:
    """n-point Gauss-Legendre rule on [-1, 1] (exact up to degree 2n-1)."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_GAUSS_POINTS:
        raise ParameterError(f"Gauss order must be in 1..{MAX_GAUSS_POINTS}, got {n!r}")
    n = int(n)
    half = n // 2
    pos = np.empty(half)
    wpos = np.empty(half)
    for k in range(1, half + 1):
        x = _legendre_root(n, k)
        _, dp = _legendre(n, x)
        pos[k - 1] = x
        wpos[k - 1] = 2.0 / ((1.0 - x * x) * dp * dp)
    if n % 2:
        _, dp0 = _legendre(n, 0.0)
        mid_w = 2.0 / (dp0 * dp0)
        nodes = np.concatenate([-pos, [0.0], pos[::-1]])
        weights = np.concatenate([wpos, [mid_w], wpos[::-1]])
    else:
        nodes = np.concatenate([-pos, pos[::-1]])
        weights = np.concatenate([wpos, wpos[::-1]])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return Gauss1D(n, nodes, weights)


def gauss_interval(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss nodes and weights mapped onto [a, b]."""
    g = gauss_legendre(n)
    half = 0.5 * (b - a)
    return a + half * (g.nodes + 1.0), half * g.weights


def tensor_rule(nx: int, ny: int, box) -> QuadratureRule:
    box = as_rect(box)
    xs, wx = gauss_interval(nx, box.x0, box.x1)
    ys, wy = gauss_interval(ny, box.y0, box.y1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    W = np.outer(wx, wy)
    return QuadratureRule(np.column_stack([X.ravel(), Y.ravel()]), W.ravel(), "gauss")


@dataclass(frozen=True)
class AffineMap2D:
    linear: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "linear", np.asarray(self.linear, dtype=float).reshape(2, 2))
        object.__setattr__(self, "offset", np.asarray(self.offset, dtype=float).reshape(2))

    @property
    def det(self) -> float:
        a = self.linear
        return float(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(pts, dtype=float) @ self.linear.T + self.offset


def map_rule(rule: QuadratureRule, amap: AffineMap2D) -> QuadratureRule:
    det = amap.det
    if det == 0.0 or not math.isfinite(det):
        raise ParameterError("affine map is not invertible")
    return QuadratureRule(amap(rule.points), rule.weights * abs(det), rule.provenance)


def _duffy_reference(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    u, wu = gauss_interval(n, 0.0, 1.0)
    U, V = np.meshgrid(u, u, indexing="ij")
    W = np.outer(wu * u, wu)
    return U.ravel(), V.ravel(), W.ravel()


def triangles_rule(n: int, triangles: np.ndarray, provenance: str = "triangle") -> QuadratureRule:
    """Collapsed-tensor rules on a stack of triangles, shape (T, 3, 2).

    No degeneracy check; zero-area triangles simply get zero weights.
    """
    tri = np.asarray(triangles, dtype=float).reshape(-1, 3, 2)
    if len(tri) == 0:
        return QuadratureRule.empty(provenance)
    U, V, W = _duffy_reference(n)
    v0, v1, v2 = tri[:, 0], tri[:, 1], tri[:, 2]
    e1, e2 = v1 - v0, v2 - v1
    twice_area = np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    pts = (
        v0[:, None, :]
        + U[None, :, None] * e1[:, None, :]
        + (U * V)[None, :, None] * e2[:, None, :]
    )
    wts = twice_area[:, None] * W[None, :]
    return QuadratureRule(pts.reshape(-1, 2), wts.ravel(), provenance)


def triangle_rule(n: int, vertices) -> QuadratureRule:
    """Rule on one triangle via the Duffy collapse of an n x n Gauss rule.

    Exact for total degree 2n-2.
    """
    tri = np.asarray(vertices, dtype=float).reshape(3, 2)
    e1, e2 = tri[1] - tri[0], tri[2] - tri[0]
    if abs(e1[0] * e2[1] - e1[1] * e2[0]) * 0.5 <= 1e-300:
        raise DegenerateGeometryError(f"collinear triangle vertices {tri.tolist()}")
    gauss_legendre(n)
    return triangles_rule(n, tri[None])


def evaluate_field(f: Callable, points: np.ndarray) -> np.ndarray:
    """Vectorised evaluation of ``f(x, y)`` with a finiteness check."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    vals = np.broadcast_to(np.asarray(f(points[:, 0], points[:, 1]), dtype=float), len(points))
    bad = ~np.isfinite(vals)
    if bad.any():
        p = tuple(points[np.argmax(bad)])
        raise EvaluationError(f"integrand is not finite at {p}", point=p)
    return vals


def integrate(rule: QuadratureRule, f: Callable) -> float:
    """Sum of ``w_i f(x_i)``; ``f`` takes coordinate arrays ``(x, y)``."""
    if len(rule) == 0:
        return 0.0
    return float(np.sum(rule.weights * evaluate_field(f, rule.points)))
