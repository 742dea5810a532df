"""Polynomials in one and two variables, rational Bezier curves, 1D root finding."""
from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import EvaluationError, NumericRangeError, ParameterError

ZERO_RTOL = 1e-12
DEFAULT_ROOT_SAMPLES = 32


def _as_coeffs(c) -> np.ndarray:
    arr = np.atleast_1d(np.array(c, dtype=float))
    if arr.ndim != 1:
        raise ParameterError("1D polynomial coefficients must be a flat sequence")
    return arr


class Poly1D:
    """Polynomial in one variable, coefficients in ascending powers."""

    __slots__ = ("coef",)

    def __init__(self, coef: Sequence[float]):
        c = _as_coeffs(coef)
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if len(nz) else np.zeros(1)
        c.setflags(write=False)
        self.coef = c

    @property
    def degree(self) -> int:
        """Degree; the zero polynomial reports 0."""
        return len(self.coef) - 1

    def is_zero(self) -> bool:
        return not np.any(self.coef)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        acc = np.zeros_like(t) + self.coef[-1]
        for c in self.coef[-2::-1]:
            acc = acc * t + c
        return acc

    def __add__(self, other):
        other = _lift1(other)
        n = max(len(self.coef), len(other.coef))
        out = np.zeros(n)
        out[: len(self.coef)] += self.coef
        out[: len(other.coef)] += other.coef
        return Poly1D(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly1D(-self.coef)

    def __sub__(self, other):
        return self + (-_lift1(other))

    def __rsub__(self, other):
        return _lift1(other) - self

    def __mul__(self, other):
        other = _lift1(other)
        return Poly1D(np.convolve(self.coef, other.coef))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Poly1D([1.0])
        for _ in range(int(k)):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, Poly1D):
            return NotImplemented
        return np.array_equal(self.coef, other.coef)

    def __repr__(self):
        return f"Poly1D({self.coef.tolist()})"

    def deriv(self) -> "Poly1D":
        if len(self.coef) == 1:
            return Poly1D([0.0])
        return Poly1D(self.coef[1:] * np.arange(1, len(self.coef)))

    def antiderivative(self) -> "Poly1D":
        if self.is_zero():
            return Poly1D([0.0])
        return Poly1D(np.concatenate([[0.0], self.coef / np.arange(1, len(self.coef) + 1)]))

    def compose(self, inner: "Poly1D") -> "Poly1D":
        """``self(inner(t))`` by Horner's scheme on polynomials."""
        inner = _lift1(inner)
        acc = Poly1D([self.coef[-1]])
        for c in self.coef[-2::-1]:
            acc = acc * inner + c
        return acc

    def integral(self, a: float, b: float) -> float:
        F = self.antiderivative()
        return float(F(b) - F(a))


def _lift1(p) -> Poly1D:
    return p if isinstance(p, Poly1D) else Poly1D([float(p)])


def poly1d_antiderivative(p: Poly1D) -> Poly1D:
    return p.antiderivative()


class Poly2D:
    """Polynomial in (x, y); ``coef[i, j]`` multiplies ``x**i * y**j``."""

    __slots__ = ("coef", "_rows")

    def __init__(self, coef):
        c = np.array(coef, dtype=float)
        if c.ndim == 0:
            c = c.reshape(1, 1)
        if c.ndim != 2:
            raise ParameterError("2D polynomial coefficients must be a matrix")
        c.setflags(write=False)
        self.coef = c
        # Horner order: highest x-power first, each row highest y-power first
        self._rows = [[float(v) for v in row[::-1]] for row in c[::-1]]

    @classmethod
    def constant(cls, value: float) -> "Poly2D":
        return cls([[value]])

    @classmethod
    def x(cls) -> "Poly2D":
        return cls([[0.0], [1.0]])

    @classmethod
    def y(cls) -> "Poly2D":
        return cls([[0.0, 1.0]])

    @classmethod
    def from_poly1d(cls, p: Poly1D, var: str = "x") -> "Poly2D":
        c = np.asarray(p.coef)
        return cls(c[:, None] if var == "x" else c[None, :])

    def __call__(self, x, y):
        # nested Horner; much cheaper than polyval2d for scalar arguments
        scalar = np.ndim(x) == 0 and np.ndim(y) == 0
        if scalar:
            x, y = float(x), float(y)
        else:
            x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        c = self._rows
        acc = 0.0
        for row in c:
            r = row[0]
            for cj in row[1:]:
                r = r * y + cj
            acc = acc * x + r
        if scalar:
            return float(acc)
        shape = np.broadcast_shapes(np.shape(x), np.shape(y))
        return acc if np.shape(acc) == shape else np.zeros(shape) + acc

    def _padded(self, shape) -> np.ndarray:
        out = np.zeros(shape)
        out[: self.coef.shape[0], : self.coef.shape[1]] = self.coef
        return out

    def __add__(self, other):
        other = _lift2(other)
        shape = tuple(max(a, b) for a, b in zip(self.coef.shape, other.coef.shape))
        return Poly2D(self._padded(shape) + other._padded(shape))

    __radd__ = __add__

    def __neg__(self):
        return Poly2D(-self.coef)

    def __sub__(self, other):
        return self + (-_lift2(other))

    def __rsub__(self, other):
        return _lift2(other) - self

    def __mul__(self, other):
        other = _lift2(other)
        a, b = self.coef, other.coef
        out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1))
        for i, j in zip(*np.nonzero(a)):
            out[i : i + b.shape[0], j : j + b.shape[1]] += a[i, j] * b
        return Poly2D(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Poly2D):
            return NotImplemented
        shape = tuple(max(a, b) for a, b in zip(self.coef.shape, other.coef.shape))
        return np.array_equal(self._padded(shape), other._padded(shape))

    def __repr__(self):
        return f"Poly2D({self.coef.tolist()})"

    def dx(self) -> "Poly2D":
        c = self.coef
        if c.shape[0] == 1:
            return Poly2D(np.zeros((1, c.shape[1])))
        return Poly2D(c[1:] * np.arange(1, c.shape[0])[:, None])

    def dy(self) -> "Poly2D":
        c = self.coef
        if c.shape[1] == 1:
            return Poly2D(np.zeros((c.shape[0], 1)))
        return Poly2D(c[:, 1:] * np.arange(1, c.shape[1])[None, :])

    def bidegree(self, rtol: float = ZERO_RTOL) -> tuple[int, int]:
        """Largest x- and y-powers with a coefficient above ``rtol * max|c|``."""
        mag = np.abs(self.coef)
        top = mag.max() if mag.size else 0.0
        if top == 0.0:
            return 0, 0
        rows, cols = np.nonzero(mag > rtol * top)
        return int(rows.max()), int(cols.max())

    def is_zero(self, rtol: float = 0.0) -> bool:
        return not np.any(np.abs(self.coef) > rtol)

    def restrict(self, var: str, value: float) -> Poly1D:
        """Fix one variable; returns a polynomial in the other one."""
        c = self.coef
        if var == "x":
            return Poly1D(np.polynomial.polynomial.polyval(value, c))
        return Poly1D(np.polynomial.polynomial.polyval(value, c.T))


def _lift2(p) -> Poly2D:
    return p if isinstance(p, Poly2D) else Poly2D.constant(float(p))


def poly2d_compose(f: Poly2D, tx: Poly2D, ty: Poly2D) -> Poly2D:
    """Expand ``f(tx(u, v), ty(u, v))`` coefficient by coefficient."""
    cf = f.coef
    with np.errstate(over="ignore", invalid="ignore"):
        px = [Poly2D.constant(1.0)]
        for _ in range(1, cf.shape[0]):
            px.append(px[-1] * tx)
        py = [Poly2D.constant(1.0)]
        for _ in range(1, cf.shape[1]):
            py.append(py[-1] * ty)
        terms = [(cf[i, j], px[i] * py[j]) for i, j in zip(*np.nonzero(cf))]
    if not terms:
        return Poly2D.constant(0.0)
    shape = tuple(max(t.coef.shape[k] for _, t in terms) for k in (0, 1))
    # Kahan-compensated accumulation over the expanded terms
    total = np.zeros(shape)
    comp = np.zeros(shape)
    with np.errstate(over="ignore", invalid="ignore"):
        for c, t in terms:
            y = c * t._padded(shape) - comp
            s = total + y
            comp = (s - total) - y
            total = s
    if not np.all(np.isfinite(total)) or np.abs(total).max() > 1e300:
        raise NumericRangeError("composed coefficients exceed 1e300")
    return Poly2D(total)


def poly2d_jacobian_det(tx: Poly2D, ty: Poly2D) -> Poly2D:
    """``d(tx)/du * d(ty)/dv - d(tx)/dv * d(ty)/du`` with (u, v) as (x, y)."""
    return tx.dx() * ty.dy() - tx.dy() * ty.dx()


class RationalBezier:
    """Rational Bezier curve in the plane, parameter ``s`` in [0, 1]."""

    __slots__ = ("control_points", "weights")

    def __init__(self, control_points, weights=None):
        cp = np.array(control_points, dtype=float).reshape(-1, 2)
        if len(cp) < 2:
            raise ParameterError("a Bezier curve needs at least 2 control points")
        w = np.ones(len(cp)) if weights is None else np.array(weights, dtype=float).ravel()
        if len(w) != len(cp):
            raise ParameterError("one weight per control point required")
        if not np.all(w > 0):
            raise ParameterError("Bezier weights must be positive")
        cp.setflags(write=False)
        w.setflags(write=False)
        self.control_points = cp
        self.weights = w

    @property
    def degree(self) -> int:
        return len(self.control_points) - 1

    @property
    def start(self) -> np.ndarray:
        return self.control_points[0]

    @property
    def end(self) -> np.ndarray:
        return self.control_points[-1]

    @property
    def is_polynomial(self) -> bool:
        return bool(np.all(self.weights == self.weights[0]))

    def __repr__(self):
        return f"RationalBezier({self.control_points.tolist()}, {self.weights.tolist()})"


def bezier_eval(c: RationalBezier, s):
    """Point and first derivative at ``s`` (scalar or array) by de Casteljau.

    Returns arrays of shape ``(2,)`` for scalar ``s`` and ``(len(s), 2)``
    otherwise.
    """
    s_arr = np.asarray(s, dtype=float)
    scalar = s_arr.ndim == 0
    s_arr = np.atleast_1d(s_arr)
    if np.any(~np.isfinite(s_arr)) or np.any(s_arr < 0.0) or np.any(s_arr > 1.0):
        raise ParameterError("Bezier parameter must lie in [0, 1]")
    w = c.weights
    hom = np.column_stack([c.control_points * w[:, None], w])  # (m, 3)
    level = np.broadcast_to(hom, (len(s_arr),) + hom.shape).copy()
    t = s_arr[:, None, None]
    p = c.degree
    while level.shape[1] > 2:
        level = (1.0 - t) * level[:, :-1] + t * level[:, 1:]
    h = (1.0 - t[:, :, 0]) * level[:, 0] + t[:, :, 0] * level[:, 1]
    dh = p * (level[:, 1] - level[:, 0])
    point = h[:, :2] / h[:, 2:3]
    deriv = (dh[:, :2] - point * dh[:, 2:3]) / h[:, 2:3]
    if scalar:
        return point[0], deriv[0]
    return point, deriv


def find_roots_1d(
    f: Callable,
    a: float,
    b: float,
    samples: int = DEFAULT_ROOT_SAMPLES,
    zero_tol: float = 1e-13,
) -> list[float]:
    """Roots of ``f`` on [a, b] by sign-change bracketing on a uniform sample.

    ``f`` must accept both numpy arrays and scalars. Brackets are refined
    with Brent's method. Samples with ``|f| <= zero_tol`` are reported as
    roots themselves (this is the only way even-multiplicity roots are seen).
    Root pairs closer than the sample spacing can be missed.
    """
    if not a < b:
        raise ParameterError(f"empty interval [{a}, {b}]")
    if samples < 2:
        raise ParameterError("at least 2 samples required")
    ts = np.linspace(a, b, int(samples))
    vals = np.broadcast_to(np.asarray(f(ts), dtype=float), ts.shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        t = float(ts[np.argmax(bad)])
        raise EvaluationError(f"non-finite value at t={t}", point=t)
    near = np.abs(vals) <= zero_tol
    roots: list[float] = []
    k = 0
    n = len(ts)
    while k < n:
        if near[k]:
            start = k
            while k + 1 < n and near[k + 1]:
                k += 1
            roots.append(float(ts[start]))
            if k != start:
                roots.append(float(ts[k]))
        k += 1
    xtol = max(1e-14 * (b - a), 1e-300)
    crossing = (~near[:-1]) & (~near[1:]) & (np.sign(vals[:-1]) != np.sign(vals[1:]))
    for i in np.flatnonzero(crossing):
        lo, hi = float(ts[i]), float(ts[i + 1])
        try:
            r = brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
        except ValueError as exc:  # non-finite inside the bracket
            raise EvaluationError(f"root refinement failed on [{lo}, {hi}]: {exc}") from exc
        roots.append(float(r))
    roots.sort()
    return roots
