"""Implicit and parametric boundary descriptions, cell classification, meshes.

Sign convention throughout the package: the active region is ``phi <= 0``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import EvaluationError, GeometryError, ParameterError
from .poly import Poly1D, Poly2D, RationalBezier, bezier_eval, find_roots_1d
from .rules import Rect, as_rect

DEFAULT_CLASSIFY_GRID = 5


@dataclass(frozen=True, eq=False)
class LevelSet:
    """Scalar field ``phi(x, y)`` with gradient; both vectorised over arrays."""

    phi: Callable
    grad: Callable
    form: str = "generic"
    poly: Poly2D | None = None
    parts: tuple["LevelSet", ...] = ()

    def __call__(self, x, y):
        return self.phi(x, y)

    @classmethod
    def from_poly(cls, p: Poly2D) -> "LevelSet":
        px, py = p.dx(), p.dy()

        def grad(x, y):
            return px(x, y), py(x, y)

        return cls(p, grad, "polynomial", p)

    @classmethod
    def compose_max(cls, *parts: "LevelSet") -> "LevelSet":
        """Intersection of the active regions of ``parts``."""
        return cls._composed(parts, np.maximum, np.argmax, "composed-max")

    @classmethod
    def compose_min(cls, *parts: "LevelSet") -> "LevelSet":
        """Union of the active regions of ``parts``."""
        return cls._composed(parts, np.minimum, np.argmin, "composed-min")

    @classmethod
    def _composed(cls, parts, reduce, pick, form):
        if len(parts) < 2:
            raise ParameterError("composition needs at least two level sets")
        parts = tuple(parts)

        def phi(x, y):
            out = parts[0](x, y)
            for p in parts[1:]:
                out = reduce(out, p(x, y))
            return out

        def grad(x, y):
            vals = np.stack(np.broadcast_arrays(*(p(x, y) for p in parts)))
            k = pick(vals, axis=0)
            gs = [np.broadcast_arrays(*p.grad(x, y), vals[0]) for p in parts]
            gx = np.choose(k, [g[0] for g in gs])
            gy = np.choose(k, [g[1] for g in gs])
            return gx, gy

        return cls(phi, grad, form, None, parts)


def _checked(vals, xs, ys) -> np.ndarray:
    vals = np.asarray(vals, dtype=float)
    bad = ~np.isfinite(vals)
    if bad.any():
        i = np.unravel_index(np.argmax(bad), vals.shape)
        p = (float(np.broadcast_to(xs, vals.shape)[i]), float(np.broadcast_to(ys, vals.shape)[i]))
        raise EvaluationError(f"level set is not finite at {p}", point=p)
    return vals


def eval_checked(ls: LevelSet, x, y) -> np.ndarray:
    return _checked(ls(x, y), x, y)


class CellStatus(enum.IntEnum):
    OUTSIDE = 0
    INSIDE = 1
    CUT = 2


def classify_cells(ls: LevelSet, cells: np.ndarray, grid: int = DEFAULT_CLASSIFY_GRID) -> np.ndarray:
    """Vectorised :func:`classify_cell` for cells given as rows ``(x0, y0, x1, y1)``."""
    if grid < 2:
        raise ParameterError("classification grid must be >= 2")
    cells = np.asarray(cells, dtype=float).reshape(-1, 4)
    t = np.linspace(0.0, 1.0, grid)
    xs = cells[:, 0, None] + (cells[:, 2] - cells[:, 0])[:, None] * t[None, :]
    ys = cells[:, 1, None] + (cells[:, 3] - cells[:, 1])[:, None] * t[None, :]
    X = np.broadcast_to(xs[:, :, None], (len(cells), grid, grid))
    Y = np.broadcast_to(ys[:, None, :], (len(cells), grid, grid))
    v = eval_checked(ls, X, Y).reshape(len(cells), -1)
    inside = np.all(v <= 0.0, axis=1)
    outside = np.all(v > 0.0, axis=1)
    status = np.full(len(cells), int(CellStatus.CUT))
    status[inside] = int(CellStatus.INSIDE)
    status[outside] = int(CellStatus.OUTSIDE)
    return status


def classify_cell(ls: LevelSet, cell, grid: int = DEFAULT_CLASSIFY_GRID) -> CellStatus:
    """Inside/Outside/Cut from the signs of phi on a ``grid x grid`` sample incl. corners."""
    cell = as_rect(cell)
    return CellStatus(int(classify_cells(ls, np.array([cell]), grid)[0]))


class EdgeRoots(NamedTuple):
    """Interface crossings per edge as fractions along the edge.

    Each edge is parameterised in the direction of increasing coordinate.
    """

    bottom: list
    right: list
    top: list
    left: list


def cell_edges(cell: Rect):
    """``(name, start, end, outward normal)`` per edge, increasing-coordinate direction."""
    x0, y0, x1, y1 = cell
    return (
        ("bottom", (x0, y0), (x1, y0), (0.0, -1.0)),
        ("right", (x1, y0), (x1, y1), (1.0, 0.0)),
        ("top", (x0, y1), (x1, y1), (0.0, 1.0)),
        ("left", (x0, y0), (x0, y1), (-1.0, 0.0)),
    )


def edge_roots(ls: LevelSet, cell, samples: int = 32) -> EdgeRoots:
    cell = as_rect(cell)
    out = []
    for _, (ax, ay), (bx, by), _n in cell_edges(cell):

        def f(t, ax=ax, ay=ay, bx=bx, by=by):
            t = np.asarray(t, dtype=float)
            return ls(ax + t * (bx - ax), ay + t * (by - ay))

        out.append(find_roots_1d(f, 0.0, 1.0, samples))
    return EdgeRoots(*out)


def active_edge_segments(ls: LevelSet, cell, samples: int = 32):
    """Active parts of the cell boundary: ``(start, end, outward normal)`` triples."""
    cell = as_rect(cell)
    roots = edge_roots(ls, cell, samples)
    segs = []
    for (name, a, b, normal), rts in zip(cell_edges(cell), roots):
        a = np.asarray(a)
        b = np.asarray(b)
        ts = [0.0] + [t for t in rts if 0.0 < t < 1.0] + [1.0]
        for t0, t1 in zip(ts[:-1], ts[1:]):
            if t1 <= t0:
                continue
            m = a + 0.5 * (t0 + t1) * (b - a)
            if float(eval_checked(ls, m[0], m[1])) <= 0.0:
                segs.append((a + t0 * (b - a), a + t1 * (b - a), np.asarray(normal)))
    return segs


@dataclass(frozen=True)
class BackgroundMesh:
    box: Rect
    nx: int
    ny: int

    def __post_init__(self):
        object.__setattr__(self, "box", as_rect(self.box))
        if self.nx < 1 or self.ny < 1:
            raise ParameterError("mesh needs at least one cell per direction")

    @classmethod
    def uniform(cls, box, n: int) -> "BackgroundMesh":
        return cls(box, n, n)

    def cells(self) -> list[Rect]:
        """Congruent cells in row-major order (x fastest)."""
        xs = np.linspace(self.box.x0, self.box.x1, self.nx + 1)
        ys = np.linspace(self.box.y0, self.box.y1, self.ny + 1)
        xs[-1], ys[-1] = self.box.x1, self.box.y1
        return [
            Rect(float(xs[i]), float(ys[j]), float(xs[i + 1]), float(ys[j + 1]))
            for j in range(self.ny)
            for i in range(self.nx)
        ]


def _bernstein_to_power(values: np.ndarray) -> np.ndarray:
    """Power-basis coefficients (ascending) of a Bernstein-form polynomial."""
    n = len(values) - 1
    from math import comb

    out = np.zeros(n + 1)
    for j, b in enumerate(values):
        # B_j^n(s) = C(n,j) s^j (1-s)^(n-j)
        for k in range(n - j + 1):
            out[j + k] += b * comb(n, j) * comb(n - j, k) * (-1) ** k
    return out


def power_to_bernstein(coef: Sequence[float], degree: int) -> np.ndarray:
    """Bernstein coefficients of ``sum a_i s^i`` elevated to ``degree``."""
    from math import comb

    a = np.zeros(degree + 1)
    a[: len(coef)] = coef
    return np.array(
        [sum(comb(j, i) / comb(degree, i) * a[i] for i in range(j + 1)) for j in range(degree + 1)]
    )


@dataclass(frozen=True, eq=False)
class BoundaryChain:
    """Closed, counterclockwise sequence of rational Bezier segments."""

    segments: tuple[RationalBezier, ...]
    _power: tuple = field(default=(), repr=False)

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise GeometryError("empty boundary chain")
        object.__setattr__(self, "segments", segs)
        for k, seg in enumerate(segs):
            nxt = segs[(k + 1) % len(segs)]
            if np.max(np.abs(seg.end - nxt.start)) > 1e-12:
                raise GeometryError(f"chain is open between segments {k} and {(k + 1) % len(segs)}")
        if self.signed_area() <= 0.0:
            raise GeometryError("chain must be oriented counterclockwise")
        power = []
        for seg in segs:
            w = seg.weights
            power.append(
                (
                    _bernstein_to_power(seg.control_points[:, 0] * w),
                    _bernstein_to_power(seg.control_points[:, 1] * w),
                    _bernstein_to_power(w),
                )
            )
        object.__setattr__(self, "_power", tuple(power))

    def signed_area(self, per_segment: int = 64) -> float:
        s = np.linspace(0.0, 1.0, per_segment, endpoint=False)
        pts = np.concatenate([bezier_eval(seg, s)[0] for seg in self.segments])
        x, y = pts[:, 0], pts[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @property
    def control_points(self) -> np.ndarray:
        return np.concatenate([seg.control_points for seg in self.segments])

    def winding_number(self, px: float, py: float) -> int:
        """Crossings of the ray ``{(x, py): x > px}`` counted with orientation."""
        wn = 0
        for seg, (ax, ay, aw) in zip(self.segments, self._power):
            cy = ay - py * aw
            if not np.any(cy):
                continue
            nz = np.flatnonzero(cy)
            roots = np.roots(cy[: nz[-1] + 1][::-1]) if nz[-1] > 0 else np.array([])
            for r in roots:
                if abs(r.imag) > 1e-12:
                    continue
                s = r.real
                if not (0.0 <= s < 1.0):
                    if -1e-14 < s < 0.0:
                        s = 0.0
                    else:
                        continue
                pt, d = bezier_eval(seg, s)
                if pt[0] > px and d[1] != 0.0:
                    wn += 1 if d[1] > 0 else -1
        return wn

    def contains(self, px: float, py: float) -> bool:
        return self.winding_number(px, py) != 0


def line_segment(a, b) -> RationalBezier:
    return RationalBezier([a, b])


def graph_segment(g: Poly1D, xa: float, xb: float, ya: float | None = None, yb: float | None = None):
    """Bezier form of ``y = g(x)`` traversed from ``x = xa`` to ``x = xb``.

    ``ya``/``yb`` pin the end ordinates to their exact intended values.
    """
    deg = max(g.degree, 1)
    # y(s) = g(xa + (xb - xa) s)
    ys = g.compose(Poly1D([xa, xb - xa]))
    by = power_to_bernstein(ys.coef, deg)
    bx = xa + (xb - xa) * np.arange(deg + 1) / deg
    if ya is not None:
        by[0] = ya
    if yb is not None:
        by[-1] = yb
    return RationalBezier(np.column_stack([bx, by]))


def halton_points(n: int, box) -> np.ndarray:
    from scipy.stats import qmc

    box = as_rect(box)
    u = qmc.Halton(d=2, scramble=False).random(n + 1)[1:]
    return np.column_stack([box.x0 + box.width * u[:, 0], box.y0 + box.height * u[:, 1]])
