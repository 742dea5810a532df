"""Dimension-reduction rules: height functions for level sets, Green's theorem for chains."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import MethodFailure, ParameterError
from .geometry import (
    BoundaryChain,
    CellStatus,
    LevelSet,
    cell_edges,
    classify_cell,
    classify_cells,
    edge_roots,
    eval_checked,
)
from .poly import bezier_eval, find_roots_1d
from .rules import MAX_GAUSS_POINTS, QuadratureRule, Rect, as_rect, gauss_interval, gauss_legendre, tensor_rule


# smallest |d_i phi| / |grad phi| accepted where the interface crosses a cell edge
TANGENT_RATIO = 0.1


@dataclass(frozen=True)
class HeightConfig:
    n_set: int = 2
    m: int = 12  # monotonicity sample grid
    max_depth: int = 16

    def __post_init__(self):
        if not 1 <= self.n_set <= MAX_GAUSS_POINTS:
            raise ParameterError(f"n_set must be in 1..{MAX_GAUSS_POINTS}, got {self.n_set}")
        if self.m < 4:
            raise ParameterError("monotonicity grid must be >= 4")
        if self.max_depth < 0:
            raise ParameterError("max_depth must be >= 0")


@dataclass(frozen=True)
class GreenConfig:
    Q: int = 2
    P: int = 2

    def __post_init__(self):
        for name in ("Q", "P"):
            v = getattr(self, name)
            if not 1 <= v <= MAX_GAUSS_POINTS:
                raise ParameterError(f"{name} must be in 1..{MAX_GAUSS_POINTS}, got {v}")

    @classmethod
    def from_n(cls, n_set: int) -> "GreenConfig":
        return cls(n_set, n_set)


# ---------------------------------------------------------------------------
# height functions


def _point(i: int, t, h):
    """Physical (x, y) from tangential coordinate t and height h along axis i."""
    return (t, h) if i == 1 else (h, t)


def _span(cell: Rect, axis: int) -> tuple[float, float]:
    return (cell.x0, cell.x1) if axis == 0 else (cell.y0, cell.y1)


def _monotone(part: LevelSet, cell: Rect, axis: int, m: int) -> bool:
    xs = np.linspace(cell.x0, cell.x1, m)
    ys = np.linspace(cell.y0, cell.y1, m)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    d = np.asarray(part.grad(X, Y)[axis], dtype=float)
    return not (np.any(d > 0.0) and np.any(d < 0.0))


def _edge_gradients(present, cell: Rect, crossings) -> np.ndarray:
    """``grad phi`` of each present component where it crosses the cell edges; shape (2, k)."""
    out = [np.zeros((2, 0))]
    for part, roots in zip(present, crossings):
        for (_, a, b, _n), rts in zip(cell_edges(cell), roots):
            if rts:
                t = np.asarray(rts)
                px = a[0] + t * (b[0] - a[0])
                py = a[1] + t * (b[1] - a[1])
                out.append(np.asarray(np.broadcast_arrays(*part.grad(px, py), px)[:2], dtype=float))
    return np.concatenate(out, axis=1)


def _steep(grads: np.ndarray, axis: int) -> bool:
    """True where the interface meets the cell edges nearly parallel to ``axis``.

    There the slice roots have unbounded slope in the tangential coordinate,
    which turns the outer integrand into a square-root type function.
    """
    return bool(np.any(np.abs(grads[axis]) < TANGENT_RATIO * np.hypot(grads[0], grads[1])))


def _slice_roots(part: LevelSet, i: int, t: float, h0: float, h1: float) -> list[float]:
    def f(h):
        return part(*_point(i, t, h))

    return find_roots_1d(f, h0, h1)


def _clamped_roots(part: LevelSet, i: int, t: np.ndarray, h0: float, h1: float) -> np.ndarray:
    """Roots of monotone slices at each ``t`` by bisection.

    Used for sign sampling only, so a relative precision of 2^-40 suffices;
    scalar refinement goes through :func:`_clamped_root`. Slices without a sign change report the end where ``|phi|`` is smaller,
    which keeps the result continuous in ``t``.
    """
    t = np.asarray(t, dtype=float)
    f0 = np.asarray(part(*_point(i, t, np.full_like(t, h0))), dtype=float)
    f1 = np.asarray(part(*_point(i, t, np.full_like(t, h1))), dtype=float)
    lo = np.full_like(t, h0)
    hi = np.full_like(t, h1)
    rising = f1 >= f0
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        done = (mid <= lo) | (mid >= hi)
        if done.all():
            break
        fm = np.asarray(part(*_point(i, t, mid)), dtype=float)
        up = (fm <= 0.0) == rising  # root lies above mid
        lo = np.where(up & ~done, mid, lo)
        hi = np.where(~up & ~done, mid, hi)
    root = 0.5 * (lo + hi)
    same = (f0 > 0.0) == (f1 > 0.0)
    same &= (f0 != 0.0) & (f1 != 0.0)
    ends = np.where(np.abs(f0) < np.abs(f1), h0, h1)
    return np.where(same, ends, root)


def _clamped_root(part: LevelSet, i: int, t: float, h0: float, h1: float) -> float:
    f0 = float(part(*_point(i, t, h0)))
    f1 = float(part(*_point(i, t, h1)))
    if f0 == 0.0:
        return h0
    if f1 == 0.0:
        return h1
    if (f0 > 0.0) == (f1 > 0.0):
        return h0 if abs(f0) < abs(f1) else h1
    g = lambda h: float(part(*_point(i, t, h)))  # noqa: E731
    return brentq(g, h0, h1, xtol=1e-15 * (h1 - h0), rtol=4 * np.finfo(float).eps)


def _tangential_splits(present, crossings, i: int, ta: float, tb: float, h0: float, h1: float) -> list[float]:
    """Points where the slice topology can change: face roots and component crossings."""
    pts = []
    for roots in crossings:
        faces = (roots.bottom, roots.top) if i == 1 else (roots.left, roots.right)
        for rts in faces:
            pts.extend(ta + t * (tb - ta) for t in rts)
    if len(present) > 1:
        for a in present:
            for b in present:
                if a is b:
                    continue

                def cross(t, a=a, b=b):
                    if np.ndim(t) == 0:
                        t = float(t)
                        return float(b(*_point(i, t, _clamped_root(a, i, t, h0, h1))))
                    t = np.asarray(t, dtype=float)
                    v = b(*_point(i, t, _clamped_roots(a, i, t, h0, h1)))
                    return v

                pts.extend(find_roots_1d(cross, ta, tb))
    return sorted(p for p in pts if ta < p < tb)


def _fill_slices(ls: LevelSet, present, crossings, cell: Rect, i: int, n: int, out: list):
    j = 1 - i
    ta, tb = _span(cell, j)
    h0, h1 = _span(cell, i)
    cuts = [ta] + _tangential_splits(present, crossings, i, ta, tb, h0, h1) + [tb]
    for a, b in zip(cuts[:-1], cuts[1:]):
        if not b > a:
            continue
        tq, wq = gauss_interval(n, a, b)
        for t, wt in zip(tq, wq):
            roots = sorted(r for part in present for r in _slice_roots(part, i, t, h0, h1))
            ends = [h0] + [r for r in roots if h0 < r < h1] + [h1]
            for lo, hi in zip(ends[:-1], ends[1:]):
                if not hi > lo:
                    continue
                mid = 0.5 * (lo + hi)
                if float(eval_checked(ls, *_point(i, t, mid))) > 0.0:
                    continue
                hq, wh = gauss_interval(n, lo, hi)
                x, y = _point(i, np.full(n, t), hq)
                out.append((np.column_stack([x, y]), wt * wh))


def _height(ls: LevelSet, cell: Rect, cfg: HeightConfig, depth: int, out: list):
    n = cfg.n_set
    status = classify_cell(ls, cell)
    if status == CellStatus.OUTSIDE:
        return
    if status == CellStatus.INSIDE:
        r = tensor_rule(n, n, cell)
        out.append((r.points, r.weights))
        return
    if ls.parts:
        st = [classify_cells(p, np.array([cell]))[0] for p in ls.parts]
        present = [p for p, s in zip(ls.parts, st) if s == CellStatus.CUT] or list(ls.parts)
    else:
        present = [ls]
    cx, cy = cell.center
    gx, gy = ls.grad(cx, cy)
    order = (0, 1) if abs(float(gx)) >= abs(float(gy)) else (1, 0)
    crossings = [edge_roots(p, cell) for p in present]
    grads = _edge_gradients(present, cell, crossings)
    for axis in order:
        if not _steep(grads, axis) and all(_monotone(p, cell, axis, cfg.m) for p in present):
            _fill_slices(ls, present, crossings, cell, axis, n, out)
            return
    if depth >= cfg.max_depth:
        raise MethodFailure(f"no monotone direction after {depth} subdivisions in cell {tuple(cell)}", cell=cell)
    if cell.width >= cell.height:
        xm = cx
        halves = (Rect(cell.x0, cell.y0, xm, cell.y1), Rect(xm, cell.y0, cell.x1, cell.y1))
    else:
        ym = cy
        halves = (Rect(cell.x0, cell.y0, cell.x1, ym), Rect(cell.x0, ym, cell.x1, cell.y1))
    for h in halves:
        _height(ls, h, cfg, depth + 1, out)


def height_rule(ls: LevelSet, cell, cfg: HeightConfig) -> QuadratureRule:
    """Nested 1D Gauss rules along a height direction in which ``phi`` is monotone."""
    cell = as_rect(cell)
    gauss_legendre(cfg.n_set)
    out: list = []
    _height(ls, cell, cfg, 0, out)
    if not out:
        return QuadratureRule.empty("height")
    return QuadratureRule(np.concatenate([p for p, _ in out]), np.concatenate([w for _, w in out]), "height")


# ---------------------------------------------------------------------------
# Green's theorem


def green_rule(chain: BoundaryChain, cfg: GreenConfig) -> QuadratureRule:
    """Boundary-parametrised rule: ``int f dA = oint F dy`` with ``F = int_C^x f dx``."""
    cps = chain.control_points
    C = float(np.min(cps[:, 0]))
    sq, wq = gauss_interval(cfg.Q, 0.0, 1.0)
    g = gauss_legendre(cfg.P)
    pts, wts = [], []
    for k, seg in enumerate(chain.segments):
        cp = seg.control_points
        if np.all(cp == cp[0]):
            warnings.warn(f"zero-length boundary segment {k} skipped", stacklevel=2)
            continue
        if np.all(cp[:, 1] == cp[0, 1]):
            continue  # dy vanishes identically
        xy, d = bezier_eval(seg, sq)
        half = 0.5 * (xy[:, 0] - C)
        zeta = C + half[:, None] * (g.nodes[None, :] + 1.0)
        w = (wq * d[:, 1] * half)[:, None] * g.weights[None, :]
        pts.append(np.column_stack([zeta.ravel(), np.repeat(xy[:, 1], cfg.P)]))
        wts.append(w.ravel())
    if not pts:
        return QuadratureRule.empty("green")
    return QuadratureRule(np.concatenate(pts), np.concatenate(wts), "green")
