"""Quadtree cut-cell rules: masked Gauss fill and marching-squares tessellation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ResourceError
from .geometry import DEFAULT_CLASSIFY_GRID, CellStatus, LevelSet, classify_cells, eval_checked
from .rules import MAX_GAUSS_POINTS, QuadratureRule, Rect, as_rect, gauss_legendre, tensor_rule, triangles_rule

MAX_DEPTH = 12
MAX_POINTS = 10_000_000
LEAF_MODES = ("masked-gauss", "tessellate")


@dataclass(frozen=True)
class QuadtreeConfig:
    n_set: int = 2
    depth: int = 3
    mode: str = "masked-gauss"
    grid: int = DEFAULT_CLASSIFY_GRID

    def __post_init__(self):
        if not 1 <= self.n_set <= MAX_GAUSS_POINTS:
            raise ParameterError(f"n_set must be in 1..{MAX_GAUSS_POINTS}, got {self.n_set}")
        if not 0 <= self.depth <= MAX_DEPTH:
            raise ParameterError(f"depth must be in 0..{MAX_DEPTH}, got {self.depth}")
        if self.mode not in LEAF_MODES:
            raise ParameterError(f"leaf mode must be one of {LEAF_MODES}, got {self.mode!r}")
        if self.grid < 2:
            raise ParameterError("classification grid must be >= 2")


def tessellate_direct(n_set: int = 1) -> QuadtreeConfig:
    """Tessellation of the whole cut cell without subdivision."""
    return QuadtreeConfig(n_set, 0, "tessellate")


@dataclass(frozen=True)
class Leaf:
    cell: Rect
    status: CellStatus
    level: int
    key: int  # Morton index padded to the full depth


def _children(cells: np.ndarray) -> np.ndarray:
    x0, y0, x1, y1 = cells.T
    xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    kids = np.stack(
        [
            np.column_stack([x0, y0, xm, ym]),
            np.column_stack([xm, y0, x1, ym]),
            np.column_stack([x0, ym, xm, y1]),
            np.column_stack([xm, ym, x1, y1]),
        ],
        axis=1,
    )
    return kids.reshape(-1, 4)


def _kinked(ls: LevelSet, cells: np.ndarray, grid: int) -> np.ndarray:
    """Cells in which more than one component of a composed level set is cut."""
    if not ls.parts:
        return np.zeros(len(cells), dtype=bool)
    n_cut = sum(classify_cells(p, cells, grid) == CellStatus.CUT for p in ls.parts)
    return n_cut > 1


def _walk(ls: LevelSet, cell, depth: int, grid: int, n_points: int = 1, kink_depth: int = 0):
    """Breadth-first subdivision; yields ``(cells, status, level, keys)`` per level.

    ``kink_depth`` extra levels are spent only on cells where two components of
    a composed level set are cut (used by the reference cross-check).
    """
    cells = np.array([as_rect(cell)], dtype=float)
    keys = np.zeros(1, dtype=np.int64)
    total = 0
    full = depth + kink_depth
    for level in range(full + 1):
        status = classify_cells(ls, cells, grid)
        split = status == CellStatus.CUT
        if level >= depth:
            split &= _kinked(ls, cells, grid) if level < full else False
        yield cells, status, level, keys, split
        if not split.any():
            return
        total += int(np.sum(status == CellStatus.INSIDE)) * n_points
        if total + 4 * int(split.sum()) * n_points > MAX_POINTS:
            raise ResourceError(f"quadtree would exceed {MAX_POINTS} points at level {level + 1}")
        shift = 2 * (full - level - 1)
        keys = (keys[split][:, None] + (np.arange(4, dtype=np.int64) << shift)[None, :]).ravel()
        cells = _children(cells[split])


def quadtree_leaves(ls: LevelSet, cell, depth: int, grid: int = DEFAULT_CLASSIFY_GRID) -> list[Leaf]:
    """All leaves of the subdivision (Inside, Outside and depth-limited Cut) in Morton order."""
    if not 0 <= depth <= MAX_DEPTH:
        raise ParameterError(f"depth must be in 0..{MAX_DEPTH}, got {depth}")
    out = []
    for cells, status, level, keys, split in _walk(ls, cell, depth, grid):
        for c, s, k, sp in zip(cells, status, keys, split):
            if not sp:
                out.append(Leaf(Rect(*map(float, c)), CellStatus(int(s)), level, int(k)))
    out.sort(key=lambda lf: lf.key)
    return out


def _tensor_points(n: int, cells: np.ndarray):
    """Same arithmetic as :func:`tensor_rule`, for a stack of cells."""
    g = gauss_legendre(n)
    hx = 0.5 * (cells[:, 2] - cells[:, 0])
    hy = 0.5 * (cells[:, 3] - cells[:, 1])
    xs = cells[:, 0, None] + hx[:, None] * (g.nodes + 1.0)
    ys = cells[:, 1, None] + hy[:, None] * (g.nodes + 1.0)
    wx = hx[:, None] * g.weights
    wy = hy[:, None] * g.weights
    X = np.broadcast_to(xs[:, :, None], (len(cells), n, n))
    Y = np.broadcast_to(ys[:, None, :], (len(cells), n, n))
    W = wx[:, :, None] * wy[:, None, :]
    return np.stack([X, Y], axis=-1).reshape(len(cells), n * n, 2), W.reshape(len(cells), n * n)


def _polygon(corners: np.ndarray, vals: np.ndarray, center_active: bool) -> list[np.ndarray]:
    """Active polygon(s) of one leaf from its corner values (counterclockwise corners)."""
    active = vals <= 0.0
    if active.all():
        return [corners]
    if not active.any():
        return []
    saddle = active[0] == active[2] and active[1] == active[3] and active[0] != active[1]
    cross = []
    for i in range(4):
        j = (i + 1) % 4
        if active[i] != active[j]:
            t = vals[i] / (vals[i] - vals[j])
            cross.append(corners[i] + t * (corners[j] - corners[i]))
        else:
            cross.append(None)
    if saddle and not center_active:
        # two separate corner triangles
        polys = []
        for i in np.flatnonzero(active):
            polys.append(np.array([cross[(i - 1) % 4], corners[i], cross[i]]))
        return polys
    verts = []
    for i in range(4):
        if active[i]:
            verts.append(corners[i])
        if cross[i] is not None:
            verts.append(cross[i])
    poly = [verts[0]]
    for v in verts[1:]:
        if not np.array_equal(v, poly[-1]):
            poly.append(v)
    if len(poly) > 1 and np.array_equal(poly[0], poly[-1]):
        poly.pop()
    return [np.array(poly)]


def _fan(poly: np.ndarray) -> list[np.ndarray]:
    return [np.array([poly[0], poly[k], poly[k + 1]]) for k in range(1, len(poly) - 1)]


def _tessellate_many(ls: LevelSet, cells: np.ndarray) -> np.ndarray:
    if len(cells) == 0:
        return np.zeros((0, 3, 2))
    x0, y0, x1, y1 = cells.T
    cx = np.column_stack([x0, x1, x1, x0])
    cy = np.column_stack([y0, y0, y1, y1])
    vals = eval_checked(ls, cx, cy)
    cvals = eval_checked(ls, 0.5 * (x0 + x1), 0.5 * (y0 + y1))
    tris = []
    for k in range(len(cells)):
        corners = np.column_stack([cx[k], cy[k]])
        for poly in _polygon(corners, vals[k], bool(cvals[k] <= 0.0)):
            if len(poly) >= 3:
                tris.extend(_fan(poly))
    return np.array(tris).reshape(-1, 3, 2)


def tessellate_leaf(ls: LevelSet, cell) -> list[np.ndarray]:
    """Triangles covering the linearly interpolated active part of ``cell``."""
    cell = as_rect(cell)
    return list(_tessellate_many(ls, np.array([cell], dtype=float)))


def quadtree_rule(ls: LevelSet, cell, cfg: QuadtreeConfig, kink_depth: int = 0) -> QuadratureRule:
    """Rule on ``cell`` from uniform subdivision of cut cells down to ``cfg.depth``."""
    cell = as_rect(cell)
    n = cfg.n_set
    tag = "quadtree-" + cfg.mode
    parts = []  # (keys, points (K, m, 2), weights (K, m))
    for cells, status, level, keys, split in _walk(ls, cell, cfg.depth, cfg.grid, n * n, kink_depth):
        inside = status == CellStatus.INSIDE
        if inside.any():
            if level == 0:
                r = tensor_rule(n, n, cell)
                return QuadratureRule(r.points, r.weights, tag)
            pts, wts = _tensor_points(n, cells[inside])
            parts.extend(zip(keys[inside], pts, wts))
        cut = (status == CellStatus.CUT) & ~split
        if not cut.any():
            continue
        if cfg.mode == "masked-gauss":
            pts, wts = _tensor_points(n, cells[cut])
            keep = eval_checked(ls, pts[..., 0], pts[..., 1]) <= 0.0
            for k, p, w, m in zip(keys[cut], pts, wts, keep):
                parts.append((k, p[m], w[m]))
        else:
            for k, c in zip(keys[cut], cells[cut]):
                r = triangles_rule(n, _tessellate_many(ls, c[None]))
                parts.append((k, r.points, r.weights))
    if not parts:
        return QuadratureRule.empty(tag)
    parts.sort(key=lambda t: t[0])
    return QuadratureRule(
        np.concatenate([p[1].reshape(-1, 2) for p in parts]),
        np.concatenate([p[2].ravel() for p in parts]),
        tag,
    )
