"""Moment-fitted cut-cell rules.

Two generators share the idea of fixing tensor Gauss nodes and solving for
weights:

* Lagrange fitting: weights are the integrals of the tensor Lagrange
  polynomials through the nodes, taken with a quadtree reference rule.
  The system matrix is the identity, so no solve is needed.
* Hierarchical fitting: an interface rule is fitted against divergence-free
  test functions whose interface integrals follow from the straight cell
  edges, then a volume rule is fitted with right-hand sides from the
  divergence theorem.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg

from .errors import DegenerateNormalError, ParameterError
from .geometry import DEFAULT_CLASSIFY_GRID, CellStatus, LevelSet, active_edge_segments, classify_cell
from .poly import Poly2D
from .quadtree import QuadtreeConfig, quadtree_rule
from .rules import MAX_GAUSS_POINTS, QuadratureRule, Rect, as_rect, gauss_interval, gauss_legendre, tensor_rule

MAX_MOMENT_NODES = 10_000
LSTSQ_RCOND = 1e-12
MIN_NORMAL = 1e-10


@dataclass(frozen=True)
class MomentFitConfig:
    n_set: int = 2
    depth: int = 3  # reference quadtree depth (Lagrange fitting)
    grid: int = DEFAULT_CLASSIFY_GRID
    surface_safety: float = 1.6
    volume_safety: float = 1.0

    def __post_init__(self):
        if not 1 <= self.n_set <= MAX_GAUSS_POINTS // 2:
            raise ParameterError(f"n_set must be in 1..{MAX_GAUSS_POINTS // 2}, got {self.n_set}")
        if self.surface_safety < 1.0 or self.volume_safety < 1.0:
            raise ParameterError("safety factors must be >= 1")
        k = self.order
        if self.surface_safety * surface_moment_count(k) > MAX_MOMENT_NODES:
            raise ParameterError("surface node count exceeds the 1e4 limit")
        if self.volume_safety * (k + 1) ** 2 > MAX_MOMENT_NODES:
            raise ParameterError("volume node count exceeds the 1e4 limit")

    @property
    def order(self) -> int:
        """Quadrature order k = 2 n_set - 1."""
        return 2 * self.n_set - 1

    def reference(self) -> QuadtreeConfig:
        return QuadtreeConfig(self.n_set, self.depth, "masked-gauss", self.grid)


@dataclass(frozen=True)
class MomentSystem:
    matrix: np.ndarray  # moments x nodes
    rhs: np.ndarray
    weights: np.ndarray
    residual: float
    nodes: np.ndarray


def _square_count(n: float) -> int:
    """Side of the smallest square grid holding at least ``n`` nodes."""
    s = math.isqrt(int(math.ceil(n)))
    return s if s * s >= math.ceil(n) else s + 1


def _solve(matrix: np.ndarray, rhs: np.ndarray, nodes: np.ndarray) -> MomentSystem:
    w = np.linalg.lstsq(matrix, rhs, rcond=LSTSQ_RCOND)[0]
    res = float(np.linalg.norm(matrix @ w - rhs))
    return MomentSystem(matrix, rhs, w, res, nodes)


# ---------------------------------------------------------------------------
# Lagrange fitting


def _lagrange_values(nodes: np.ndarray, t: np.ndarray) -> np.ndarray:
    """``L_a(t_r)`` for the Lagrange polynomials through ``nodes``; shape (len(t), len(nodes))."""
    diff = t[:, None] - nodes[None, :]
    out = np.empty((len(t), len(nodes)))
    for a in range(len(nodes)):
        others = np.delete(np.arange(len(nodes)), a)
        out[:, a] = np.prod(diff[:, others] / (nodes[a] - nodes[others]), axis=1)
    return out


def lagrange_momentfit_system(ls: LevelSet, cell, cfg: MomentFitConfig) -> MomentSystem:
    cell = as_rect(cell)
    m = 2 * cfg.n_set
    nodes_rule = tensor_rule(m, m, cell)
    ref = quadtree_rule(ls, cell, cfg.reference())
    xi = gauss_legendre(m).nodes
    cx, cy = cell.center
    u = (ref.points[:, 0] - cx) / (0.5 * cell.width)
    v = (ref.points[:, 1] - cy) / (0.5 * cell.height)
    Lu, Lv = _lagrange_values(xi, u), _lagrange_values(xi, v)
    # node (a, b) sits at index a*m + b, matching tensor_rule ordering
    w = np.einsum("r,ra,rb->ab", ref.weights, Lu, Lv).ravel()
    eye = np.eye(m * m)
    return MomentSystem(eye, w, w, 0.0, nodes_rule.points)


def lagrange_momentfit_rule(ls: LevelSet, cell, cfg: MomentFitConfig) -> QuadratureRule:
    """(2 n_set)^2 fixed Gauss nodes; weights fitted to a quadtree reference."""
    cell = as_rect(cell)
    status = classify_cell(ls, cell, cfg.grid)
    if status == CellStatus.OUTSIDE:
        return QuadratureRule.empty("momentfit-lagrange")
    m = 2 * cfg.n_set
    if status == CellStatus.INSIDE:
        r = tensor_rule(m, m, cell)
        return QuadratureRule(r.points, r.weights, "momentfit-lagrange")
    sys = lagrange_momentfit_system(ls, cell, cfg)
    return QuadratureRule(sys.nodes, sys.weights, "momentfit-lagrange")


# ---------------------------------------------------------------------------
# hierarchical fitting


def surface_moment_count(k: int) -> int:
    # monomials of total degree 1..k+1
    return (k + 2) * (k + 3) // 2 - 1


def divergence_free_basis(k: int) -> list[tuple[Poly2D, Poly2D]]:
    """Curls ``(d psi/dy, -d psi/dx)`` of the monomials of total degree 1..k+1."""
    out = []
    for deg in range(1, k + 2):
        for a in range(deg, -1, -1):
            c = np.zeros((a + 1, deg - a + 1))
            c[a, deg - a] = 1.0
            psi = Poly2D(c)
            out.append((psi.dy(), -psi.dx()))
    return out


def _curl_values(k: int, u: np.ndarray, v: np.ndarray, hx: float, hy: float):
    """Physical components of the curl basis at local coordinates; shapes (moments, points)."""
    gx, gy = [], []
    for deg in range(1, k + 2):
        for a in range(deg, -1, -1):
            b = deg - a
            # psi = u^a v^b with u = (x - cx)/hx, v = (y - cy)/hy
            dpsi_dv = b * u**a * v ** (b - 1) if b else np.zeros_like(u)
            dpsi_du = a * u ** (a - 1) * v**b if a else np.zeros_like(u)
            gx.append(dpsi_dv / hy)
            gy.append(-dpsi_du / hx)
    return np.array(gx), np.array(gy)


def _unit_normals(ls: LevelSet, pts: np.ndarray) -> np.ndarray:
    gx, gy = ls.grad(pts[:, 0], pts[:, 1])
    g = np.column_stack(np.broadcast_arrays(gx, gy, pts[:, 0])[:2]).astype(float)
    norm = np.hypot(g[:, 0], g[:, 1])
    bad = ~(norm >= MIN_NORMAL)
    if bad.any():
        p = tuple(float(c) for c in pts[np.argmax(bad)])
        raise DegenerateNormalError(f"level set gradient vanishes at {p}")
    return g / norm[:, None]


def _edge_points(ls: LevelSet, cell: Rect, n: int):
    """Gauss points on the active straight-edge parts: (points, weights * outward normal)."""
    pts, wn = [], []
    for a, b, normal in active_edge_segments(ls, cell):
        t, w = gauss_interval(n, 0.0, 1.0)
        length = float(np.hypot(*(b - a)))
        pts.append(a[None, :] + t[:, None] * (b - a)[None, :])
        wn.append((w * length)[:, None] * normal[None, :])
    if not pts:
        return np.zeros((0, 2)), np.zeros((0, 2))
    return np.concatenate(pts), np.concatenate(wn)


def _local(cell: Rect, pts: np.ndarray):
    cx, cy = cell.center
    hx, hy = 0.5 * cell.width, 0.5 * cell.height
    return (pts[:, 0] - cx) / hx, (pts[:, 1] - cy) / hy, hx, hy


def hmf_interface_system(ls: LevelSet, cell, cfg: MomentFitConfig, edges=None) -> MomentSystem:
    """``edges``: precomputed result of :func:`_edge_points` for ``cell``."""
    cell = as_rect(cell)
    k = cfg.order
    s = _square_count(cfg.surface_safety * surface_moment_count(k))
    nodes = tensor_rule(s, s, cell).points
    nrm = _unit_normals(ls, nodes)
    u, v, hx, hy = _local(cell, nodes)
    gx, gy = _curl_values(k, u, v, hx, hy)
    matrix = gx * nrm[:, 0] + gy * nrm[:, 1]
    epts, ewn = _edge_points(ls, cell, cfg.n_set + 2) if edges is None else edges
    eu, ev, _, _ = _local(cell, epts)
    ex, ey = _curl_values(k, eu, ev, hx, hy)
    # div g = 0: the interface integral balances the active straight edges
    rhs = -(ex @ ewn[:, 0] + ey @ ewn[:, 1])
    return _solve(matrix, rhs, nodes)


def hmf_interface_rule(ls: LevelSet, cell, cfg: MomentFitConfig) -> QuadratureRule:
    """Rule for integrals over the interface ``phi = 0`` inside ``cell``."""
    cell = as_rect(cell)
    if classify_cell(ls, cell, cfg.grid) != CellStatus.CUT:
        return QuadratureRule.empty("hmf-interface")
    sys = hmf_interface_system(ls, cell, cfg)
    return QuadratureRule(sys.nodes, sys.weights, "hmf-interface")


def _legendre_flux(k: int, u: np.ndarray, v: np.ndarray, hx: float, hy: float):
    """``F = (int f dx, int f dy) / 2`` for the tensor Legendre basis; shapes (moments, points)."""
    Pu, Pv = npleg.legvander(u, k + 1), npleg.legvander(v, k + 1)
    # antiderivatives: int P_0 = P_1, int P_a = (P_{a+1} - P_{a-1}) / (2a + 1)
    Iu = np.empty((len(u), k + 1))
    Iv = np.empty((len(v), k + 1))
    Iu[:, 0], Iv[:, 0] = Pu[:, 1], Pv[:, 1]
    for a in range(1, k + 1):
        Iu[:, a] = (Pu[:, a + 1] - Pu[:, a - 1]) / (2 * a + 1)
        Iv[:, a] = (Pv[:, a + 1] - Pv[:, a - 1]) / (2 * a + 1)
    m = (k + 1) ** 2
    Fx = 0.5 * hx * np.einsum("pa,pb->abp", Iu, Pv[:, : k + 1]).reshape(m, len(u))
    Fy = 0.5 * hy * np.einsum("pa,pb->abp", Pu[:, : k + 1], Iv).reshape(m, len(u))
    return Fx, Fy


def hmf_volume_system(ls: LevelSet, cell, cfg: MomentFitConfig) -> MomentSystem:
    cell = as_rect(cell)
    k = cfg.order
    s = _square_count(cfg.volume_safety * (k + 1) ** 2)
    nodes = tensor_rule(s, s, cell).points
    u, v, hx, hy = _local(cell, nodes)
    Pu, Pv = npleg.legvander(u, k), npleg.legvander(v, k)
    matrix = np.einsum("pa,pb->abp", Pu, Pv).reshape(-1, len(nodes))

    edges = _edge_points(ls, cell, cfg.n_set + 2)
    epts, ewn = edges
    eu, ev, _, _ = _local(cell, epts)
    Fx, Fy = _legendre_flux(k, eu, ev, hx, hy)
    rhs = Fx @ ewn[:, 0] + Fy @ ewn[:, 1]

    surf = hmf_interface_system(ls, cell, cfg, edges)
    snrm = _unit_normals(ls, surf.nodes)
    su, sv, _, _ = _local(cell, surf.nodes)
    Gx, Gy = _legendre_flux(k, su, sv, hx, hy)
    rhs = rhs + (Gx * snrm[:, 0] + Gy * snrm[:, 1]) @ surf.weights
    return _solve(matrix, rhs, nodes)


def hmf_volume_rule(ls: LevelSet, cell, cfg: MomentFitConfig) -> QuadratureRule:
    """Volume rule on the active part of ``cell`` by hierarchical moment fitting."""
    cell = as_rect(cell)
    status = classify_cell(ls, cell, cfg.grid)
    if status == CellStatus.OUTSIDE:
        return QuadratureRule.empty("hmf")
    if status == CellStatus.INSIDE:
        r = tensor_rule(cfg.n_set, cfg.n_set, cell)
        return QuadratureRule(r.points, r.weights, "hmf")
    sys = hmf_volume_system(ls, cell, cfg)
    return QuadratureRule(sys.nodes, sys.weights, "hmf")
