"""Reference integrals of scaled monomials over the catalog regions.

Graph regions are reduced to one dimension with the exact antiderivative in
y and a Gauss rule in x that is exact for the resulting polynomial; disks use polar coordinates (Gauss in the radius, the
trapezoidal rule in the angle, which is exact for the trigonometric
polynomials that arise).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedCaseError
from .poly import Poly1D
from .rules import gauss_interval


@dataclass(frozen=True)
class GraphPiece:
    """``{(x, y): xa <= x <= xb, lower(x) <= y <= upper(x)}``."""

    xa: float
    xb: float
    lower: Poly1D
    upper: Poly1D


@dataclass(frozen=True)
class GraphRegion:
    pieces: tuple[GraphPiece, ...]


@dataclass(frozen=True)
class DiskRegion:
    cx: float
    cy: float
    r: float


def scaled_monomial_integral(region, bbox, q: int) -> float:
    """Integral of ``((x-xmin)/dx)^q ((y-ymin)/dy)^q`` over ``region``."""
    xmin, xmax, ymin, ymax = bbox
    if isinstance(region, GraphRegion):
        dx, dy = xmax - xmin, ymax - ymin
        total = 0.0
        for pc in region.pieces:
            # y-antiderivative evaluated pointwise; composing powers of the
            # boundary polynomial in the power basis cancels badly
            deg = q + max(pc.upper.degree, pc.lower.degree, 0) * (q + 1)
            x, w = gauss_interval(deg // 2 + 2, pc.xa, pc.xb)
            hi = ((pc.upper(x) - ymin) / dy) ** (q + 1)
            lo = ((pc.lower(x) - ymin) / dy) ** (q + 1)
            total += float(np.sum(w * ((x - xmin) / dx) ** q * (hi - lo))) * dy / (q + 1)
        return float(total)
    if isinstance(region, DiskRegion):
        m = max(64, 4 * q + 4)
        theta = 2.0 * math.pi * np.arange(m) / m
        rho, wr = gauss_interval(q + 2, 0.0, region.r)
        R, T = np.meshgrid(rho, theta, indexing="ij")
        x = region.cx + R * np.cos(T)
        y = region.cy + R * np.sin(T)
        vals = ((x - xmin) / (xmax - xmin)) ** q * ((y - ymin) / (ymax - ymin)) ** q * R
        return float(np.sum(wr[:, None] * vals) * (2.0 * math.pi / m))
    raise UnsupportedCaseError(f"no oracle for region type {type(region).__name__}")
