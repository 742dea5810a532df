"""Built-in test geometries with exact reference integrals.

All cases live in the unit square. The geometries re-create the cutting
situations of the linear, quadratic and quintic single-element studies, a
disk, and the intersected-parabola lens used for the robustness sweep.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .errors import ParameterError, UnsupportedCaseError
from .geometry import BoundaryChain, LevelSet, graph_segment, line_segment
from .oracle import DiskRegion, GraphPiece, GraphRegion, scaled_monomial_integral
from .poly import Poly1D, Poly2D, RationalBezier
from .rules import Rect, as_rect

UNIT_BOX = Rect(0.0, 0.0, 1.0, 1.0)
REFERENCE_DEGREES = tuple(range(0, 9))

CASE1_CURVE = Poly1D([0.2, 0.6])
CASE2_CURVE = Poly1D([0.15, 0.5, 0.3])
CASE3_CURVE = Poly1D([0.6, -0.5, -0.24, -7.64, 24.11, -15.28984375])
CASE3_EXIT_X = 0.8

DISK_CENTER = (0.5, 0.5)
DISK_RADIUS = 0.4

PARABOLA_SHIFT_RANGE = (0.10, 0.47)
PARABOLA_STEPS = 1000


@dataclass(frozen=True, eq=False)
class TestCase:
    __test__ = False  # not a pytest class

    id: str
    levelset: LevelSet
    chain: BoundaryChain | None
    box: Rect
    degree: int
    bbox: tuple[float, float, float, float]
    region: object
    references: dict = field(default_factory=dict)
    description: str = ""

    @property
    def forms(self) -> tuple[str, ...]:
        out = (self.levelset.form,)
        return out + ("parametric",) if self.chain is not None else out

    @property
    def reference_area(self) -> float:
        return self.references[0]

    def reference(self, q: int) -> float:
        if q not in self.references:
            return scaled_monomial_integral(self.region, self.bbox, q)
        return self.references[q]


def scaled_monomial(tc: TestCase, q: int) -> Callable:
    """``((x-xmin)/(xmax-xmin))^q * ((y-ymin)/(ymax-ymin))^q`` on the case's bounding box."""
    xmin, xmax, ymin, ymax = tc.bbox
    if not (xmax > xmin and ymax > ymin):
        raise ParameterError(f"bounding box of {tc.id} has zero extent")
    dx, dy = xmax - xmin, ymax - ymin

    def f(x, y):
        return ((np.asarray(x) - xmin) / dx) ** q * ((np.asarray(y) - ymin) / dy) ** q

    return f


def _graph_below(curve: Poly1D) -> LevelSet:
    """phi = y - curve(x): active below the curve."""
    coef = np.zeros((len(curve.coef), 2))
    coef[:, 0] = -curve.coef
    coef[0, 1] = 1.0
    return LevelSet.from_poly(Poly2D(coef))


def _with_references(tc: TestCase) -> TestCase:
    refs = {q: scaled_monomial_integral(tc.region, tc.bbox, q) for q in REFERENCE_DEGREES}
    object.__setattr__(tc, "references", refs)
    return tc


def _case1() -> TestCase:
    g = CASE1_CURVE
    chain = BoundaryChain(
        (
            line_segment((0, 0), (1, 0)),
            line_segment((1, 0), (1, 0.8)),
            graph_segment(g, 1.0, 0.0, 0.8, 0.2),
            line_segment((0, 0.2), (0, 0)),
        )
    )
    region = GraphRegion((GraphPiece(0.0, 1.0, Poly1D([0.0]), g),))
    return TestCase(
        "case1", _graph_below(g), chain, UNIT_BOX, 1, (0.0, 1.0, 0.0, 0.8), region,
        description="straight inclined cut y = 0.2 + 0.6x, trapezium below",
    )


def _case2() -> TestCase:
    g = CASE2_CURVE
    chain = BoundaryChain(
        (
            line_segment((0, 0), (1, 0)),
            line_segment((1, 0), (1, 0.95)),
            graph_segment(g, 1.0, 0.0, 0.95, 0.15),
            line_segment((0, 0.15), (0, 0)),
        )
    )
    region = GraphRegion((GraphPiece(0.0, 1.0, Poly1D([0.0]), g),))
    return TestCase(
        "case2", _graph_below(g), chain, UNIT_BOX, 2, (0.0, 1.0, 0.0, 0.95), region,
        description="quadratic cut y = 0.15 + 0.5x + 0.3x^2, convex region below",
    )


def _case3() -> TestCase:
    g = CASE3_CURVE
    xe = CASE3_EXIT_X
    chain = BoundaryChain(
        (
            line_segment((0, 0), (1, 0)),
            line_segment((1, 0), (1, 1)),
            line_segment((1, 1), (xe, 1)),
            graph_segment(g, xe, 0.0, 1.0, 0.6),
            line_segment((0, 0.6), (0, 0)),
        )
    )
    region = GraphRegion(
        (
            GraphPiece(0.0, xe, Poly1D([0.0]), g),
            GraphPiece(xe, 1.0, Poly1D([0.0]), Poly1D([1.0])),
        )
    )
    return TestCase(
        "case3", _graph_below(g), chain, UNIT_BOX, 5, (0.0, 1.0, 0.0, 1.0), region,
        description="quintic cut from (0, 0.6) to (0.8, 1), concave five-sided region",
    )


def disk_chain(cx: float, cy: float, r: float) -> BoundaryChain:
    w = (1.0, 1.0 / math.sqrt(2.0), 1.0)
    arcs = []
    pts = [(cx + r, cy), (cx, cy + r), (cx - r, cy), (cx, cy - r)]
    corners = [(cx + r, cy + r), (cx - r, cy + r), (cx - r, cy - r), (cx + r, cy - r)]
    for k in range(4):
        arcs.append(RationalBezier([pts[k], corners[k], pts[(k + 1) % 4]], w))
    return BoundaryChain(tuple(arcs))


def _disk() -> TestCase:
    cx, cy = DISK_CENTER
    r = DISK_RADIUS
    p = Poly2D([[cx * cx + cy * cy - r * r, -2 * cy, 1.0], [-2 * cx, 0.0, 0.0], [1.0, 0.0, 0.0]])
    return TestCase(
        "disk", LevelSet.from_poly(p), disk_chain(cx, cy, r), UNIT_BOX, 2,
        (cx - r, cx + r, cy - r, cy + r), DiskRegion(cx, cy, r),
        description="disk of radius 0.4 centred in the unit square",
    )


def parabola_curves(s: float) -> tuple[Poly1D, Poly1D]:
    """Lower and upper bounding parabolas of the lens at shift ``s``."""
    lower = Poly1D([1.6 * s * s + 0.15, -3.2 * s, 1.6])
    t = s + 0.1
    upper = Poly1D([0.85 - 1.6 * t * t, 3.2 * t, -1.6])
    return lower, upper


def parabola_shifts(steps: int = PARABOLA_STEPS) -> np.ndarray:
    if steps < 2:
        raise ParameterError("a sweep needs at least two steps")
    return np.linspace(*PARABOLA_SHIFT_RANGE, steps)


def parabolas(s: float, case_id: str | None = None) -> TestCase:
    """Lens between two parabolas shifted by ``s``, clipped to the unit square."""
    lower, upper = parabola_curves(s)
    # lens ends: lower(x) == upper(x)
    gap = upper - lower
    c0, c1, c2 = gap.coef
    disc = math.sqrt(c1 * c1 - 4 * c2 * c0)
    xa, xb = sorted(((-c1 + disc) / (2 * c2), (-c1 - disc) / (2 * c2)))
    xl, xr = max(0.0, xa), min(1.0, xb)
    xl, xr = float(xl), float(xr)
    region = GraphRegion((GraphPiece(xl, xr, lower, upper),))
    ymin = float(lower(min(max(s, xl), xr)))
    ymax = float(upper(min(max(s + 0.1, xl), xr)))
    ls = LevelSet.compose_max(
        LevelSet.from_poly(Poly2D.from_poly1d(lower) - Poly2D.y()),
        LevelSet.from_poly(Poly2D.y() - Poly2D.from_poly1d(upper)),
    )
    tc = TestCase(
        case_id or "parabolas", ls, None, UNIT_BOX, 2, (xl, xr, ymin, ymax), region,
        description=f"lens between intersected parabolas, shift s = {s!r}",
    )
    return _with_references(tc)


@lru_cache(maxsize=1)
def catalog() -> tuple[TestCase, ...]:
    cases = [_case1(), _case2(), _case3(), _disk()]
    cases = [_with_references(tc) for tc in cases]
    cases.append(parabolas(PARABOLA_SHIFT_RANGE[0]))
    return tuple(cases)


def case_ids() -> list[str]:
    return [tc.id for tc in catalog()]


def get_case(case_id: str) -> TestCase:
    for tc in catalog():
        if tc.id == case_id:
            return tc
    raise UnsupportedCaseError(f"unknown case {case_id!r}; valid ids: {', '.join(case_ids())}")


# ---------------------------------------------------------------------------
# structured text export / import (JSON lines, one record per case)


def _levelset_record(ls: LevelSet) -> dict:
    if ls.form == "polynomial":
        return {"form": "polynomial", "coefficients": ls.poly.coef.tolist()}
    if ls.form in ("composed-max", "composed-min"):
        return {"form": ls.form, "parts": [_levelset_record(p) for p in ls.parts]}
    raise UnsupportedCaseError(f"level set form {ls.form!r} cannot be exported")


def _levelset_from_record(rec: dict) -> LevelSet:
    if rec["form"] == "polynomial":
        return LevelSet.from_poly(Poly2D(rec["coefficients"]))
    parts = [_levelset_from_record(p) for p in rec["parts"]]
    if rec["form"] == "composed-max":
        return LevelSet.compose_max(*parts)
    if rec["form"] == "composed-min":
        return LevelSet.compose_min(*parts)
    raise UnsupportedCaseError(f"unknown level set form {rec['form']!r}")


def _region_record(region) -> dict:
    if isinstance(region, GraphRegion):
        return {
            "type": "graph",
            "pieces": [
                {"xa": p.xa, "xb": p.xb, "lower": p.lower.coef.tolist(), "upper": p.upper.coef.tolist()}
                for p in region.pieces
            ],
        }
    return {"type": "disk", "cx": region.cx, "cy": region.cy, "r": region.r}


def _region_from_record(rec: dict):
    if rec["type"] == "graph":
        return GraphRegion(
            tuple(
                GraphPiece(p["xa"], p["xb"], Poly1D(p["lower"]), Poly1D(p["upper"]))
                for p in rec["pieces"]
            )
        )
    if rec["type"] == "disk":
        return DiskRegion(rec["cx"], rec["cy"], rec["r"])
    raise UnsupportedCaseError(f"unknown region type {rec['type']!r}")


def case_to_record(tc: TestCase) -> dict:
    return {
        "id": tc.id,
        "forms": list(tc.forms),
        "degree": tc.degree,
        "box": list(tc.box),
        "bbox": list(tc.bbox),
        "level_set": _levelset_record(tc.levelset),
        "chain": None
        if tc.chain is None
        else [
            {"control_points": s.control_points.tolist(), "weights": s.weights.tolist()}
            for s in tc.chain.segments
        ],
        "region": _region_record(tc.region),
        "references": {str(q): f"{v:.17e}" for q, v in sorted(tc.references.items())},
        "description": tc.description,
    }


def case_from_record(rec: dict) -> TestCase:
    chain = None
    if rec.get("chain"):
        chain = BoundaryChain(
            tuple(RationalBezier(s["control_points"], s["weights"]) for s in rec["chain"])
        )
    return TestCase(
        rec["id"],
        _levelset_from_record(rec["level_set"]),
        chain,
        as_rect(rec["box"]),
        int(rec["degree"]),
        tuple(float(v) for v in rec["bbox"]),
        _region_from_record(rec["region"]),
        {int(q): float(v) for q, v in rec["references"].items()},
        rec.get("description", ""),
    )


def write_catalog(path, cases: Iterable[TestCase] | None = None) -> None:
    cases = catalog() if cases is None else cases
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for tc in cases:
            fh.write(json.dumps(case_to_record(tc), sort_keys=True) + "\n")


def read_catalog(path) -> list[TestCase]:
    text = Path(path).read_text(encoding="utf-8")
    return [case_from_record(json.loads(line)) for line in text.splitlines() if line.strip()]
