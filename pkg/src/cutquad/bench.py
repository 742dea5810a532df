"""Study drivers, the per-mesh rule pipeline, reference checks and CSV output."""
from __future__ import annotations

import json
import math
import platform
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .analysis import MACHINE_FLOOR, ConvergenceFit, fit_rate, required_points
from .catalog import TestCase, catalog, get_case, parabola_shifts, parabolas, scaled_monomial
from .dimreduce import GreenConfig, HeightConfig, green_rule, height_rule
from .errors import InsufficientDataError, ParameterError, UnsupportedCaseError
from .geometry import BackgroundMesh, CellStatus, classify_cells, halton_points
from .momentfit import MomentFitConfig, hmf_volume_rule, lagrange_momentfit_rule
from .oracle import scaled_monomial_integral
from .quadtree import QuadtreeConfig, quadtree_rule
from .rules import QuadratureRule, integrate

CSV_HEADER = "case,method,n_set,n_ele,level,n_qp_total,n_qp_cut,integral,reference,rel_error,wall_ms"
SUMMARY_HEADER = "method,completed,failures,mean_error,std_error,max_error,mean_nqp_cut,std_nqp_cut"
DEFAULT_MESHES = (1, 2, 4, 8, 16, 32)


# ---------------------------------------------------------------------------
# methods


@dataclass(frozen=True)
class Method:
    id: str
    default_level: int | None  # None: no subdivision depth
    mesh_free: bool = False
    make: Callable = field(default=None, repr=False)  # (n_set, level) -> per-cell rule function


def _quadtree(mode):
    def make(n, level):
        cfg = QuadtreeConfig(n, level, mode)
        return lambda ls, cell: quadtree_rule(ls, cell, cfg)

    return make


def _lagrange(n, level):
    cfg = MomentFitConfig(n, depth=level)
    return lambda ls, cell: lagrange_momentfit_rule(ls, cell, cfg)


def _hmf(n, level):
    cfg = MomentFitConfig(n)
    return lambda ls, cell: hmf_volume_rule(ls, cell, cfg)


def _height(n, level):
    cfg = HeightConfig(n)
    return lambda ls, cell: height_rule(ls, cell, cfg)


def _green(n, level):
    cfg = GreenConfig.from_n(n)
    return lambda chain: green_rule(chain, cfg)


METHODS: dict[str, Method] = {
    m.id: m
    for m in (
        Method("quadtree", 3, make=_quadtree("masked-gauss")),
        Method("tessellate", 3, make=_quadtree("tessellate")),
        Method("tessellate-direct", 0, make=_quadtree("tessellate")),
        Method("momentfit-lagrange", 3, make=_lagrange),
        Method("hmf", None, make=_hmf),
        Method("height", None, make=_height),
        Method("green", None, mesh_free=True, make=_green),
    )
}
IMPLICIT_METHODS = ("quadtree", "tessellate", "momentfit-lagrange", "hmf", "height")

# (n_set, level) per method for the parabola sweep
SWEEP_SETTINGS = {
    "quadtree": (2, 3),
    "tessellate": (1, 0),
    "momentfit-lagrange": (2, 3),
    "hmf": (2, None),
    "height": (2, None),
}


def get_method(method_id: str) -> Method:
    if method_id not in METHODS:
        raise UnsupportedCaseError(f"unknown method {method_id!r}; valid ids: {', '.join(METHODS)}")
    return METHODS[method_id]


def _level(m: Method, level: int | None) -> int | None:
    if m.default_level is None:
        return None
    if m.id == "tessellate-direct":
        return 0
    return m.default_level if level is None else level


def build_rule(
    tc: TestCase, method_id: str, n_set: int, n_ele: int = 1, level: int | None = None
) -> tuple[QuadratureRule, int]:
    """Rule for the whole case on an ``n_ele x n_ele`` mesh; also returns the cut-cell point count."""
    m = get_method(method_id)
    lvl = _level(m, level)
    if m.mesh_free:
        if tc.chain is None:
            raise UnsupportedCaseError(f"{method_id} needs a parametric boundary; {tc.id} has none")
        rule = m.make(n_set, lvl)(tc.chain)
        return rule, len(rule)
    if n_ele < 1:
        raise ParameterError("n_ele must be >= 1")
    per_cell = m.make(n_set, lvl)
    cells = BackgroundMesh.uniform(tc.box, n_ele).cells()
    status = classify_cells(tc.levelset, np.array(cells))
    rules, n_cut = [], 0
    for cell, st in zip(cells, status):
        if st == CellStatus.OUTSIDE:
            continue
        r = per_cell(tc.levelset, cell)
        if st == CellStatus.CUT:
            n_cut += len(r)
        rules.append(r)
    return QuadratureRule.concat(rules, method_id), n_cut


# ---------------------------------------------------------------------------
# records


@dataclass(frozen=True)
class StudyRecord:
    case: str
    method: str
    n_set: int
    n_ele: int
    level: int | None
    n_qp_total: int
    n_qp_cut: int
    integral: float
    reference: float
    rel_error: float  # raw, not floored
    wall_ms: float
    step: int = 0
    failure: str | None = None

    @property
    def reported_error(self) -> float:
        return max(self.rel_error, MACHINE_FLOOR) if math.isfinite(self.rel_error) else self.rel_error

    @property
    def ok(self) -> bool:
        return self.failure is None


def relative_error(value: float, reference: float) -> float:
    return abs(value - reference) / max(abs(reference), 1e-300)


def oracle_integral(tc: TestCase, q: int) -> float:
    """Reference integral of the scaled monomial of degree ``q`` over the case's region."""
    return scaled_monomial_integral(tc.region, tc.bbox, q)


def run_case(
    tc: TestCase, method_id: str, q: int, n_set: int, n_ele: int = 1, level: int | None = None, step: int = 0
) -> StudyRecord:
    """One rule generation plus integration; failures are captured in the record."""
    m = get_method(method_id)
    lvl = _level(m, level)
    ref = tc.reference(q)
    t0 = time.perf_counter()
    try:
        rule, n_cut = build_rule(tc, method_id, n_set, n_ele, lvl)
        value = integrate(rule, scaled_monomial(tc, q))
        if not math.isfinite(value):
            raise ArithmeticError("non-finite integral")
    except Exception as exc:  # a failing method is data, not a crash
        wall = 1e3 * (time.perf_counter() - t0)
        msg = f"{type(exc).__name__}: {exc}"
        return StudyRecord(tc.id, method_id, n_set, n_ele, lvl, 0, 0, math.nan, ref, math.nan, wall, step, msg)
    wall = 1e3 * (time.perf_counter() - t0)
    return StudyRecord(
        tc.id, method_id, n_set, n_ele, lvl, len(rule), n_cut, value, ref, relative_error(value, ref), wall, step
    )


def _sorted(records: Iterable[StudyRecord]) -> list[StudyRecord]:
    return sorted(records, key=lambda r: (r.case, r.method, r.n_set, r.n_ele, r.step))


def _resolve(case) -> TestCase:
    return case if isinstance(case, TestCase) else get_case(case)


# ---------------------------------------------------------------------------
# studies


def study_nqp(case, methods: Sequence[str], q: int = 0, n_max: int | None = None) -> list[StudyRecord]:
    """n_set = 1..n_max on a single element."""
    tc = _resolve(case)
    for m in methods:
        get_method(m)
    if n_max is None:
        n_max = required_points(tc.degree, q) + 1
    if n_max < 1:
        raise ParameterError("n_max must be >= 1")
    recs = [run_case(tc, m, q, n) for m in methods for n in range(1, n_max + 1)]
    return _sorted(recs)


def study_href(
    case, methods: Sequence[str], n_set: int, meshes: Sequence[int] = DEFAULT_MESHES, q: int = 0,
    level: int | None = None,
) -> tuple[list[StudyRecord], dict[str, ConvergenceFit | None]]:
    """Uniform mesh refinement at fixed n_set; returns records and a fitted rate per method."""
    tc = _resolve(case)
    for m in methods:
        get_method(m)
    meshes = list(meshes)
    if not meshes or any(b <= a for a, b in zip(meshes, meshes[1:])) or meshes[0] < 1:
        raise ParameterError("meshes must be positive and strictly ascending")
    recs = [run_case(tc, m, q, n_set, k, level) for m in methods for k in meshes]
    fits: dict[str, ConvergenceFit | None] = {}
    for m in methods:
        rows = [(r.n_ele, r.rel_error) for r in recs if r.method == m and r.ok]
        try:
            fits[m] = fit_rate(rows)
        except InsufficientDataError:
            fits[m] = None
    return _sorted(recs), fits


@dataclass(frozen=True)
class SweepSummary:
    method: str
    completed: int
    failures: int
    mean_error: float
    std_error: float
    max_error: float
    mean_nqp_cut: float
    std_nqp_cut: float

    @property
    def nonfinite(self) -> int:
        return self.failures


def summarize(records: Sequence[StudyRecord], method: str) -> SweepSummary:
    rows = [r for r in records if r.method == method]
    done = [r for r in rows if r.ok]
    if done:
        e = np.array([r.reported_error for r in done])
        n = np.array([r.n_qp_cut for r in done], dtype=float)
        stats = (float(e.mean()), float(e.std()), float(e.max()), float(n.mean()), float(n.std()))
    else:
        stats = (math.nan,) * 5
    return SweepSummary(method, len(done), len(rows) - len(done), *stats)


def study_sweep(
    steps: int = 1000, methods: Sequence[str] = IMPLICIT_METHODS, mesh: int = 8, q: int = 0
) -> tuple[list[StudyRecord], dict[str, SweepSummary]]:
    """Shifted-parabola robustness sweep on a fixed mesh."""
    for m in methods:
        if get_method(m).mesh_free:
            raise UnsupportedCaseError(f"{m} is mesh-free and not part of the sweep")
    shifts = parabola_shifts(steps)
    recs = []
    for k, s in enumerate(shifts):
        tc = parabolas(float(s), f"parabolas#{k:04d}")
        for m in methods:
            n, lvl = SWEEP_SETTINGS.get(m, (2, None))
            recs.append(run_case(tc, m, q, n, mesh, lvl, step=k))
    recs = _sorted(recs)
    return recs, {m: summarize(recs, m) for m in methods}


# ---------------------------------------------------------------------------
# output


def _real(v: float) -> str:
    return "" if not math.isfinite(v) else f"{v:.17g}"


def _error_field(r: StudyRecord) -> str:
    if not math.isfinite(r.rel_error):
        return ""
    return "2.22e-15" if r.rel_error <= MACHINE_FLOOR else f"{r.rel_error:.17g}"


def csv_lines(records: Iterable[StudyRecord], wall: bool = True) -> list[str]:
    out = [CSV_HEADER]
    for r in records:
        out.append(
            ",".join(
                [
                    r.case,
                    r.method,
                    str(r.n_set),
                    str(r.n_ele),
                    "" if r.level is None else str(r.level),
                    str(r.n_qp_total),
                    str(r.n_qp_cut),
                    _real(r.integral),
                    _real(r.reference),
                    _error_field(r),
                    _real(r.wall_ms) if wall else "",
                ]
            )
        )
    return out


def write_csv(records: Iterable[StudyRecord], path, wall: bool = True) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(csv_lines(records, wall)) + "\n")


def write_summary_csv(summaries: Iterable[SweepSummary], path) -> None:
    lines = [SUMMARY_HEADER]
    for s in summaries:
        lines.append(
            ",".join(
                [s.method, str(s.completed), str(s.failures)]
                + [_real(v) for v in (s.mean_error, s.std_error, s.max_error, s.mean_nqp_cut, s.std_nqp_cut)]
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_rule_csv(rule: QuadratureRule, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x,y,w\n")
        for (x, y), w in zip(rule.points, rule.weights):
            fh.write(f"{x:.17g},{y:.17g},{w:.17g}\n")


def write_manifest(csv_path, inputs: dict) -> None:
    import scipy

    data = {
        "inputs": inputs,
        "versions": {
            "cutquad": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "seeds": None,
    }
    with open(f"{csv_path}.manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# catalog verification


@dataclass(frozen=True)
class CatalogCheck:
    case: str
    form_mismatches: int | None  # None when the case has no parametric form
    max_cross_check: float
    per_degree: dict


def form_mismatches(tc: TestCase, n: int = 10_000, band: float = 1e-10) -> int:
    """Halton samples where the chain's winding number disagrees with sign(phi)."""
    if tc.chain is None:
        raise UnsupportedCaseError(f"{tc.id} has no parametric form")
    pts = halton_points(n, tc.box)
    phi = tc.levelset(pts[:, 0], pts[:, 1])
    gx, gy = tc.levelset.grad(pts[:, 0], pts[:, 1])
    dist = np.abs(phi) / np.maximum(np.hypot(gx, gy), 1e-300)
    bad = 0
    for (x, y), ph, d in zip(pts, phi, dist):
        if d <= band:
            continue
        bad += tc.chain.contains(x, y) != (ph <= 0.0)
    return int(bad)


def tessellation_estimate(tc: TestCase, qs: Sequence[int], depths=(11, 12), kink_depth: int = 12) -> dict:
    """Richardson-extrapolated linear-tessellation integrals, one per degree in ``qs``."""
    n = max(qs) + 1
    vals = []
    for d in depths:
        rule = quadtree_rule(tc.levelset, tc.box, QuadtreeConfig(n, d, "tessellate"), kink_depth=kink_depth)
        vals.append({q: integrate(rule, scaled_monomial(tc, q)) for q in qs})
    coarse, fine = vals
    return {q: (4.0 * fine[q] - coarse[q]) / 3.0 for q in qs}


def check_case(tc: TestCase, qs: Sequence[int] | None = None) -> CatalogCheck:
    qs = sorted(tc.references) if qs is None else list(qs)
    est = tessellation_estimate(tc, qs)
    per = {q: relative_error(est[q], tc.reference(q)) for q in qs}
    mism = form_mismatches(tc) if tc.chain is not None else None
    return CatalogCheck(tc.id, mism, max(per.values()), per)


def verify_catalog(cases: Iterable[TestCase] | None = None) -> list[CatalogCheck]:
    return [check_case(tc) for tc in (catalog() if cases is None else cases)]
