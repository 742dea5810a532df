"""Command-line front-end: catalog inspection, rule export and the study drivers.

Every subcommand is a thin shim over the library; files are written by the
same writers the library exposes.
"""
from __future__ import annotations

import argparse
import sys

from . import __version__
from .bench import (
    DEFAULT_MESHES,
    IMPLICIT_METHODS,
    METHODS,
    build_rule,
    study_href,
    study_nqp,
    study_sweep,
    verify_catalog,
    write_csv,
    write_manifest,
    write_rule_csv,
    write_summary_csv,
)
from .catalog import case_ids, catalog, get_case, write_catalog
from .errors import CutQuadError, ParameterError, UnsupportedCaseError

SIGN_NOTE = "Active region convention: a level set phi describes the domain {phi <= 0}."

EXIT_OK, EXIT_FAILURES, EXIT_USAGE = 0, 1, 2


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _names(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    p = argparse.ArgumentParser(
        prog="cutquad", description="Quadrature rules for cut cells in 2D.\n\n" + SIGN_NOTE, formatter_class=fmt
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, text):
        return sub.add_parser(name, help=text, description=f"{text}\n\n{SIGN_NOTE}", formatter_class=fmt)

    c = add("catalog", "Inspect, export or verify the test-case catalog.")
    csub = c.add_subparsers(dest="action", required=True, metavar="ACTION")
    csub.add_parser("list", help="one line per case: id, boundary degree p, reference area",
                    description=f"List catalog cases.\n\n{SIGN_NOTE}", formatter_class=fmt)
    ce = csub.add_parser("export", help="write the catalog as JSON lines",
                         description=f"Export the catalog as JSON lines.\n\n{SIGN_NOTE}", formatter_class=fmt)
    ce.add_argument("--out", required=True, help="output path")
    csub.add_parser("verify", help="parametric/implicit agreement and oracle cross-check",
                    description=f"Verify every catalog entry.\n\n{SIGN_NOTE}", formatter_class=fmt)

    r = add("rule", "Export the quadrature rule of one case as x,y,w rows.")
    r.add_argument("--case", required=True, help="case id (see 'catalog list')")
    r.add_argument("--method", required=True, help=f"one of: {', '.join(METHODS)}")
    r.add_argument("--n", type=int, required=True, help="points per direction n_set")
    r.add_argument("--mesh", type=int, default=1, help="elements per direction (default 1)")
    r.add_argument("--level", type=int, default=None, help="subdivision depth for quadtree-type methods")
    r.add_argument("--out", required=True, help="output CSV path")

    n = add("study-nqp", "Single-element error study over n_set = 1..n-max.")
    n.add_argument("--case", required=True, help="case id")
    n.add_argument("--methods", type=_names, required=True, help="comma-separated method ids")
    n.add_argument("--q", type=int, default=0, help="integrand degree (default 0, the area)")
    n.add_argument("--n-max", type=int, default=None, help="largest n_set (default: exactness threshold + 1)")
    n.add_argument("--out", required=True, help="output CSV path")
    n.add_argument("--no-wall", action="store_true", help="leave the wall_ms column empty")

    h = add("study-href", "Uniform mesh refinement study at fixed n_set.")
    h.add_argument("--case", required=True, help="case id")
    h.add_argument("--methods", type=_names, required=True, help="comma-separated method ids")
    h.add_argument("--n", type=int, required=True, help="points per direction n_set")
    h.add_argument("--meshes", type=_ints, default=list(DEFAULT_MESHES),
                   help="comma-separated ascending element counts (default 1,2,4,8,16,32)")
    h.add_argument("--q", type=int, default=0, help="integrand degree (default 0)")
    h.add_argument("--level", type=int, default=None, help="subdivision depth for quadtree-type methods")
    h.add_argument("--out", required=True, help="output CSV path")
    h.add_argument("--no-wall", action="store_true", help="leave the wall_ms column empty")

    s = add("study-sweep", "Shifted-parabola robustness sweep on a fixed 8x8 mesh.")
    s.add_argument("--steps", type=int, default=1000, help="number of shifts (default 1000)")
    s.add_argument("--methods", type=_names, default=list(IMPLICIT_METHODS),
                   help=f"comma-separated method ids (default {','.join(IMPLICIT_METHODS)})")
    s.add_argument("--q", type=int, default=0, help="integrand degree (default 0)")
    s.add_argument("--out", required=True, help="per-step CSV path")
    s.add_argument("--summary", default=None, help="per-method summary CSV path (optional)")
    s.add_argument("--no-wall", action="store_true", help="leave the wall_ms column empty")
    return p


def _check_ids(case: str | None, methods) -> None:
    if case is not None:
        get_case(case)
    for m in methods:
        if m not in METHODS:
            raise UnsupportedCaseError(f"unknown method {m!r}; valid ids: {', '.join(METHODS)}")


def _catalog(args) -> int:
    if args.action == "list":
        for tc in catalog():
            print(f"{tc.id} p={tc.degree} area={tc.reference_area:.15g}")
        return EXIT_OK
    if args.action == "export":
        write_catalog(args.out)
        return EXIT_OK
    bad = 0
    for chk in verify_catalog():
        ok = chk.max_cross_check <= 1e-8 and not chk.form_mismatches
        bad += not ok
        print(f"{chk.case} mismatches={chk.form_mismatches} cross_check={chk.max_cross_check:.3e} "
              f"{'ok' if ok else 'FAIL'}")
    return EXIT_FAILURES if bad else EXIT_OK


def _rule(args) -> int:
    _check_ids(args.case, [args.method])
    rule, _ = build_rule(get_case(args.case), args.method, args.n, args.mesh, args.level)
    write_rule_csv(rule, args.out)
    return EXIT_OK


def _failures(records) -> int:
    bad = [r for r in records if not r.ok]
    for r in bad:
        print(f"failure: {r.case} {r.method} n_set={r.n_set} n_ele={r.n_ele}: {r.failure}", file=sys.stderr)
    return EXIT_FAILURES if bad else EXIT_OK


def _study_nqp(args) -> int:
    _check_ids(args.case, args.methods)
    recs = study_nqp(args.case, args.methods, args.q, args.n_max)
    write_csv(recs, args.out, wall=not args.no_wall)
    write_manifest(args.out, {"command": "study-nqp", "case": args.case, "methods": args.methods,
                              "q": args.q, "n_max": args.n_max})
    return _failures(recs)


def _study_href(args) -> int:
    _check_ids(args.case, args.methods)
    recs, fits = study_href(args.case, args.methods, args.n, args.meshes, args.q, args.level)
    write_csv(recs, args.out, wall=not args.no_wall)
    write_manifest(args.out, {"command": "study-href", "case": args.case, "methods": args.methods,
                              "n_set": args.n, "meshes": args.meshes, "q": args.q, "level": args.level})
    for m, fit in fits.items():
        print(f"{m} rate={'n/a' if fit is None else f'{fit.slope:.4f}'}")
    return _failures(recs)


def _study_sweep(args) -> int:
    _check_ids(None, args.methods)
    recs, summary = study_sweep(args.steps, args.methods, q=args.q)
    write_csv(recs, args.out, wall=not args.no_wall)
    write_manifest(args.out, {"command": "study-sweep", "steps": args.steps, "methods": args.methods,
                              "mesh": 8, "q": args.q})
    if args.summary:
        write_summary_csv(summary.values(), args.summary)
    for s in summary.values():
        print(f"{s.method} completed={s.completed} failures={s.failures} "
              f"mean={s.mean_error:.3e} max={s.max_error:.3e}")
    return _failures(recs)


COMMANDS = {
    "catalog": _catalog,
    "rule": _rule,
    "study-nqp": _study_nqp,
    "study-href": _study_href,
    "study-sweep": _study_sweep,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)  # exits with status 2 on usage errors
    try:
        return COMMANDS[args.command](args)
    except (UnsupportedCaseError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, UnsupportedCaseError) and "valid ids" not in str(exc):
            print(f"valid case ids: {', '.join(case_ids())}", file=sys.stderr)
        return EXIT_USAGE
    except CutQuadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURES
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURES


if __name__ == "__main__":
    sys.exit(main())
