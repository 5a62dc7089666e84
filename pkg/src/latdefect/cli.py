"""Command line entry point: ``latdefect {sum,polygon,tropical,zeta,extended}``.

Exit codes: 0 success (exact or rigorously bounded result), 1 a requested
check failed, 2 heuristic result (``sum`` and ``zeta``), 3 divergence
suspected, 64 usage error, 65 polygon level too deep, 66 crease-tree edge
validation failed, 67 an evaluation could not be certified.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import emit, polygon, series, tropical
from ._numfmt import fmt_number
from .errors import (
    DivergenceSuspected,
    EdgeValidationFailed,
    LevelTooDeep,
    Uncertified,
    UnsupportedFormat,
    VertexCheckFailed,
    VertexOutsideDisc,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_HEURISTIC = 2
EXIT_DIVERGENT = 3
EXIT_USAGE = 64
EXIT_LEVEL = 65
EXIT_EDGE = 66
EXIT_UNCERTIFIED = 67

CUBES_TOLERANCE = 1e-3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _count(text: str) -> int:
    """Node budgets accept ``1000000``, ``1e6`` or ``2**20``."""
    try:
        if "**" in text:
            base, exp = text.split("**")
            value = int(base) ** int(exp)
        else:
            f = float(text)
            if not f.is_integer():
                raise ValueError
            value = int(f)
    except (ValueError, OverflowError):
        raise argparse.ArgumentTypeError(f"not an integer count: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("count must be >= 1")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError("must be a positive number")
    return value


def _precision(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 6 <= value <= 17:
        raise argparse.ArgumentTypeError("precision must be between 6 and 17 digits")
    return value


def _alpha_list(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if not values or any(not a > 0 for a in values):
        raise argparse.ArgumentTypeError("need one or more positive alphas")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=_precision, default=17, help="significant digits in output (6-17)")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker threads (results do not depend on it)")
    common.add_argument(
        "--deterministic",
        action="store_true",
        help="accepted for scripts; every run is already reproducible byte for byte",
    )
    common.add_argument("--output", "-o", type=Path, help="write the main result here instead of stdout")

    parser = _Parser(prog="latdefect", description="Defect sums, cropped polygons and the lattice envelope F.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sum", parents=[common], help="partial sums of f**alpha with remainders")
    s.add_argument("--power", "--alpha", dest="power", type=_positive_float, default=1.0)
    s.add_argument("--mode", choices=("exact", "truncated"), default="exact")
    s.add_argument("--depth", type=int, help="crop every corner of depth < DEPTH (exact mode)")
    s.add_argument("--max-nodes", type=_count, help="best-first expansion budget")
    s.add_argument("--threshold", type=_positive_float, help="crop corners whose key is >= THRESHOLD")
    s.add_argument("--key", choices=("gain", "remainder", "remainder2"), help="best-first priority")

    p = sub.add_parser("polygon", parents=[common], help="metrics and geometry of the cropped polygon P_n")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--max-level", type=int, default=polygon.MAX_LEVEL)
    p.add_argument("--svg", type=Path)
    p.add_argument("--csv", type=Path)
    p.add_argument("--json", type=Path)

    t = sub.add_parser("tropical", parents=[common], help="the envelope F, its crease tree and the cube-sum check")
    act = t.add_mutually_exclusive_group(required=True)
    act.add_argument("--locus", type=int, metavar="DEPTH")
    act.add_argument("--integrate", action="store_true")
    act.add_argument("--check-cubes", action="store_true")
    act.add_argument("--eval", nargs=2, type=float, metavar=("X", "Y"))
    act.add_argument("--grid", type=int, metavar="N", help="F on the N x N lattice of cell centres in [-1, 1]^2 inside the disc")
    t.add_argument("--svg", type=Path)
    t.add_argument("--json", type=Path)
    t.add_argument("--csv", type=Path)
    t.add_argument("--radial-cells", type=int, default=256)
    t.add_argument("--angular-cells", type=int, default=256)
    t.add_argument("--levels", type=int, default=3, help="Richardson refinement levels")
    t.add_argument("--threshold", type=_positive_float, default=1e-10, help="enumeration threshold for the cube sum")
    t.add_argument("--tie-tol", type=_positive_float, default=tropical.TIE_TOL)
    t.add_argument("--no-validate", action="store_true", help="skip midpoint validation of locus edges")

    z = sub.add_parser("zeta", parents=[common], help="truncated sums of f**alpha for several alphas (CSV)")
    z.add_argument("--alphas", type=_alpha_list, required=True)
    z.add_argument("--max-nodes", type=_count, default=2**20)
    z.add_argument("--threshold", type=_positive_float)

    e = sub.add_parser("extended", parents=[common], help="partial sums of the defect over SL(2, Z) (CSV)")
    e.add_argument("--N", dest="N", type=int, required=True, help="entry bound")
    return parser


# -- output helpers ------------------------------------------------------------------


def _write(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def _csv(header: list[str], rows: list[list], digits: int) -> str:
    def cell(x):
        if isinstance(x, float):
            return "" if math.isnan(x) else fmt_number(x, digits)
        return str(x)

    return "\n".join([",".join(header)] + [",".join(cell(x) for x in row) for row in rows]) + "\n"


# -- subcommands ---------------------------------------------------------------------


def cmd_sum(args) -> int:
    digits = args.precision
    if args.mode == "exact":
        if args.power not in (1.0, 2.0):
            raise UsageError("exact mode needs --power 1 or 2")
        if args.depth is not None and args.max_nodes is not None:
            raise UsageError("give at most one of --depth and --max-nodes")
        if args.threshold is not None:
            raise UsageError("--threshold applies to truncated mode")
        if args.depth is not None and args.depth < 0:
            raise UsageError("--depth must be >= 0")
        if args.max_nodes is not None:
            rep = series.exact_partial_sum(int(args.power), budget=args.max_nodes, key=args.key, threads=args.threads)
        else:
            depth = 8 if args.depth is None else args.depth
            rep = series.exact_partial_sum(int(args.power), depth=depth, threads=args.threads)
    else:
        if args.depth is not None:
            raise UsageError("--depth applies to exact mode")
        max_nodes = args.max_nodes
        if max_nodes is None and (args.threshold is None or args.power < 1):
            max_nodes = 10**6
        try:
            rep = series.truncated_sum(
                args.power, max_nodes=max_nodes, threshold=args.threshold, key=args.key or "gain", threads=args.threads
            )
        except DivergenceSuspected as exc:
            _write(emit.dumps(exc.report.to_dict(digits), digits), args.output)
            return EXIT_DIVERGENT
    _write(emit.dumps(rep.to_dict(digits), digits), args.output)
    return EXIT_HEURISTIC if rep.mode == "heuristic" else EXIT_OK


def cmd_polygon(args) -> int:
    poly = polygon.build_polygon(args.level, max_level=args.max_level)
    m = polygon.metrics(poly)
    doc = {
        "level": args.level,
        "sides": len(poly),
        "area": m.area,
        "perimeter": m.perimeter,
        "lattice_perimeter": m.lattice_perimeter,
    }
    for fmt in emit.POLYGON_FORMATS:
        path = getattr(args, fmt)
        if path is not None:
            path.write_text(emit.emit_geometry(poly, fmt, digits=args.precision))
    _write(emit.dumps(doc, args.precision), args.output)
    return EXIT_OK


def _grid_points(n: int) -> np.ndarray:
    c = -1.0 + (np.arange(n) + 0.5) * (2.0 / n)
    xx, yy = np.meshgrid(c, c, indexing="xy")
    pts = np.stack([xx.ravel(), yy.ravel()], axis=1)
    return pts[np.hypot(pts[:, 0], pts[:, 1]) <= 1.0 - tropical.RIM_MARGIN]


def cmd_tropical(args) -> int:
    digits = args.precision
    if args.locus is not None:
        if args.locus < 0:
            raise UsageError("--locus depth must be >= 0")
        graph = tropical.corner_locus(args.locus, validate=not args.no_validate, tie_tol=args.tie_tol)
        if args.svg is not None:
            args.svg.write_text(emit.emit_locus(graph, "svg", digits=digits))
        if args.json is not None:
            args.json.write_text(emit.emit_locus(graph, "json", digits=digits))
        doc = {
            "depth": args.locus,
            "vertices": len(graph.vertices),
            "edges": len(graph.edges),
            "tree": graph.is_tree(),
            "validated": graph.validated,
        }
        _write(emit.dumps(doc, digits), args.output)
        return EXIT_OK
    if args.eval is not None:
        fv = tropical.evaluate_F(tuple(args.eval), tie_tol=args.tie_tol)
        doc = {"p": list(fv.p), "F": fv.value, "active": [list(w) for w in fv.active], "certified": fv.certified}
        _write(emit.dumps(doc, digits), args.output)
        return EXIT_OK
    if args.grid is not None:
        if args.grid < 1:
            raise UsageError("--grid needs N >= 1")
        pts = _grid_points(args.grid)
        text = emit.emit_grid(pts, tropical.evaluate_F_many(pts, threads=args.threads), digits=digits)
        _write(text, args.csv or args.output)
        return EXIT_OK
    grid = dict(radial_cells=args.radial_cells, angular_cells=args.angular_cells, refinement_levels=args.levels)
    try:
        if args.integrate:
            q = tropical.integrate_F(**grid, threads=args.threads)
            doc = {
                "integral": q.integral,
                "error_estimate": q.error_estimate,
                "levels": list(q.levels),
                "grids": [list(g) for g in q.grids],
            }
            _write(emit.dumps(doc, digits), args.output)
            return EXIT_OK
        check = tropical.lemma_cubes_check(threshold=args.threshold, **grid, threads=args.threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    doc = check.to_dict() | {"tolerance": CUBES_TOLERANCE, "pass": check.residual <= CUBES_TOLERANCE}
    _write(emit.dumps(doc, digits), args.output)
    return EXIT_OK if check.residual <= CUBES_TOLERANCE else EXIT_CHECK_FAILED


def cmd_zeta(args) -> int:
    reports = series.zeta_scan(args.alphas, max_nodes=args.max_nodes, threshold=args.threshold)
    rows = [[fmt_number(a, args.precision), r.partial, r.remainder, r.mode, r.total, r.companion] for a, r in zip(args.alphas, reports)]
    _write(_csv(["alpha", "partial", "remainder", "mode", "total", "companion"], rows, args.precision), args.output)
    modes = {r.mode for r in reports}
    if "divergent" in modes:
        return EXIT_DIVERGENT
    return EXIT_HEURISTIC if "heuristic" in modes else EXIT_OK


def cmd_extended(args) -> int:
    if args.N < 1:
        raise UsageError("--N must be >= 1")
    rows = [[n, s] for n, s in series.extended_partial_sums(args.N)]
    _write(_csv(["N", "partial"], rows, args.precision), args.output)
    return EXIT_OK


COMMANDS = {
    "sum": cmd_sum,
    "polygon": cmd_polygon,
    "tropical": cmd_tropical,
    "zeta": cmd_zeta,
    "extended": cmd_extended,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except LevelTooDeep as exc:
        print(f"latdefect: {exc}", file=sys.stderr)
        return EXIT_LEVEL
    except EdgeValidationFailed as exc:
        print(f"latdefect: {exc}", file=sys.stderr)
        return EXIT_EDGE
    except (Uncertified, VertexCheckFailed, VertexOutsideDisc) as exc:
        print(f"latdefect: {exc}", file=sys.stderr)
        return EXIT_UNCERTIFIED
    except (UnsupportedFormat, ValueError) as exc:
        parser.error(str(exc))
