"""Command-line front end.

    bdspectra spectrum  --kind srw --n 20
    bdspectra gap       --input chain.json --method a1 --trace
    bdspectra bounds    --kind metropolis_check --n 100 --a 1.0
    bdspectra separation --kind ehrenfest --n 2 --mode continuous --t 1.0
    bdspectra table1    --jobs 4

Exit status 0 on success, 2 when the command line or chain spec cannot be
parsed, 3 when a computation fails.  Floats are written with ``repr``, the
shortest decimal string that reads back to the same double.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .bounds import bottleneck_bounds, eta, gap_lower_bound, gap_lower_bound_additive, metropolis_gap_bounds
from .chain_model import KINDS, ChainSpec, from_birth_death, metropolis_check
from .solvers import TOL_ABS, TOL_REL, default_bracket, full_spectrum, solve_eigen_di, solve_gap_a1, solve_gap_a2
from .spectral_analysis import separation

TABLE_N = (10_000, 20_000, 30_000, 40_000, 50_000)
TABLE_A = (0.8, 0.9, 1.0, 1.1, 1.2)
FIGURE_M = 50
TABLE_REL_TOL = 1e-10


class SpecError(Exception):
    """The chain description could not be read."""


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def emit(columns, rows, fmt: str, out, extra: dict | None = None) -> None:
    """Write a table as CSV (header, LF endings) or JSON records."""
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
        return
    doc = dict(extra or {})
    doc["columns"] = list(columns)
    doc["rows"] = [{c: _jsonable(v) for c, v in zip(columns, r)} for r in rows]
    json.dump(doc, out, indent=2, allow_nan=False)
    out.write("\n")


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def load_spec(args) -> ChainSpec:
    """Chain spec from ``--input`` (JSON) or from the builder flags."""
    try:
        if args.input:
            with open(args.input, encoding="utf-8") as fh:
                return ChainSpec.from_json(fh.read())
        if not args.kind:
            raise SpecError("give --input FILE or --kind")
        d = {"kind": args.kind, "n": args.n, "a": args.a}
        if args.positions is not None:
            d["positions"] = _ints(args.positions)
        if args.epsilons is not None:
            d["epsilons"] = _floats(args.epsilons)
        return ChainSpec.from_dict(d)
    except SpecError:
        raise
    except (OSError, ValueError, TypeError) as exc:
        raise SpecError(str(exc)) from exc


def _build(spec: ChainSpec):
    try:
        return spec.path()
    except (ValueError, TypeError) as exc:
        raise SpecError(str(exc)) from exc


def _tols(args, tol_default=TOL_ABS, rel_default=TOL_REL):
    tol = tol_default if args.tol is None else args.tol
    rel = rel_default if args.rel_tol is None else args.rel_tol
    if tol < 0 or rel < 0 or not (tol > 0 or rel > 0):
        raise SpecError("tolerances must be non-negative and not both zero")
    return tol, rel


def _jobs(args) -> int:
    if args.jobs is None or args.jobs <= 0:
        return os.cpu_count() or 1
    return args.jobs


def cmd_spectrum(args, out) -> int:
    path = _build(load_spec(args))
    tol, rel = _tols(args)
    sp = full_spectrum(path, tol, rel, jobs=_jobs(args))
    rows = [(e.index, e.lower, e.upper, e.estimate, e.iterations) for e in sp.estimates]
    emit(("index", "lower", "upper", "estimate", "iterations"), rows, args.format, out, {"command": "spectrum", "n": path.n})
    return 0


def cmd_gap(args, out) -> int:
    path = _build(load_spec(args))
    tol, rel = _tols(args)
    method = args.method
    if args.index is not None and method == "a2":
        method = "di"
    if method == "a1":
        lam0 = args.lambda0 if args.lambda0 is not None else default_bracket(path)[1]
        est = solve_gap_a1(path, lam0, tol=tol if args.tol is not None else 1e-13)
    elif method == "a2":
        est = solve_gap_a2(path, tol=tol, rel_tol=rel)
    else:
        i = 1 if args.index is None else args.index
        if not 1 <= i <= path.n - 1:
            raise SpecError(f"--index must lie in 1..{path.n - 1}")
        est = solve_eigen_di(path, i, tol=tol, rel_tol=rel)
    meta = {"command": "gap", "method": method, "index": est.index, "lower": est.lower,
            "upper": est.upper, "estimate": est.estimate, "iterations": est.iterations}
    if args.trace:
        if method == "a1":
            rows = list(enumerate(est.history.tolist()))
            emit(("step", "lambda"), rows, args.format, out, meta)
        else:
            rows = [(k, lo, hi) for k, (lo, hi) in enumerate(est.history.tolist())]
            emit(("step", "lower", "upper"), rows, args.format, out, meta)
        return 0
    rows = [(method, est.index, est.lower, est.upper, est.estimate, est.iterations)]
    emit(("method", "index", "lower", "upper", "estimate", "iterations"), rows, args.format, out, {"command": "gap"})
    return 0


def cmd_bounds(args, out) -> int:
    spec = load_spec(args)
    path = _build(spec)
    gap = solve_gap_a2(path).estimate
    rows = []
    for name, val in (("max-min", gap_lower_bound(path)), ("additive", gap_lower_bound_additive(path))):
        rows.append((name, val, None, gap, val <= gap))
    br = None
    if spec.kind in ("metropolis_check", "metropolis_hat"):
        br = metropolis_gap_bounds(spec.n, spec.a, spec.kind.split("_")[1])
    elif spec.kind == "bottleneck":
        br = bottleneck_bounds(spec.n, spec.positions, spec.epsilons)
    if br is not None:
        rows.append((br.method, br.lower, br.upper, gap, gap in br))
    emit(("method", "lower", "upper", "gap", "contains"), rows, args.format, out, {"command": "bounds"})
    return 0


def cmd_separation(args, out) -> int:
    spec = load_spec(args)
    try:
        chain = spec.chain()
    except (ValueError, TypeError) as exc:
        raise SpecError(str(exc)) from exc
    if chain is None:
        raise SpecError(f"kind {spec.kind!r} has no transition rates; separation needs a chain")
    if args.mode == "discrete":
        if args.m is None:
            raise SpecError("discrete mode needs --m")
        time = args.m
    else:
        if args.t is None:
            raise SpecError("continuous mode needs --t")
        time = args.t
    val = separation(chain, time, args.mode)
    emit(("mode", "time", "separation"), [(args.mode, time, val)], args.format, out, {"command": "separation"})
    return 0


def table1_cell(n: int, a: float, rel_tol: float = TABLE_REL_TOL, tol: float = 0.0) -> tuple[float, float]:
    """Gap of the check-shaped Metropolis chain and its normalized product."""
    path = from_birth_death(metropolis_check(n, a))
    gap = solve_gap_a2(path, tol=tol, rel_tol=rel_tol).estimate
    return gap, gap * eta(-a, 1, n) * eta(a, 2, n + 1)


def cmd_table1(args, out) -> int:
    tol, rel = _tols(args, 0.0, TABLE_REL_TOL)
    if args.grid == "figure":
        last = args.m if args.m is not None else FIGURE_M
        ns = [100 * m for m in range(1, last + 1)]
    else:
        ns = _ints(args.n_list) if args.n_list else list(TABLE_N)
    avals = _floats(args.a_list) if args.a_list else list(TABLE_A)
    if not ns or not avals or min(ns) < 1 or min(avals) <= 0:
        raise SpecError("need n >= 1 and a > 0")
    cells = [(n, a) for a in avals for n in ns]
    run = lambda c: table1_cell(c[0], c[1], rel, tol)  # noqa: E731
    with ThreadPoolExecutor(max_workers=_jobs(args)) as ex:
        res = list(ex.map(run, cells))
    rows = [(n, a, g, v) for (n, a), (g, v) in zip(cells, res)]
    emit(("n", "a", "gap", "normalized"), rows, args.format, out, {"command": "table1", "grid": args.grid})
    return 0


COMMANDS = {
    "spectrum": cmd_spectrum,
    "gap": cmd_gap,
    "bounds": cmd_bounds,
    "separation": cmd_separation,
    "table1": cmd_table1,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", help="write here instead of standard output")
    common.add_argument("--tol", type=float, help="absolute bracket tolerance")
    common.add_argument("--rel-tol", type=float, help="relative bracket tolerance")
    common.add_argument("--jobs", type=int, default=0, help="worker threads (0: one per CPU)")

    chain = argparse.ArgumentParser(add_help=False)
    chain.add_argument("--input", help="chain spec JSON file")
    chain.add_argument("--kind", choices=KINDS)
    chain.add_argument("--n", type=int)
    chain.add_argument("--a", type=float)
    chain.add_argument("--positions", help="comma-separated bottleneck positions")
    chain.add_argument("--epsilons", help="comma-separated bottleneck conductances")

    p = argparse.ArgumentParser(prog="bdspectra", description="Spectra of birth-and-death chains.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common, chain], help="all eigenvalues")
    g = sub.add_parser("gap", parents=[common, chain], help="one eigenvalue")
    g.add_argument("--method", choices=("a1", "a2", "di"), default="a2")
    g.add_argument("--index", type=int, help="eigenvalue rank (implies --method di)")
    g.add_argument("--lambda0", type=float, help="start value for a1 (default: top of the bracket)")
    g.add_argument("--trace", action="store_true", help="emit the iteration history")
    sub.add_parser("bounds", parents=[common, chain], help="closed-form gap bounds")
    s = sub.add_parser("separation", parents=[common, chain], help="separation distance from an endpoint")
    s.add_argument("--mode", choices=("discrete", "continuous"), default="discrete")
    s.add_argument("--t", type=float, help="continuous time")
    s.add_argument("--m", type=int, help="discrete step count")
    t = sub.add_parser("table1", parents=[common], help="normalized Metropolis gaps over an (n, a) grid")
    t.add_argument("--grid", choices=("table", "figure"), default="table")
    t.add_argument("--n", dest="n_list", help="comma-separated n values (table grid)")
    t.add_argument("--a", dest="a_list", help="comma-separated a values")
    t.add_argument("--m", type=int, help="last m of the figure grid n = 100 m")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    buf = io.StringIO()
    try:
        status = COMMANDS[args.command](args, buf)
    except SpecError as exc:
        print(f"bdspectra: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"bdspectra: {exc}", file=sys.stderr)
        return 3
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return status
