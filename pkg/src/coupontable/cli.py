"""Command-line front end.

Exit codes: 0 success, 2 validation error, 3 resource limit, 4 nonconvergence.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import io as cio
from .asymptotics import Regime, classify, limit_statement
from .diagnostics import diagnose, histogram_pmf, tv_distance
from .errors import CouponTableError, DomainError, SpecError
from .exact import EXACT, LOGFLOAT, cell_pmf, moments_recursive
from .model import CellRef, GrowthSpec, GrowthTable, MarginTable, MarginVector, eval_growth, reduce_cell
from .sampler import birthday_scenario, histogram, sample_cells
from .tables import DEFAULT_N_GRID, table

# simulate also reports the TV to the exact law when the support is this small
SIM_EXACT_SUPPORT = 20_000


def _int_list(text: str) -> list[int]:
    try:
        return [int(float(t)) if "e" in t.lower() else int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _int(text: str) -> int:
    return _int_list(text)[0]


def _add_input(p: argparse.ArgumentParser, growth_only: bool = False, required: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=required)
    if not growth_only:
        src.add_argument("--spec", type=Path, help="margin vector or margin table JSON")
        src.add_argument("--margins", type=_int_list, help="inline margins a_1,...,a_m (with --n)")
    src.add_argument("--growth", type=Path, help="growth spec or growth table JSON")
    p.add_argument("--cell", type=CellRef.parse, help="cell i,j,k for table specs (1-based)")


def _add_n(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--n", type=_int, help="grand total")
    g.add_argument("--n-grid", type=_int_list, help="comma-separated grand totals")


def _add_mode(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", dest="mode", action="store_const", const=EXACT, help="rational arithmetic")
    g.add_argument("--logfloat", dest="mode", action="store_const", const=LOGFLOAT, help="floating point")
    p.set_defaults(mode=None)


def _add_output(p: argparse.ArgumentParser, default_format: str) -> None:
    p.add_argument("--out", type=Path, help="output path (stdout when omitted)")
    p.add_argument("--format", choices=("csv", "json"), default=default_format)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coupontable", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", help="E_k and V_k along the collector chain")
    _add_input(p)
    _add_n(p)
    _add_output(p, "csv")

    p = sub.add_parser("pmf", help="exact law of the cell")
    _add_input(p)
    _add_n(p)
    _add_mode(p)
    _add_output(p, "csv")

    p = sub.add_parser("classify", help="limit regime of a growth spec")
    _add_input(p, growth_only=True)
    _add_output(p, "json")

    p = sub.add_parser("simulate", help="Monte Carlo draws of the cell")
    _add_input(p, required=False)
    _add_n(p)
    p.add_argument("--reps", type=_int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--birthday", type=_int, metavar="M",
                   help="ignore margins: M collectors each missing one coupon out of --n")
    p.add_argument("--out", type=Path, help="directory for histogram.csv and summary.json")

    p = sub.add_parser("diagnose", help="finite-n TV / KS certificates")
    _add_input(p, growth_only=True)
    _add_n(p)
    _add_mode(p)
    _add_output(p, "json")

    p = sub.add_parser("paper-tables", help="classify every cell of example table 2 or 3")
    p.add_argument("which", type=int, choices=(2, 3))
    p.add_argument("--n-grid", type=_int_list, default=list(DEFAULT_N_GRID))
    _add_mode(p)
    _add_output(p, "json")
    return parser


# ---------------------------------------------------------------------------
# input resolution


def _load(args):
    if getattr(args, "margins", None) is not None:
        if args.n is None:
            raise SpecError("--margins needs --n")
        return MarginVector(args.n, tuple(args.margins))
    path = args.spec if getattr(args, "spec", None) is not None else args.growth
    spec = cio.load_spec(path)
    if args.growth is not None and isinstance(spec, (MarginVector, MarginTable)):
        raise SpecError("--growth expects a growth spec or growth table")
    if getattr(args, "spec", None) is not None and isinstance(spec, (GrowthSpec, GrowthTable)):
        raise SpecError("--spec expects a concrete margin vector or table; use --growth")
    if isinstance(spec, (MarginTable, GrowthTable)):
        if args.cell is None:
            raise SpecError("table specs need --cell")
        if isinstance(spec, MarginTable):
            return reduce_cell(spec, args.cell)
        return spec.cell_growth(args.cell)
    if args.cell is not None:
        raise SpecError("--cell only applies to table specs")
    return spec


def _grid(args) -> list[int]:
    if getattr(args, "n_grid", None):
        return list(args.n_grid)
    if getattr(args, "n", None) is not None:
        return [args.n]
    return []


def _concrete(args) -> list[MarginVector]:
    spec = _load(args)
    if isinstance(spec, MarginVector):
        if args.n is not None and args.n != spec.n and args.margins is None:
            raise SpecError(f"--n {args.n} conflicts with the spec's n={spec.n}")
        return [spec]
    grid = _grid(args)
    if not grid:
        raise SpecError("growth specs need --n or --n-grid")
    return [eval_growth(spec, n) for n in grid]


def _emit(args, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
    else:
        cio.write_outputs({args.out: text})


# ---------------------------------------------------------------------------
# commands


def cmd_moments(args) -> None:
    rows = []
    for mv in _concrete(args):
        mom = moments_recursive(mv)
        for k, (e, v) in enumerate(zip(mom.E, mom.V), start=1):
            rows.append({"n": mv.n, "k": k, "a_k": mv.a[k - 1], "E": e, "V": v,
                         "E_float": float(e), "V_float": float(v)})
    if args.format == "json":
        _emit(args, cio.dumps(rows))
    else:
        body = [(r["n"], r["k"], r["a_k"], cio.fraction_str(r["E"]), cio.fraction_str(r["V"]),
                 f"{r['E_float']:.10g}", f"{r['V_float']:.10g}") for r in rows]
        _emit(args, cio.rows_to_csv(["n", "k", "a_k", "E", "V", "E_float", "V_float"], body))


def cmd_pmf(args) -> None:
    mvs = _concrete(args)
    pmfs = [(mv, cell_pmf(mv, args.mode)) for mv in mvs]
    if args.format == "json":
        _emit(args, cio.dumps([{"n": mv.n, "a": list(mv.a), **cio.pmf_to_dict(p)} for mv, p in pmfs]))
    elif len(pmfs) == 1:
        _emit(args, cio.pmf_to_csv(pmfs[0][1]))
    else:
        rows = [(mv.n, x, q) for mv, p in pmfs for x, q in cio.pmf_rows(p)]
        _emit(args, cio.rows_to_csv(["n", "x", "prob"], rows))


def cmd_classify(args) -> None:
    spec = _load(args)
    if not isinstance(spec, GrowthSpec):
        raise SpecError("classify needs a growth spec")
    out = classify(spec).to_dict()
    if args.format == "csv":
        _emit(args, cio.rows_to_csv(["regime", "rho", "transform"], [(out["regime"], out["rho"], out["transform"])]))
    else:
        _emit(args, cio.dumps(out))


def cmd_simulate(args) -> None:
    if args.workers < 1:
        raise DomainError("--workers must be at least 1")
    has_input = any(getattr(args, k) is not None for k in ("spec", "margins", "growth"))
    if args.birthday is not None:
        if args.n is None:
            raise SpecError("--birthday needs --n")
        if has_input or args.cell is not None:
            raise SpecError("--birthday replaces --spec/--margins/--growth")
        res = birthday_scenario(args.n, args.birthday, args.reps, args.seed, args.workers)
        summary = res.to_dict()
        hist = res.histogram
        summary.pop("histogram")
        summary["quantity"] = "m - n + X"
    else:
        if not has_input:
            raise SpecError("simulate needs --spec, --margins, --growth or --birthday")
        mvs = _concrete(args)
        if len(mvs) != 1:
            raise SpecError("simulate takes a single n")
        mv = mvs[0]
        draws = sample_cells(mv, args.reps, args.seed, args.workers)
        hist = histogram(draws)
        summary = {
            "n": mv.n,
            "a": list(mv.a),
            "reps": args.reps,
            "seed": args.seed,
            "mean": float(draws.mean()),
            "var": float(draws.var(ddof=1)) if args.reps > 1 else 0.0,
        }
        mom = moments_recursive(mv)
        summary["exact_mean"] = float(mom.mean)
        summary["exact_var"] = float(mom.variance)
        lo, hi = mv.support
        if hi - lo + 1 <= SIM_EXACT_SUPPORT:
            summary["tv_to_exact"] = float(tv_distance(histogram_pmf(hist), cell_pmf(mv).to_float()))
    hist_csv = cio.rows_to_csv(["value", "count"], sorted(hist.items()))
    if args.out is None:
        sys.stdout.write(cio.dumps(summary))
        return
    cio.write_outputs({args.out / "histogram.csv": hist_csv, args.out / "summary.json": cio.dumps(summary)})


def cmd_diagnose(args) -> None:
    spec = _load(args)
    grid = _grid(args)
    if not grid:
        raise SpecError("diagnose needs --n or --n-grid")
    c = classify(spec)
    reports = [diagnose(c, n, args.mode) for n in grid]
    if args.format == "csv":
        keys = ["regime", "n", "theta", "rho", "tv_exact", "tv_limit", "tv_bound", "ks"]
        _emit(args, cio.rows_to_csv(keys, [[r.get(k) for k in keys] for r in reports]))
    else:
        _emit(args, cio.dumps(reports[0] if len(reports) == 1 else reports))


def example_table_report(which: int, n_grid, mode=None) -> list[dict]:
    t = table(which)
    rows = []
    for v in t.cells():
        c = classify(t.cell_growth(v))
        st = limit_statement(c)
        certs = []
        for n in n_grid:
            rep = diagnose(c, n, mode)
            cert = {"n": n, "margins": rep["margins"]}
            if c.regime is Regime.NORMAL:
                cert["ks"] = rep["ks"]
            else:
                cert.update(tv_limit=rep["tv_limit"], tv_exact=rep["tv_exact"], tv_bound=rep["tv_bound"])
            certs.append(cert)
        rows.append({
            "cell": list(v.v),
            "regime": c.regime.value,
            "rho": c.rho,
            "transform": st.describe(),
            "certificates": certs,
        })
    return rows


def render_table(which: int, rows: list[dict]) -> str:
    """Text grid: one block per last index, rows i, columns j."""
    t = table(which)
    by_cell = {tuple(r["cell"]): r for r in rows}
    out = [f"Example table {which}: shape {'x'.join(map(str, t.shape))}"]
    width = max(len(r["transform"]) for r in rows if r["cell"][1] < t.shape[1])
    for k in range(1, t.shape[2] + 1):
        out.append(f"\n[k={k}]")
        for i in range(1, t.shape[0] + 1):
            cells = []
            for j in range(1, t.shape[1] + 1):
                r = by_cell[(i, j, k)]
                cells.append(f"({i},{j},{k}) {r['regime']:<10} {r['transform']:<{width}}")
            out.append(" | ".join(cells).rstrip())
    out.append("\ncertificates (TV to the limit law / to the moment-matched Poisson; KS for normal cells)")
    for r in rows:
        parts = []
        for cert in r["certificates"]:
            if "ks" in cert:
                parts.append(f"n={cert['n']:.0e} KS={cert['ks']:.2e}")
            else:
                exact = "-" if cert["tv_exact"] is None else f"{cert['tv_exact']:.2e}"
                parts.append(f"n={cert['n']:.0e} TV={cert['tv_limit']:.2e}/{exact}")
        out.append(f"({','.join(map(str, r['cell']))}) " + "  ".join(parts))
    return "\n".join(out) + "\n"


def cmd_paper_tables(args) -> None:
    rows = example_table_report(args.which, args.n_grid, args.mode)
    sys.stdout.write(render_table(args.which, rows))
    if args.out is None:
        return
    if args.format == "csv":
        body = []
        for r in rows:
            for cert in r["certificates"]:
                body.append(["".join(map(str, r["cell"])), r["regime"], r["rho"], r["transform"], cert["n"],
                             cert.get("tv_limit"), cert.get("tv_exact"), cert.get("tv_bound"), cert.get("ks")])
        text = cio.rows_to_csv(["cell", "regime", "rho", "transform", "n", "tv_limit", "tv_exact",
                                "tv_bound", "ks"], body)
    else:
        text = cio.dumps({"table": args.which, "n_grid": list(args.n_grid), "cells": rows})
    cio.write_outputs({args.out: text})


COMMANDS = {
    "moments": cmd_moments,
    "pmf": cmd_pmf,
    "classify": cmd_classify,
    "simulate": cmd_simulate,
    "diagnose": cmd_diagnose,
    "paper-tables": cmd_paper_tables,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except CouponTableError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return exc.exit_code
    except (ValueError, ArithmeticError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2
    except MemoryError:
        sys.stderr.write("error: out of memory\n")
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
