"""Command-line interface.

Subcommands::

    homogeneity test       Monte-Carlo P-values for one table
    homogeneity residuals  model, difference and standardized tables
    homogeneity exact      exact P-values by enumeration (small tables)
    homogeneity datasets   list or export the bundled example tables

Exit codes: 0 ok, 2 parse/usage error, 3 invalid table, 4 out of memory,
5 exact enumeration over budget.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from .datasets import DATASETS, PUBLISHED_M, get_dataset
from .montecarlo import (
    DEFAULT_BUDGET,
    BudgetExceededError,
    ResourceLimitError,
    SimulationConfig,
    estimate_pvalues,
    exact_pvalues,
)
from .statistics import parse_kinds
from .table import (
    HomogeneityError,
    TableParseError,
    TableValidationError,
    homogeneity_model,
    parse_table,
    residuals,
    table_to_csv,
)

EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_RESOURCE = 4
EXIT_BUDGET = 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _add_input(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", metavar="PATH", help="CSV file ('-' for stdin)")
    src.add_argument("--dataset", metavar="NAME", help=f"bundled table: {', '.join(DATASETS)}")
    p.add_argument("--no-header", action="store_true", help="CSV has no header row")
    p.add_argument("--no-row-labels", action="store_true", help="CSV has no row-label column")
    p.add_argument("--transpose", action="store_true",
                   help="swap rows and columns so the fixed-total groups are columns")
    p.add_argument("--json", action="store_true", help="emit JSON instead of text")


def _add_stats(p, default):
    p.add_argument("--stats", action="append", metavar="LIST",
                   help="comma-separated: chi2, g2, ft, frobenius, nll, nll-nocoef, all, "
                        f"cr:LAMBDA (default: {default})")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="homogeneity", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("test", help="Monte-Carlo P-values")
    _add_input(p)
    _add_stats(p, "all")
    p.add_argument("--m", type=int, default=PUBLISHED_M, help="number of simulations")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--tie-epsilon", type=float, default=1e-9)
    p.add_argument("--generator", choices=("cmwc", "splitmix"), default="cmwc")

    p = sub.add_parser("residuals", help="model, difference and standardized tables")
    _add_input(p)

    p = sub.add_parser("exact", help="exact P-values by enumeration")
    _add_input(p)
    _add_stats(p, "all")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                   help="maximum number of outcomes to enumerate")

    p = sub.add_parser("datasets", help="bundled example tables")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--list", action="store_true")
    g.add_argument("--emit", metavar="NAME", help="write the table as CSV")
    return parser


def _load(args):
    if args.dataset is not None:
        table = get_dataset(args.dataset).table
        return table.transpose() if args.transpose else table
    if args.input == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(args.input, encoding="utf-8", newline="") as fh:
                text = fh.read()
        except OSError as exc:
            raise TableParseError(f"cannot read {args.input}: {exc.strerror}") from None
    return parse_table(
        text,
        has_header=not args.no_header,
        has_row_labels=not args.no_row_labels,
        transpose=args.transpose,
    )


# ---------------------------------------------------------------------------
# rendering


def _labels(t):
    rows = t.row_labels or tuple(str(j + 1) for j in range(t.shape[0]))
    cols = t.col_labels or tuple(str(k + 1) for k in range(t.shape[1]))
    return rows, cols


def _grid(title, rows, cols, cells, total=None):
    """Right-aligned text table; ``cells`` is a list of lists of strings."""
    body = [list(r) for r in cells]
    labels = list(rows)
    if total is not None:
        labels.append("All")
        body.append(list(total))
    w0 = max(len(x) for x in labels + [""])
    widths = [max(len(c), *(len(r[k]) for r in body)) for k, c in enumerate(cols)]
    lines = [title, " " * w0 + "".join("  " + c.rjust(w) for c, w in zip(cols, widths))]
    rule = "-" * len(lines[1])
    lines.append(rule)
    for i, (label, row) in enumerate(zip(labels, body)):
        if total is not None and i == len(labels) - 1:
            lines.append(rule)
        lines.append(label.ljust(w0) + "".join("  " + v.rjust(w) for v, w in zip(row, widths)))
    return "\n".join(lines)


def _with_pct(values, pct, fmt):
    return [[f"{fmt(v)} ({p:.1f}%)" for v, p in zip(vr, pr)] for vr, pr in zip(values, pct)]


def _render_tables(t, model, report):
    rows, cols = _labels(t)
    pct = t.percentages()
    col_tot = t.col_totals
    parts = [
        _grid("Observed counts (column percentages)", rows, cols,
              _with_pct(t.counts, pct, str),
              [f"{c} (100.0%)" for c in col_tot]),
        _grid("Model of homogeneous proportions", rows, cols,
              _with_pct(model.expected, 100.0 * model.expected / col_tot, lambda v: f"{v:.1f}"),
              [f"{float(c):.1f} (100.0%)" for c in col_tot]),
        _grid("Differences (observed - model)", rows, cols,
              [[f"{v:.1f}" for v in r] for r in report.differences],
              # column sums vanish by construction; print rounding noise as 0.0
              [f"{v:.1f}" for v in np.round(report.differences.sum(axis=0), 1) + 0.0]),
        _grid("Differences divided by the square root of the model", rows, cols,
              [[f"{v:.1f}" for v in r] for r in report.standardized],
              ["0.0"] * len(cols)),
    ]
    return "\n\n".join(parts)


def _fmt_p(p):
    return f"{p:.3g}"


def _tables_json(t, model, report):
    return {
        "table": {
            "counts": t.counts.tolist(),
            "row_labels": list(t.row_labels) if t.row_labels else None,
            "col_labels": list(t.col_labels) if t.col_labels else None,
        },
        "model": model.expected.tolist(),
        "residuals": {
            "diff": report.differences.tolist(),
            "standardized": report.standardized.tolist(),
        },
    }


def _dump(obj):
    return json.dumps(obj, indent=2)


# ---------------------------------------------------------------------------
# commands


def cmd_test(args, out):
    t = _load(args)
    kinds = parse_kinds(args.stats or ["all"])
    cfg = SimulationConfig(
        m=args.m, seed=args.seed, workers=max(1, args.threads), kinds=kinds,
        tie_epsilon=args.tie_epsilon, generator=args.generator,
    )
    model = homogeneity_model(t)
    report = residuals(t, model)
    start = time.perf_counter()
    results = estimate_pvalues(t, cfg)
    seconds = time.perf_counter() - start
    if args.json:
        doc = _tables_json(t, model, report)
        doc["results"] = [r.to_dict() for r in results]
        doc["config"] = {**cfg.to_dict(), "common_random_numbers": True}
        doc["seconds"] = seconds
        out.write(_dump(doc) + "\n")
        return 0
    lines = [_render_tables(t, model, report), ""]
    lines.append(f"P-values from m = {cfg.m} simulations (seed {cfg.seed}, "
                 f"{cfg.generator}; all statistics share the simulated tables)")
    head = f"{'statistic':<12}{'observed':>14}{'P-value':>10}{'std.err':>11}{'exceed':>10}"
    lines += [head, "-" * len(head)]
    for r in results:
        lines.append(f"{r.kind.label:<12}{r.observed:>14.6g}{_fmt_p(r.p_hat):>10}"
                     f"{r.std_err:>11.2g}{r.exceedances:>10}")
    lines.append(f"\n{seconds:.2f} s")
    out.write("\n".join(lines) + "\n")
    return 0


def cmd_residuals(args, out):
    t = _load(args)
    model = homogeneity_model(t)
    report = residuals(t, model)
    if args.json:
        out.write(_dump(_tables_json(t, model, report)) + "\n")
    else:
        out.write(_render_tables(t, model, report) + "\n")
    return 0


def cmd_exact(args, out):
    t = _load(args)
    kinds = parse_kinds(args.stats or ["all"])
    results = exact_pvalues(t, kinds, budget=args.budget)
    if args.json:
        doc = {
            "table": {"counts": t.counts.tolist()},
            "results": [
                {"kind": r.kind.label, "observed": r.observed, "p_value": r.p_value,
                 "outcomes": r.outcomes}
                for r in results
            ],
        }
        out.write(_dump(doc) + "\n")
        return 0
    lines = [f"Exact P-values over {results[0].outcomes} outcomes"]
    head = f"{'statistic':<12}{'observed':>14}{'P-value':>12}"
    lines += [head, "-" * len(head)]
    for r in results:
        lines.append(f"{r.kind.label:<12}{r.observed:>14.6g}{r.p_value:>12.6g}")
    out.write("\n".join(lines) + "\n")
    return 0


def cmd_datasets(args, out):
    if args.list:
        for name, d in DATASETS.items():
            r, s = d.table.shape
            out.write(f"{name:<12}{r}x{s}  {d.source}\n")
        return 0
    out.write(table_to_csv(get_dataset(args.emit).table))
    return 0


_COMMANDS = {
    "test": cmd_test,
    "residuals": cmd_residuals,
    "exact": cmd_exact,
    "datasets": cmd_datasets,
}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args, out)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except MemoryError:
        print("error: out of memory", file=sys.stderr)
        return EXIT_RESOURCE
    except TableValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (HomogeneityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
