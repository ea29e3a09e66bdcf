"""
Command-line interface: ``fcompare {compare,simulate,pipeline}``.

Exit codes: 0 success, 1 input error, 2 statistical degeneracy (infinite
variance, zero variance of the difference, or no retained replicates).
Degenerate comparisons still print a report, with nulls where a quantity
is undefined.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from typing import Optional

import numpy as np

from . import __version__, rng
from .estimator import (
    METHODS,
    DegenerateDifference,
    InfiniteVariance,
    compare,
    f_measure,
)
from .montecarlo import JointPmf, NoRetainedReps, PmfError, run_validation
from .pipeline import DatasetError, SplitError, read_dataset_csv, run_harness
from .tally import TallyError, read_csv, tally_from_records

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE = 0, 1, 2


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

def _plain(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _plain(obj.to_dict() if hasattr(obj, "to_dict") else dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    obj = _plain(obj) if _level == 0 else obj
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        items = [inner + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, float):
        return _fmt_float(obj)
    return json.dumps(obj)


def envelope(command: str, payload, seed: Optional[int] = None,
             warnings=(), status: str = "ok", error: Optional[str] = None) -> dict:
    return {"tool_version": __version__, "command": command, "seed": seed,
            "status": status, "error": error, "payload": _plain(payload),
            "warnings": list(warnings)}


def _flatten(d, prefix=""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        else:
            yield key, v


def _cell(v) -> str:
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return "-"
    return repr(v) if isinstance(v, float) else str(v)


def render_table(env: dict) -> str:
    p = env["payload"] or {}
    lines = [f"fcompare {env['tool_version']}  command={env['command']}  "
             f"seed={_cell(env['seed'])}  status={env['status']}"]
    if env["command"] == "simulate" and p:
        lines += _simulate_table(p)
    elif env["command"] == "pipeline" and p:
        lines += _pipeline_table(p)
    else:
        flat = [(k, v) for k, v in _flatten(p) if k != "warnings"]
        width = max((len(k) for k, _ in flat), default=0)
        lines += [f"{k:<{width}}  {_cell(v)}" for k, v in flat]
    if env["error"]:
        lines.append(f"error: {env['error']}")
    lines += [f"warning: {w}" for w in env["warnings"]]
    return "\n".join(lines)


def _columns(header, rows):
    cells = [header] + [[name] + [_cell(v) for v in vals] for name, *vals in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in cells]


def _simulate_table(p):
    head = [f"n={p['n']}  reps={p['reps_total']}  retained={p['reps_retained']}"]
    rows = [
        ("mean f1", p["mean_f1"], p["mean_f1"], p["mean_f1"]),
        ("mean f2", p["mean_f2"], p["mean_f2"], p["mean_f2"]),
        ("Var(f1)", p["emp_var1"], p["mean_analytic_var1"], p["mean_analytic_var1"]),
        ("Var(f2)", p["emp_var2"], p["mean_analytic_var2"], p["mean_analytic_var2"]),
        ("Cov(f1,f2)", p["emp_cov"], p["mean_analytic_cov"], 0.0),
        ("Corr(f1,f2)", p["emp_corr"], p["mean_analytic_corr"], 0.0),
        ("Var(f1-f2)", p["emp_var_diff"], p["mean_analytic_var_diff"], p["mean_independent_var_diff"]),
        ("z", p["emp_z"], p["mean_z_analytic"], p["mean_z_independent"]),
        ("s.e. Var(f1)", p["se_emp_var1"], p["se_analytic_var1"], p["se_analytic_var1"]),
        ("s.e. Var(f2)", p["se_emp_var2"], p["se_analytic_var2"], p["se_analytic_var2"]),
        ("s.e. Cov(f1,f2)", p["se_emp_cov"], p["se_analytic_cov"], 0.0),
    ]
    return head + _columns(["metric", "simulated", "jvesr", "independent"], rows)


def _pipeline_table(p):
    head = [f"c={p['c']}  c_minus={p['c_minus']}  n={p['n']}  "
            f"train={p['train_size']}  pool={p['pool_size']}  "
            f"pool_f1={_cell(p['pool_f1'])}  pool_f2={_cell(p['pool_f2'])}"]
    blocks = [p["simulated"], p["jvesr"], p["independent"]]
    keys = [("mean f1", "mean_f1"), ("mean f2", "mean_f2"), ("Var(f1)", "var1"),
            ("Var(f2)", "var2"), ("Corr(f1,f2)", "corr"), ("Var(f1-f2)", "var_diff"),
            ("z", "z"), ("degenerate", "n_degenerate")]
    rows = [(label, *(b[k] for b in blocks)) for label, k in keys]
    return head + _columns(["metric", "simulated", "jvesr", "independent"], rows)


def emit(env: dict, fmt: str, out=None):
    out = out or sys.stdout
    out.write((dumps(env) if fmt == "json" else render_table(env)) + "\n")


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _partial_compare(counts, method, alpha):
    """Report for a tally where some classifier has TP = 0."""
    def block(a):
        c = counts.confusion(a)
        try:
            f = f_measure(c["tp"], c["fp"], c["fn"])
        except ArithmeticError:
            f = None
        k = (c["fp"] + c["fn"]) / (2 * c["tp"]) if c["tp"] else None
        return {"f": f, "kappa": k, "var": None, "tp": c["tp"], "fp": c["fp"], "fn": c["fn"]}

    return {"stats1": block(1), "stats2": block(2), "cov12": None, "corr": None,
            "var_diff": None, "z": None, "p_value": None, "method": method,
            "n": counts.n, "alpha": alpha, "significant": None, "warnings": []}


def cmd_compare(args) -> int:
    try:
        counts = tally_from_records(read_csv(args.input))
    except (TallyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        report = compare(counts, method=args.method, alpha=args.alpha)
    except DegenerateDifference as exc:
        print(f"error: DegenerateDifference: {exc}", file=sys.stderr)
        emit(envelope("compare", exc.report, args.seed, exc.report.warnings,
                      "DegenerateDifference", str(exc)), args.format)
        return EXIT_DEGENERATE
    except InfiniteVariance as exc:
        print(f"error: InfiniteVariance: {exc}", file=sys.stderr)
        emit(envelope("compare", _partial_compare(counts, args.method, args.alpha),
                      args.seed, (), "InfiniteVariance", str(exc)), args.format)
        return EXIT_DEGENERATE
    emit(envelope("compare", report, args.seed, report.warnings), args.format)
    return EXIT_OK


def cmd_simulate(args) -> int:
    seed = rng.fresh_seed() if args.seed is None else args.seed
    try:
        pmf = JointPmf.load(args.pmf)
    except (PmfError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        result = run_validation(pmf, args.n, args.reps, seed, workers=args.workers)
    except NoRetainedReps as exc:
        print(f"error: NoRetainedReps: {exc}", file=sys.stderr)
        emit(envelope("simulate", None, seed, (), "NoRetainedReps", str(exc)), args.format)
        return EXIT_DEGENERATE
    warnings = []
    if result.reps_retained < result.reps_total:
        warnings.append(f"{result.reps_total - result.reps_retained} draws excluded (TP = 0)")
    emit(envelope("simulate", result, seed, warnings), args.format)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    seed = rng.fresh_seed() if args.seed is None else args.seed
    try:
        data = read_dataset_csv(args.data, args.label_col)
        report = run_harness(data, args.test_fraction, args.c, args.n, seed,
                             workers=args.workers)
    except (DatasetError, SplitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NoRetainedReps as exc:
        print(f"error: NoRetainedReps: {exc}", file=sys.stderr)
        emit(envelope("pipeline", None, seed, (), "NoRetainedReps", str(exc)), args.format)
        return EXIT_DEGENERATE
    emit(envelope("pipeline", report, seed, report.warnings), args.format)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {s}")
    return v


def _fraction(s):
    v = float(s)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {s}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fcompare", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--format", choices=("json", "table"), default="table")
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("compare", help="compare two classifiers from a z,l1,l2 CSV")
    p.add_argument("input")
    p.add_argument("--method", choices=METHODS, default="jvesr")
    p.add_argument("--alpha", type=_fraction, default=0.05)
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="Monte-Carlo check of the analytic formulas")
    p.add_argument("pmf", help="JSON object with keys '000'..'111'")
    p.add_argument("--n", type=_positive_int, default=1000)
    p.add_argument("--reps", type=_positive_int, default=10000)
    p.add_argument("--workers", type=_positive_int, default=1)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("pipeline", help="split/train/subsample experiment on a dataset")
    p.add_argument("data")
    p.add_argument("--label-col", required=True)
    p.add_argument("--test-fraction", type=_fraction, required=True)
    p.add_argument("--c", type=_positive_int, default=1200)
    p.add_argument("--n", type=_positive_int, default=1000)
    p.add_argument("--workers", type=_positive_int, default=1)
    common(p)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
