"""Command-line front end: solve, table2, sweep, simulate, verify.

All machine output is JSON or CSV, written to stdout or --out.  Exit codes:
0 success, 1 validation/usage error, 2 verification failure, 3 enumeration
budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from .model import (
    NumericMode,
    ProblemSpec,
    ValidationError,
    read_config,
    symmetric_binary_model,
    validate_model,
)
from .oracle import (
    BudgetExceeded,
    EnumerationBudget,
    LemmaReport,
    exact_success_probability,
    exhaustive_optimal,
    random_exact_model,
    verify_lemma1,
    verify_lemma2,
)
from .sim import SimConfig, monte_carlo
from .solver import (
    classical_threshold,
    compute_tables,
    extract_thresholds,
    pre_query_stop_thresholds,
    tables_to_csv,
    thresholds_to_json,
)

TABLE2_P_VALUES = ("0.50", "0.60", "0.70", "0.80", "0.90", "0.95", "0.98", "1.00")
TABLE2_N = 100
TABLE2_K = 10


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _mode(value: str) -> NumericMode:
    try:
        return NumericMode(value)
    except ValueError:
        raise UsageError(f"--mode must be 'float' or 'rational', got {value!r}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def table2_csv(mode: NumericMode = NumericMode.FLOAT64) -> str:
    """The reference threshold grid: n=100, K=10, symmetric two-level models.

    The decision columns follow the reference grid's convention (stop
    thresholds against the pre-query value row); at every reachable time they
    agree with the executable ThresholdSet.  See README for the distinction.
    """
    K = TABLE2_K
    header = (
        ["p", "r_f"]
        + [f"r_{k}" for k in range(1, K + 1)]
        + [f"s_{k}(1)" for k in range(1, K + 1)]
        + [f"s_{k}(2)" for k in range(1, K + 1)]
        + ["P_succ"]
    )
    lines = [",".join(header)]
    for literal in TABLE2_P_VALUES:
        p = Fraction(literal) if mode is NumericMode.EXACT_RATIONAL else float(literal)
        spec = ProblemSpec(TABLE2_N, K, symmetric_binary_model(p))
        tables = compute_tables(spec, mode)
        ts = extract_thresholds(tables)
        grid = pre_query_stop_thresholds(tables)
        cells = (
            [literal, str(ts.r_f)]
            + [str(v) for v in ts.r]
            + [str(grid[k][0]) for k in range(K)]
            + [str(grid[k][1]) for k in range(K)]
            + [f"{float(ts.success_probability):.4f}"]
        )
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _cmd_solve(args: argparse.Namespace) -> int:
    spec = read_config(args.config, args.mode)
    tables = compute_tables(spec, args.mode)
    ts = extract_thresholds(tables)
    if args.tables:
        Path(args.tables).write_text(tables_to_csv(tables))
    _emit(thresholds_to_json(ts), args.out)
    return 0


def _cmd_table2(args: argparse.Namespace) -> int:
    _emit(table2_csv(args.mode), args.out)
    return 0


def _parse_k_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(part) for part in text.split(":"))
    except ValueError:
        raise UsageError(f"--k-range must look like A:B, got {text!r}") from None
    if lo > hi:
        raise UsageError(f"--k-range has A > B: {text!r}")
    return lo, hi


def _cmd_sweep(args: argparse.Namespace) -> int:
    lo, hi = _parse_k_range(args.k_range)
    p_literals = [tok.strip() for tok in args.p_values.split(",") if tok.strip()]
    if not p_literals:
        raise UsageError("--p-values is empty")
    if args.n < 1 or lo < 0 or hi > args.n:
        raise ValidationError(f"K range {lo}:{hi} outside [0, n={args.n}]")
    ks = sorted(set(range(lo, hi + 1)) | {0})  # K=0 baseline always included
    lines = ["p,K,success"]
    for literal in sorted(p_literals, key=float):
        p = (
            Fraction(literal)
            if args.mode is NumericMode.EXACT_RATIONAL
            else float(literal)
        )
        model = symmetric_binary_model(p)
        for K in ks:
            tables = compute_tables(ProblemSpec(args.n, K, model), args.mode)
            success = float(tables.a(0, 0))
            lines.append(f"{literal},{K},{success:.10g}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    spec = read_config(args.config, args.mode)
    cfg = SimConfig(trials=args.trials, seed=args.seed, parallelism=args.parallelism)
    tables = compute_tables(spec, args.mode)
    ts = extract_thresholds(tables)
    result = monte_carlo(spec, ts, cfg)
    solver_value = float(ts.success_probability)
    gap = (result.estimate - solver_value) / result.stderr if result.stderr > 0 else 0.0
    doc = {
        "estimate": result.estimate,
        "stderr": result.stderr,
        "trials": result.trials,
        "mean_queries": result.mean_queries,
        "seed": args.seed,
        "solver_value": solver_value,
        "gap_stderr_units": gap,
    }
    _emit(json.dumps(doc, indent=2), args.out)
    return 0


def _lemma_checks(report: LemmaReport, instance: str) -> list[dict]:
    return [
        {
            "name": f"{report.lemma}/{check.name}",
            "instance": instance,
            "expected": "exact identity (0 deviation)",
            "actual": (
                f"worst deviation {float(check.worst_deviation):.3e}"
                + ("" if check.passed else f"; e.g. {check.failures[0]}")
            ),
            "pass": check.passed,
        }
        for check in report.checks
    ]


def _cmd_verify(args: argparse.Namespace) -> int:
    budget = EnumerationBudget()
    if args.max_n > budget.max_n:
        raise BudgetExceeded(f"max_n={args.max_n} exceeds enumeration cap {budget.max_n}")
    rng = random.Random(args.seed)
    suite = [random_exact_model(rng, M) for M in ([2, 3] * args.models)[: args.models]]
    checks: list[dict] = []

    for n in range(2, args.max_n + 1):
        checks.extend(_lemma_checks(verify_lemma1(n, budget), f"n={n}"))

    for i, model in enumerate(suite):
        n = min(args.max_n, 5)
        report = verify_lemma2(n, model, budget)
        checks.extend(_lemma_checks(report, f"n={n} model#{i}"))

    mode = NumericMode.EXACT_RATIONAL
    for i, model in enumerate(suite):
        for n in range(2, min(args.max_n, 6) + 1):
            for K in range(0, min(3, n) + 1):
                spec = ProblemSpec(n, K, model)
                tables = compute_tables(spec, mode)
                ts = extract_thresholds(tables)
                value = exact_success_probability(spec, ts, budget)
                checks.append(
                    {
                        "name": "strategy-enumeration-matches-solver",
                        "instance": f"n={n} K={K} model#{i}",
                        "expected": str(tables.a(0, 0)),
                        "actual": str(value),
                        "pass": value == tables.a(0, 0),
                    }
                )

    for i, model in enumerate(m for m in suite if m.M == 2):
        for n in range(2, min(args.max_n, 4) + 1):
            for K in range(0, min(2, n) + 1):
                spec = ProblemSpec(n, K, model)
                tables = compute_tables(spec, mode)
                best = exhaustive_optimal(spec, budget)
                checks.append(
                    {
                        "name": "exhaustive-policy-search-matches-solver",
                        "instance": f"n={n} K={K} model2#{i}",
                        "expected": str(tables.a(0, 0)),
                        "actual": str(best),
                        "pass": best == tables.a(0, 0),
                    }
                )

    uniform = validate_model(2, (Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 2), Fraction(1, 2)))
    n = min(args.max_n, 6)
    base = classical_threshold(n, mode)[1]
    for K in range(0, min(3, n) + 1):
        value = compute_tables(ProblemSpec(n, K, uniform), mode).a(0, 0)
        checks.append(
            {
                "name": "uninformative-model-collapses-to-classical",
                "instance": f"n={n} K={K}",
                "expected": str(base),
                "actual": str(value),
                "pass": value == base,
            }
        )

    passed = all(c["pass"] for c in checks)
    _emit(json.dumps({"passed": passed, "checks": checks}, indent=2), args.out)
    return 0 if passed else 2


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="secquery", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="compute thresholds for a config")
    solve.add_argument("--config", required=True)
    solve.add_argument("--mode", type=_mode, default=NumericMode.FLOAT64)
    solve.add_argument("--tables", help="also write full value tables as CSV")
    solve.add_argument("--out")

    table2 = sub.add_parser("table2", help="reproduce the reference threshold grid")
    table2.add_argument("--mode", type=_mode, default=NumericMode.FLOAT64)
    table2.add_argument("--out")

    sweep = sub.add_parser("sweep", help="success probability over a (p, K) grid")
    sweep.add_argument("--n", type=int, required=True)
    sweep.add_argument("--k-range", default="0:10")
    sweep.add_argument("--p-values", required=True, help="comma-separated reliabilities")
    sweep.add_argument("--mode", type=_mode, default=NumericMode.FLOAT64)
    sweep.add_argument("--out")

    simulate = sub.add_parser("simulate", help="Monte Carlo check of the solved strategy")
    simulate.add_argument("--config", required=True)
    simulate.add_argument("--trials", type=int, default=100_000)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--parallelism", type=int, default=1)
    simulate.add_argument("--mode", type=_mode, default=NumericMode.FLOAT64)
    simulate.add_argument("--out")

    verify = sub.add_parser("verify", help="run the exact verification suite")
    verify.add_argument("--max-n", type=int, default=5)
    verify.add_argument("--models", type=int, default=4)
    verify.add_argument("--seed", type=int, default=7)
    verify.add_argument("--out")
    return parser


_HANDLERS = {
    "solve": _cmd_solve,
    "table2": _cmd_table2,
    "sweep": _cmd_sweep,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _HANDLERS[args.command](args)
    except (UsageError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
