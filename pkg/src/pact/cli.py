"""Command-line interface.

Subcommands: qos, solve, verify, sweep-liability, simulate.  Exit codes:
0 success, 1 bad inputs (parse or validation failures, fit failures),
2 infeasibility findings.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import InfeasibleMenuError, ValidationError
from .scenario import (
    load_scenario,
    read_menu_csv,
    run_qos,
    run_solve,
    run_sweep_liability,
    simulate_population,
    write_menu_csv,
    write_qos_csv,
    write_sim_csv,
    write_sweep_csv,
)
from .contracts import verify_feasibility

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INFEASIBLE = 2

# Menu CSVs carry 9 significant digits, and the selection constraints of
# an optimal menu bind with equality, so a re-read menu sits within about
# one quantization step of the constraint boundary.  Checks on CSV menus
# therefore default to a tolerance sized for the file format, not the
# in-memory 1e-9 default.
CSV_TOLERANCE = 1e-6


class _UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; 2 means "infeasibility
    # finding" here, so route usage problems through the validation path.
    def error(self, message: str):
        raise _UsageError(message)


def _fmt(x: float) -> str:
    return format(x + 0.0, ".9g")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pact", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_scenario_arg(p):
        p.add_argument("-c", "--scenario", required=True, help="scenario JSON file")

    p_qos = sub.add_parser("qos", help="score service configurations")
    add_scenario_arg(p_qos)
    p_qos.add_argument("-o", "--output", required=True, help="output directory")

    p_solve = sub.add_parser("solve", help="fit the cost curve and solve the menu")
    add_scenario_arg(p_solve)
    p_solve.add_argument(
        "--mode", choices=["second-best", "first-best"], default="second-best"
    )
    p_solve.add_argument(
        "--no-liability", action="store_true",
        help="exclude liability surcharges from the cost fit",
    )
    p_solve.add_argument("-o", "--output", required=True, help="output directory")

    p_verify = sub.add_parser("verify", help="check a menu against a scenario")
    add_scenario_arg(p_verify)
    p_verify.add_argument("-m", "--menu", required=True, help="menu CSV file")
    p_verify.add_argument(
        "--tolerance", type=float, default=CSV_TOLERANCE,
        help="feasibility slack tolerance (default sized for 9-digit CSVs)",
    )

    p_sweep = sub.add_parser("sweep-liability", help="re-solve across liability scales")
    add_scenario_arg(p_sweep)
    p_sweep.add_argument(
        "--multipliers", required=True,
        help="comma-separated liability multipliers, e.g. 0,0.5,1,1.5",
    )
    p_sweep.add_argument("-o", "--output", required=True, help="output directory")

    p_sim = sub.add_parser("simulate", help="simulate a drawn user population")
    add_scenario_arg(p_sim)
    p_sim.add_argument("-m", "--menu", required=True, help="menu CSV file")
    p_sim.add_argument("-n", type=int, required=True, help="number of draws")
    p_sim.add_argument("--seed", type=int, required=True, help="64-bit RNG seed")
    p_sim.add_argument(
        "--tolerance", type=float, default=CSV_TOLERANCE,
        help="feasibility slack tolerance (default sized for 9-digit CSVs)",
    )
    p_sim.add_argument("-o", "--output", required=True, help="output directory")

    return parser


def _cmd_qos(args) -> int:
    scenario = load_scenario(args.scenario)
    report = run_qos(scenario)
    write_qos_csv(scenario, report, Path(args.output) / "qos.csv")
    print(f"scored {len(scenario.services)} configurations "
          f"(throughput calibration x{_fmt(report.gamma_calibration)} applied to vendor GFLOPS)")
    for cfg, level, dev in zip(scenario.services, report.table.levels,
                               report.deviations):
        line = f"  k={cfg.id} q={_fmt(level.q)}"
        if dev is not None:
            line += f" expected={_fmt(cfg.expected_q)} deviation={_fmt(dev)}"
        if level.latency_warning:
            line += " [latency above 1 s: raw score clamped]"
        print(line)
    if report.max_abs_deviation is not None:
        print(f"max |deviation| = {_fmt(report.max_abs_deviation)}")
    for group in report.table.duplicate_groups:
        print(f"duplicate q within 1e-9 for configurations: {list(group)}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    scenario = load_scenario(args.scenario)
    include_liability = False if args.no_liability else None
    run = run_solve(scenario, mode=args.mode, include_liability=include_liability)
    write_menu_csv(run.result, Path(args.output) / "menu.csv")
    result = run.result
    print(f"mode={result.mode} types={len(result.per_type)} "
          f"cost_curve={run.curve.family} (rmse {_fmt(run.curve.fit_residual)})")
    print(f"expected_profit={_fmt(result.expected_profit)}")
    print(f"mean_user_utility={_fmt(run.expected_user_utility)}")
    print(f"social_welfare={_fmt(result.social_welfare)}")
    if result.ironed_segments:
        pooled = ", ".join(f"{lo + 1}..{hi + 1}" for lo, hi in result.ironed_segments)
        print(f"pooled type ranges: {pooled}")
    if run.feasibility is not None:
        print(f"feasibility: max_violation={_fmt(run.feasibility.max_violation)}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    scenario = load_scenario(args.scenario)
    menu = read_menu_csv(Path(args.menu))
    report = verify_feasibility(menu, scenario.types, scenario.valuation, args.tolerance)
    for k, slack in report.ir_violations:
        print(f"participation violated for type {k + 1}: slack {_fmt(slack)}")
    for (k, j), slack in report.ic_violations:
        print(f"type {k + 1} prefers item {j + 1}: slack {_fmt(slack)}")
    print(f"feasible={report.feasible} max_violation={_fmt(report.max_violation)} "
          f"(tolerance {_fmt(report.tolerance)})")
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def _cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario)
    try:
        multipliers = [float(tok) for tok in args.multipliers.split(",") if tok.strip()]
    except ValueError as exc:
        raise _UsageError(f"bad --multipliers value: {exc}") from exc
    rows = run_sweep_liability(scenario, multipliers)
    write_sweep_csv(rows, Path(args.output) / "sweep.csv")
    for row in rows:
        print(f"multiplier={_fmt(row.multiplier)} profit={_fmt(row.expected_profit)} "
              f"welfare={_fmt(row.social_welfare)}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    menu = read_menu_csv(Path(args.menu))
    outcome = simulate_population(scenario, menu, args.n, args.seed, args.tolerance)
    write_sim_csv(outcome, Path(args.output) / "sim.csv")
    print(f"n={outcome.n} seed={outcome.seed} rng={outcome.rng_id}")
    print(f"empirical_profit={_fmt(outcome.empirical_profit)}")
    print(f"empirical_user_utility={_fmt(outcome.empirical_user_utility)}")
    print(f"empirical_social_welfare={_fmt(outcome.empirical_social_welfare)}")
    return EXIT_OK


_COMMANDS = {
    "qos": _cmd_qos,
    "solve": _cmd_solve,
    "verify": _cmd_verify,
    "sweep-liability": _cmd_sweep,
    "simulate": _cmd_simulate,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except InfeasibleMenuError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
