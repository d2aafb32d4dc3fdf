"""Scenario documents and experiment orchestration.

A scenario is a JSON document bundling everything one pricing experiment
needs: the physical environment, the service configurations, cost
constants, the user-type distribution, the valuation family, and solver
knobs.  The runners here score configurations, fit the cost curve, solve
for menus, sweep liability surcharges, and simulate drawn populations,
emitting CSV artifacts with a fixed 9-significant-digit format so that
repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .contracts import (
    DEFAULT_TOLERANCE,
    ContractMenu,
    FeasibilityReport,
    TypeSet,
    ValuationSpec,
    user_utility,
    verify_feasibility,
)
from .costs import CostCurve, CostParams, effective_cost, fit_cost_curve, service_cost
from .errors import InfeasibleMenuError, ValidationError
from .qos import Environment, QosTable, ServiceConfig, qos_table
from .rng import RNG_ID, sample_indices
from .solver import (
    SolveResult,
    SolverOptions,
    solve_first_best,
    solve_second_best,
)

__all__ = [
    "Scenario",
    "QosReport",
    "SolveRun",
    "SweepRow",
    "SimulationOutcome",
    "load_scenario",
    "bundled_scenario_path",
    "run_qos",
    "fit_scenario_curve",
    "run_solve",
    "run_sweep_liability",
    "simulate_menu",
    "simulate_population",
    "write_qos_csv",
    "write_menu_csv",
    "write_sweep_csv",
    "write_sim_csv",
    "read_menu_csv",
]


@dataclass(frozen=True)
class Scenario:
    """Validated experiment description; every runner takes one."""

    task_label: str
    environment: Environment
    services: tuple[ServiceConfig, ...]
    cost_params: CostParams
    types: TypeSet
    valuation: ValuationSpec
    cost_fit_family: str
    solver_options: SolverOptions
    liability_enabled: bool

    def __post_init__(self) -> None:
        if not self.services:
            raise ValidationError("services: at least one service configuration required")
        if self.cost_fit_family not in ("quadratic", "exponential"):
            raise ValidationError(
                f"cost_fit.family: unknown family {self.cost_fit_family!r}"
            )


@dataclass(frozen=True)
class QosReport:
    """Scored services plus deviations from any expected-q references."""

    table: QosTable
    deviations: tuple[float | None, ...]    # q - expected_q, aligned with services
    gamma_calibration: float

    @property
    def max_abs_deviation(self) -> float | None:
        known = [abs(d) for d in self.deviations if d is not None]
        return max(known) if known else None


@dataclass(frozen=True)
class SolveRun:
    """A solved scenario: fitted curve, menu result, feasibility report."""

    result: SolveResult
    curve: CostCurve
    feasibility: FeasibilityReport | None   # None for the first-best mode
    expected_user_utility: float


@dataclass(frozen=True)
class SweepRow:
    multiplier: float
    expected_profit: float
    mean_q: float
    mean_p: float
    social_welfare: float


@dataclass(frozen=True)
class SimulationOutcome:
    """Aggregates of n simulated users drawing their preferred items.

    Counts are indexed by selected menu item.  Deterministic given
    (menu, types, n, seed); the draw algorithm is recorded in rng_id.
    """

    n: int
    seed: int
    rng_id: str
    selection_counts: tuple[int, ...]
    empirical_profit: float
    empirical_user_utility: float
    empirical_social_welfare: float

    def __post_init__(self) -> None:
        if sum(self.selection_counts) != self.n:
            raise ValidationError("selection counts must sum to n")


# ---------------------------------------------------------------------------
# Document loading
# ---------------------------------------------------------------------------

_TOP_KEYS = {
    "task_label", "environment", "services", "cost_params", "types",
    "valuation", "cost_fit", "solver", "liability_enabled",
}
_ENV_KEYS = {
    "rate_bps", "alpha_tok", "alpha_detok", "tokens_per_kb_in",
    "tokens_per_kb_out", "delta", "gamma_calibration",
}
_SERVICE_KEYS = {
    "id", "d_in", "d_out", "beta", "n_layer", "n_ctx", "n_attn",
    "satisfaction", "gamma_gflops", "liability", "model_label", "expected_q",
}
_COST_KEYS = {"flop_price", "hw_fee", "model_fee"}
_TYPES_KEYS = {"thetas", "pmf"}
_VALUATION_KEYS = {"family", "a", "b"}
_COST_FIT_KEYS = {"family"}
_SOLVER_KEYS = {"scalar_tolerance", "grid_step"}


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ValidationError(f"{where}: unknown field(s) {', '.join(unknown)}")


def _as_float(value: object, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{where}: expected a number")
    return float(value)


def _as_int(value: object, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{where}: expected an integer")
    return value


def _as_str(value: object, where: str) -> str:
    if not isinstance(value, str):
        raise ValidationError(f"{where}: expected a string")
    return value


def _float_fields(obj: dict, where: str) -> dict:
    return {key: _as_float(val, f"{where}.{key}") for key, val in obj.items()}


def _require(obj: dict, field_name: str, where: str):
    if field_name not in obj:
        raise ValidationError(f"{where}: missing required field {field_name!r}")
    return obj[field_name]


def scenario_from_dict(doc: dict) -> Scenario:
    """Build and validate a Scenario from a parsed document."""
    _check_keys(doc, _TOP_KEYS, "scenario")
    for required in ("services", "types"):
        if required not in doc:
            raise ValidationError(f"scenario: missing required field {required!r}")

    task_label = _as_str(doc.get("task_label", ""), "task_label")

    env_doc = doc.get("environment", {})
    _check_keys(env_doc, _ENV_KEYS, "environment")
    environment = Environment(**_float_fields(env_doc, "environment"), task_label=task_label)

    services_doc = doc["services"]
    if not isinstance(services_doc, list) or not services_doc:
        raise ValidationError("services: expected a nonempty array")
    services = []
    for i, svc in enumerate(services_doc):
        where = f"services[{i}]"
        _check_keys(svc, _SERVICE_KEYS, where)
        kwargs = dict(
            id=_as_int(svc.get("id", i + 1), f"{where}.id"),
            d_in=_as_float(_require(svc, "d_in", where), f"{where}.d_in"),
            d_out=_as_float(_require(svc, "d_out", where), f"{where}.d_out"),
            beta=_as_float(_require(svc, "beta", where), f"{where}.beta"),
            n_layer=_as_int(_require(svc, "n_layer", where), f"{where}.n_layer"),
            n_ctx=_as_int(_require(svc, "n_ctx", where), f"{where}.n_ctx"),
            n_attn=_as_int(_require(svc, "n_attn", where), f"{where}.n_attn"),
            satisfaction=_as_float(_require(svc, "satisfaction", where), f"{where}.satisfaction"),
            gamma_gflops=_as_float(_require(svc, "gamma_gflops", where), f"{where}.gamma_gflops"),
            liability=_as_float(svc.get("liability", 0.0), f"{where}.liability"),
            model_label=_as_str(svc.get("model_label", ""), f"{where}.model_label"),
        )
        if svc.get("expected_q") is not None:
            kwargs["expected_q"] = _as_float(svc["expected_q"], f"{where}.expected_q")
        services.append(ServiceConfig(**kwargs))

    cost_doc = doc.get("cost_params", {})
    _check_keys(cost_doc, _COST_KEYS, "cost_params")
    cost_params = CostParams(**_float_fields(cost_doc, "cost_params"))

    types_doc = doc["types"]
    _check_keys(types_doc, _TYPES_KEYS, "types")
    for required in ("thetas", "pmf"):
        if required not in types_doc:
            raise ValidationError(f"types: missing required field {required!r}")
        if not isinstance(types_doc[required], list):
            raise ValidationError(f"types.{required}: expected an array")
    types = TypeSet(
        thetas=tuple(_as_float(x, "types.thetas") for x in types_doc["thetas"]),
        pmf=tuple(_as_float(x, "types.pmf") for x in types_doc["pmf"]),
    )

    val_doc = doc.get("valuation", {})
    _check_keys(val_doc, _VALUATION_KEYS, "valuation")
    valuation = ValuationSpec(
        family=_as_str(val_doc.get("family", "log"), "valuation.family"),
        a=_as_float(val_doc.get("a", 1.0), "valuation.a"),
        b=_as_float(val_doc["b"], "valuation.b") if "b" in val_doc else None,
    )

    fit_doc = doc.get("cost_fit", {})
    _check_keys(fit_doc, _COST_FIT_KEYS, "cost_fit")
    cost_fit_family = _as_str(fit_doc.get("family", "quadratic"), "cost_fit.family")

    solver_doc = doc.get("solver", {})
    _check_keys(solver_doc, _SOLVER_KEYS, "solver")
    solver_options = SolverOptions(**_float_fields(solver_doc, "solver"))

    liability_enabled = doc.get("liability_enabled", False)
    if not isinstance(liability_enabled, bool):
        raise ValidationError("liability_enabled: expected true or false")

    return Scenario(
        task_label=task_label,
        environment=environment,
        services=tuple(services),
        cost_params=cost_params,
        types=types,
        valuation=valuation,
        cost_fit_family=cost_fit_family,
        solver_options=solver_options,
        liability_enabled=liability_enabled,
    )


def load_scenario(source: str | Path | dict) -> Scenario:
    """Load a scenario from a JSON file path or an already-parsed dict."""
    if isinstance(source, dict):
        return scenario_from_dict(source)
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: top level must be an object")
    return scenario_from_dict(doc)


def bundled_scenario_path(name: str = "table1") -> Path:
    """Path of a scenario document shipped with the package."""
    return Path(str(resources.files("pact") / "data" / f"{name}.scenario"))


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------


def run_qos(scenario: Scenario) -> QosReport:
    """Score every service and compare against expected-q references."""
    table = qos_table(list(scenario.services), scenario.environment)
    deviations = tuple(
        (level.q - cfg.expected_q) if cfg.expected_q is not None else None
        for cfg, level in zip(scenario.services, table.levels)
    )
    return QosReport(table, deviations, scenario.environment.gamma_calibration)


def cost_points(
    scenario: Scenario,
    include_liability: bool,
    multiplier: float = 1.0,
) -> list[tuple[float, float]]:
    """(q, cost) pairs for curve fitting, liability scaled by multiplier."""
    if multiplier < 0:
        raise ValidationError("liability multiplier must be >= 0")
    table = qos_table(list(scenario.services), scenario.environment)
    points = []
    for cfg, level in zip(scenario.services, table.levels):
        breakdown = service_cost(cfg, scenario.environment, scenario.cost_params)
        cost = breakdown.total - breakdown.liability_cost
        if include_liability:
            cost += multiplier * breakdown.liability_cost
        points.append((level.q, cost))
    return points


def fit_scenario_curve(
    scenario: Scenario,
    include_liability: bool | None = None,
    multiplier: float = 1.0,
) -> CostCurve:
    """Fit the scenario's cost curve; liability per the scenario flag
    unless overridden."""
    if include_liability is None:
        include_liability = scenario.liability_enabled
    return fit_cost_curve(
        cost_points(scenario, include_liability, multiplier), scenario.cost_fit_family
    )


def run_solve(
    scenario: Scenario,
    mode: str = "second-best",
    include_liability: bool | None = None,
) -> SolveRun:
    """Fit the cost curve and solve for the menu in the requested mode."""
    if mode not in ("second-best", "first-best"):
        raise ValidationError(f"mode must be second-best or first-best, got {mode!r}")
    curve = fit_scenario_curve(scenario, include_liability)
    if mode == "second-best":
        result = solve_second_best(
            scenario.types, scenario.valuation, curve, scenario.solver_options
        )
        report = verify_feasibility(result.menu, scenario.types, scenario.valuation)
    else:
        result = solve_first_best(
            scenario.types, scenario.valuation, curve, scenario.solver_options
        )
        report = None
    expected_u = 0.0
    for mass, outcome in zip(scenario.types.pmf, result.per_type):
        expected_u += mass * outcome.user_utility
    return SolveRun(result, curve, report, expected_u)


def run_sweep_liability(
    scenario: Scenario, multipliers: list[float]
) -> tuple[SweepRow, ...]:
    """Re-fit and re-solve the second-best menu per liability multiplier.

    Multiplier m scales every configuration's liability surcharge before
    fitting; m=0 reproduces the liability-disabled solve.
    """
    if not multipliers:
        raise ValidationError("at least one multiplier required")
    rows = []
    for m in multipliers:
        if m < 0:
            raise ValidationError("liability multipliers must be >= 0")
        curve = fit_cost_curve(
            cost_points(scenario, include_liability=True, multiplier=m),
            scenario.cost_fit_family,
        )
        result = solve_second_best(
            scenario.types, scenario.valuation, curve, scenario.solver_options
        )
        mean_q = mean_p = 0.0
        for mass, (q, p) in zip(scenario.types.pmf, result.menu.items):
            mean_q += mass * q
            mean_p += mass * p
        rows.append(
            SweepRow(m, result.expected_profit, mean_q, mean_p, result.social_welfare)
        )
    return tuple(rows)


def simulate_menu(
    types: TypeSet,
    valuation: ValuationSpec,
    curve: CostCurve,
    menu: ContractMenu,
    n: int,
    seed: int,
    tolerance: float = DEFAULT_TOLERANCE,
) -> SimulationOutcome:
    """Draw n users from the type distribution and let each pick its
    favorite item.

    The menu must be feasible; simulating an infeasible menu would just
    measure the tie-break rule.  Each simulated user's pick reduces to
    its type's best response, so draws aggregate into type counts.
    Indifference within ``tolerance`` resolves toward the higher item:
    an optimal menu's selection constraints bind with equality, so after
    CSV quantization the designated item can trail the one below it by a
    rounding step, and exact argmax would misread that as a preference.
    """
    if n < 1:
        raise ValidationError("simulation needs n >= 1 draws")
    report = verify_feasibility(menu, types, valuation, tolerance)
    if not report.feasible:
        raise InfeasibleMenuError(
            f"menu is infeasible (max violation {report.max_violation:g}); "
            "simulation requires a feasible menu"
        )

    picks = []
    for theta in types.thetas:
        utilities = [user_utility(theta, valuation, item) for item in menu.items]
        top = max(utilities)
        picks.append(max(j for j, u in enumerate(utilities) if u >= top - tolerance))
    margins = [p - effective_cost(curve, q) for q, p in menu.items]
    utilities = [
        user_utility(theta, valuation, menu.items[pick])
        for theta, pick in zip(types.thetas, picks)
    ]

    draws = sample_indices(types.pmf, n, seed)
    type_counts = np.bincount(draws, minlength=types.k)

    selection_counts = [0] * menu.k
    profit = welfare_u = 0.0
    for k, count in enumerate(int(c) for c in type_counts):
        selection_counts[picks[k]] += count
        profit += count * margins[picks[k]]
        welfare_u += count * utilities[k]
    return SimulationOutcome(
        n=n,
        seed=seed,
        rng_id=RNG_ID,
        selection_counts=tuple(selection_counts),
        empirical_profit=profit / n,
        empirical_user_utility=welfare_u / n,
        empirical_social_welfare=(profit + welfare_u) / n,
    )


def simulate_population(
    scenario: Scenario,
    menu: ContractMenu,
    n: int,
    seed: int,
    tolerance: float = DEFAULT_TOLERANCE,
) -> SimulationOutcome:
    """Simulate a drawn population against a menu, costing it with the
    scenario's fitted curve."""
    curve = fit_scenario_curve(scenario)
    return simulate_menu(
        scenario.types, scenario.valuation, curve, menu, n, seed, tolerance
    )


# ---------------------------------------------------------------------------
# CSV artifacts: '.' decimal separator, 9 significant digits, LF endings
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(x + 0.0, ".9g")   # +0.0 normalizes any negative zero


def _write_rows(path: Path, header: list[str], rows: list[list[str]],
                preamble: list[str] | None = None) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in preamble or []:
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_qos_csv(scenario: Scenario, report: QosReport, path: Path) -> None:
    header = ["k", "d_in", "d_out", "t_tran", "t_tok", "t_inf", "t_total", "A", "q_raw", "q"]
    rows = []
    for cfg, level in zip(scenario.services, report.table.levels):
        lat = level.latency
        rows.append([
            str(cfg.id), _fmt(cfg.d_in), _fmt(cfg.d_out),
            _fmt(lat.t_tran), _fmt(lat.t_tok), _fmt(lat.t_inf), _fmt(lat.t_total),
            _fmt(level.satisfaction), _fmt(level.q_raw), _fmt(level.q),
        ])
    _write_rows(path, header, rows)


def _pooled_block_ids(result: SolveResult) -> list[int]:
    k = result.menu.k
    starts = [True] * k
    for lo, hi in result.ironed_segments:
        for idx in range(lo + 1, hi + 1):
            starts[idx] = False
    ids, current = [], 0
    for idx in range(k):
        if starts[idx]:
            current += 1
        ids.append(current)
    return ids


def write_menu_csv(result: SolveResult, path: Path) -> None:
    header = ["type_index", "theta", "q", "p", "user_utility", "margin", "pooled_block_id"]
    block_ids = _pooled_block_ids(result)
    rows = []
    for i, outcome in enumerate(result.per_type):
        rows.append([
            str(i + 1), _fmt(outcome.theta), _fmt(outcome.q), _fmt(outcome.p),
            _fmt(outcome.user_utility), _fmt(outcome.margin), str(block_ids[i]),
        ])
    _write_rows(path, header, rows)


def write_sweep_csv(rows: tuple[SweepRow, ...], path: Path) -> None:
    header = ["multiplier", "expected_profit", "mean_q", "mean_p", "social_welfare"]
    _write_rows(path, header, [
        [_fmt(r.multiplier), _fmt(r.expected_profit), _fmt(r.mean_q),
         _fmt(r.mean_p), _fmt(r.social_welfare)]
        for r in rows
    ])


def write_sim_csv(outcome: SimulationOutcome, path: Path) -> None:
    header = ["type_index", "count", "empirical_share"]
    rows = [
        [str(i + 1), str(count), _fmt(count / outcome.n)]
        for i, count in enumerate(outcome.selection_counts)
    ]
    preamble = [f"# rng={outcome.rng_id} seed={outcome.seed} n={outcome.n}"]
    _write_rows(path, header, rows, preamble)


def read_menu_csv(path: Path) -> ContractMenu:
    """Read a menu back from the menu.csv schema (q and p columns)."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(line for line in fh if not line.startswith("#"))
            items = []
            for row in reader:
                if row.get("q") is None or row.get("p") is None:
                    raise ValidationError(f"{path}: menu rows need q and p columns")
                items.append((float(row["q"]), float(row["p"])))
    except OSError as exc:
        raise ValidationError(f"cannot read menu file {path}: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"{path}: malformed number ({exc})") from exc
    if not items:
        raise ValidationError(f"{path}: no menu rows found")
    return ContractMenu(tuple(items))
