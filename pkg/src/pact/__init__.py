"""Price/QoS menu design for hosted LLM services.

Scores service configurations on latency and satisfaction, models
provider costs (including liability surcharges), fits a cost-of-quality
curve, and computes incentive-compatible, individually-rational price
menus under asymmetric information, alongside the full-information
benchmark, with verification and simulation tooling.
"""

from .contracts import (
    ContractMenu,
    FeasibilityReport,
    TypeSet,
    ValuationSpec,
    best_response,
    sp_expected_profit,
    user_utility,
    verify_feasibility,
)
from .costs import (
    CostBreakdown,
    CostCurve,
    CostParams,
    cost_at,
    effective_cost,
    fit_cost_curve,
    service_cost,
    token_cost,
)
from .errors import CurveFitError, InfeasibleMenuError, ValidationError
from .qos import (
    Environment,
    LatencyBreakdown,
    QosLevel,
    QosTable,
    ServiceConfig,
    flops_per_token,
    inference_time,
    qos_score,
    qos_table,
    tokenization_time,
    total_latency,
    transmission_time,
)
from .scenario import (
    QosReport,
    Scenario,
    SimulationOutcome,
    SolveRun,
    SweepRow,
    bundled_scenario_path,
    load_scenario,
    run_qos,
    run_solve,
    run_sweep_liability,
    simulate_menu,
    simulate_population,
)
from .solver import (
    BindingFlags,
    SolveResult,
    SolverOptions,
    TypeOutcome,
    brute_force_second_best,
    prices_from_binding,
    solve_first_best,
    solve_second_best,
    virtual_weights,
)

__version__ = "0.1.0"

__all__ = [
    "BindingFlags",
    "ContractMenu",
    "CostBreakdown",
    "CostCurve",
    "CostParams",
    "CurveFitError",
    "Environment",
    "FeasibilityReport",
    "InfeasibleMenuError",
    "LatencyBreakdown",
    "QosLevel",
    "QosReport",
    "QosTable",
    "Scenario",
    "ServiceConfig",
    "SimulationOutcome",
    "SolveResult",
    "SolveRun",
    "SolverOptions",
    "SweepRow",
    "TypeOutcome",
    "TypeSet",
    "ValidationError",
    "ValuationSpec",
    "best_response",
    "brute_force_second_best",
    "bundled_scenario_path",
    "cost_at",
    "effective_cost",
    "fit_cost_curve",
    "flops_per_token",
    "inference_time",
    "load_scenario",
    "prices_from_binding",
    "qos_score",
    "qos_table",
    "run_qos",
    "run_solve",
    "run_sweep_liability",
    "service_cost",
    "simulate_menu",
    "simulate_population",
    "solve_first_best",
    "solve_second_best",
    "sp_expected_profit",
    "token_cost",
    "tokenization_time",
    "total_latency",
    "transmission_time",
    "user_utility",
    "verify_feasibility",
    "virtual_weights",
]
