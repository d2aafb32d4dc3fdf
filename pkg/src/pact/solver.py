"""Optimal price/quality menus under asymmetric information.

The reduced screening problem keeps one participation constraint (lowest
type) and the adjacent downward selection constraints, all binding at an
optimum.  Substituting the binding prices into expected profit leaves a
separable objective: each type's quality enters as
``w_k * v(q_k) - P_k * C(q_k)`` with a virtual weight
``w_k = P_k*theta_k - (sum of higher-type mass) * (theta_{k+1}-theta_k)``.
The solver maximizes each term over [0, 1], restores the required
monotone ordering by pooling adjacent violators, and recovers prices from
the binding constraints.  A full-information benchmark and an exhaustive
grid oracle (for tests) complete the module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contracts import (
    DEFAULT_TOLERANCE,
    ContractMenu,
    TypeSet,
    ValuationSpec,
    sp_expected_profit,
    user_utility,
    verify_feasibility,
)
from .costs import CostCurve, cost_at, effective_cost
from .errors import ValidationError

__all__ = [
    "SolverOptions",
    "TypeOutcome",
    "BindingFlags",
    "SolveResult",
    "virtual_weights",
    "prices_from_binding",
    "solve_second_best",
    "solve_first_best",
    "brute_force_second_best",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SolverOptions:
    """Numerical knobs; defaults are tight enough for 1e-6 menu accuracy."""

    scalar_tolerance: float = 1e-10   # convergence tolerance on q in the 1-D search
    grid_step: float = 1e-3           # oracle grid resolution

    def __post_init__(self) -> None:
        if self.scalar_tolerance <= 0:
            raise ValidationError("solver.scalar_tolerance must be > 0")
        if not 0.0 < self.grid_step <= 0.5:
            raise ValidationError("solver.grid_step must be in (0, 0.5]")


@dataclass(frozen=True)
class TypeOutcome:
    """One type's row of a solved menu."""

    theta: float
    q: float
    p: float
    user_utility: float
    margin: float             # price minus serving cost


@dataclass(frozen=True)
class BindingFlags:
    """Which of the reduced constraints are active at the solution."""

    ir_bottom: bool
    adjacent_ic: tuple[bool, ...]   # entry k-1 is the (k vs k-1) constraint


@dataclass(frozen=True)
class SolveResult:
    mode: str
    menu: ContractMenu
    per_type: tuple[TypeOutcome, ...]
    expected_profit: float
    social_welfare: float
    virtual_weights: tuple[float, ...]
    ironed_segments: tuple[tuple[int, int], ...]   # inclusive index ranges
    binding: BindingFlags | None

    @property
    def adjacent_strict(self) -> tuple[bool, ...]:
        """Strict quality increase per adjacent type pair (False where pooled)."""
        qs = self.menu.qs
        return tuple(b > a for a, b in zip(qs, qs[1:]))


def virtual_weights(types: TypeSet) -> tuple[float, ...]:
    """Per-type coefficient of v(q_k) in the reduced profit objective.

    The subtracted term is the information rent a marginal quality
    improvement for type k concedes to every higher type; the top type
    pays no rent, so its weight is simply P_K * theta_K.  Nonpositive
    weight means serving the type cannot pay for the rent it creates.
    """
    ws = []
    for k in range(types.k):
        gap = types.thetas[k + 1] - types.thetas[k] if k + 1 < types.k else 0.0
        ws.append(types.pmf[k] * types.thetas[k] - types.tail_mass(k + 1) * gap)
    return tuple(ws)


def prices_from_binding(
    qs: tuple[float, ...] | list[float], types: TypeSet, v: ValuationSpec
) -> tuple[float, ...]:
    """Prices that make the bottom participation constraint and every
    adjacent downward selection constraint bind exactly."""
    if len(qs) != types.k:
        raise ValidationError(f"{len(qs)} quality levels for {types.k} types")
    if any(b < a for a, b in zip(qs, qs[1:])):
        raise ValidationError("quality levels must be weakly nondecreasing")
    ps = [types.thetas[0] * v.value(qs[0])]
    for k in range(1, types.k):
        ps.append(ps[k - 1] + types.thetas[k] * (v.value(qs[k]) - v.value(qs[k - 1])))
    return tuple(ps)


def _golden_max(fn, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Golden-section maximization of a unimodal function on [lo, hi]."""
    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1, f2 = fn(x1), fn(x2)
    while hi - lo > tol:
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_PHI * (hi - lo)
            f1 = fn(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_PHI * (hi - lo)
            f2 = fn(x2)
    mid = 0.5 * (lo + hi)
    return mid, fn(mid)


def _grid_max(fn, tol: float) -> tuple[float, float]:
    """Fallback for non-concave objectives: repeatedly zoom a fine grid."""
    lo, hi = 0.0, 1.0
    points = 1025
    best_x, best_f = 0.0, fn(0.0)
    while hi - lo > tol:
        grid = np.linspace(lo, hi, points)
        values = [fn(float(g)) for g in grid]
        i = int(np.argmax(values))
        if values[i] > best_f:
            best_x, best_f = float(grid[i]), values[i]
        lo = float(grid[max(0, i - 1)])
        hi = float(grid[min(points - 1, i + 1)])
    return best_x, best_f


def _best_service_level(
    weight: float, mass: float, v: ValuationSpec, curve: CostCurve, opts: SolverOptions
) -> float:
    """Maximize weight*v(q) - mass*C_eff(q) over [0, 1].

    C_eff jumps at 0 (the null contract costs nothing), so the smooth
    part is maximized first and then compared against the value 0 of not
    serving.  Nonpositive weight always loses to the null contract.
    """
    if weight <= 0.0:
        return 0.0

    def fn(q: float) -> float:
        return weight * v.value(q) - mass * cost_at(curve, q)

    # v concave and weight > 0, so the objective is concave iff the cost
    # curve is convex; otherwise fall back to the zooming grid.
    if curve.is_convex:
        q, val = _golden_max(fn, 0.0, 1.0, opts.scalar_tolerance)
    else:
        q, val = _grid_max(fn, opts.scalar_tolerance)
    for endpoint in (0.0, 1.0):
        f_end = fn(endpoint)
        if f_end > val:
            q, val = endpoint, f_end
    if val <= 0.0:
        return 0.0   # null contract: exclusion beats serving at a loss
    return q


def _pool_adjacent_violators(
    weights: tuple[float, ...],
    types: TypeSet,
    v: ValuationSpec,
    curve: CostCurve,
    opts: SolverOptions,
) -> tuple[list[float], list[tuple[int, int]]]:
    """Separable per-type maximization followed by monotone repair.

    Adjacent blocks whose levels invert are merged and re-maximized with
    summed weight and mass until the sequence is nondecreasing.  Merging
    on strict inversion only keeps already-equal levels as distinct
    blocks and guarantees an exactly monotone output.
    """
    blocks: list[tuple[list[int], float, float, float]] = []
    for k in range(types.k):
        members = [k]
        weight, mass = weights[k], types.pmf[k]
        q = _best_service_level(weight, mass, v, curve, opts)
        blocks.append((members, weight, mass, q))
        while len(blocks) >= 2 and blocks[-2][3] > blocks[-1][3]:
            hi_members, hi_w, hi_m, _ = blocks.pop()
            lo_members, lo_w, lo_m, _ = blocks.pop()
            members = lo_members + hi_members
            weight, mass = lo_w + hi_w, lo_m + hi_m
            q = _best_service_level(weight, mass, v, curve, opts)
            blocks.append((members, weight, mass, q))

    qs = [0.0] * types.k
    pooled: list[tuple[int, int]] = []
    for members, _, _, q in blocks:
        for idx in members:
            qs[idx] = q
        if len(members) > 1:
            pooled.append((members[0], members[-1]))
    return qs, pooled


def _menu_outcomes(
    menu: ContractMenu, types: TypeSet, v: ValuationSpec, curve: CostCurve
) -> tuple[tuple[TypeOutcome, ...], float]:
    per_type = []
    welfare = 0.0
    for theta, mass, (q, p) in zip(types.thetas, types.pmf, menu.items):
        utility = user_utility(theta, v, (q, p))
        margin = p - effective_cost(curve, q)
        per_type.append(TypeOutcome(theta, q, p, utility, margin))
        welfare += mass * (utility + margin)
    return tuple(per_type), welfare


def _binding_flags(
    menu: ContractMenu, types: TypeSet, v: ValuationSpec, tol: float
) -> BindingFlags:
    own = [user_utility(th, v, item) for th, item in zip(types.thetas, menu.items)]
    adjacent = tuple(
        abs(own[k] - user_utility(types.thetas[k], v, menu.items[k - 1])) <= tol
        for k in range(1, types.k)
    )
    return BindingFlags(ir_bottom=abs(own[0]) <= tol, adjacent_ic=adjacent)


def solve_second_best(
    types: TypeSet,
    v: ValuationSpec,
    curve: CostCurve,
    opts: SolverOptions | None = None,
) -> SolveResult:
    """Profit-maximizing menu when the provider knows only the type
    distribution.

    Steps: per-type maximization of the virtual-surplus objective,
    pooled-adjacent-violators repair of any monotonicity violations,
    binding-constraint price recovery, then a full feasibility check of
    the result (an internal postcondition, not a user-facing concern).
    """
    opts = opts or SolverOptions()
    weights = virtual_weights(types)
    qs, pooled = _pool_adjacent_violators(weights, types, v, curve, opts)
    ps = prices_from_binding(qs, types, v)
    menu = ContractMenu(tuple(zip(qs, ps)))
    per_type, welfare = _menu_outcomes(menu, types, v, curve)

    report = verify_feasibility(menu, types, v, DEFAULT_TOLERANCE)
    if not report.feasible:
        raise RuntimeError(
            f"solver produced an infeasible menu (max violation {report.max_violation});"
            " this is a bug, not an input problem"
        )
    return SolveResult(
        mode="second-best",
        menu=menu,
        per_type=per_type,
        expected_profit=sp_expected_profit(menu, types, curve),
        social_welfare=welfare,
        virtual_weights=weights,
        ironed_segments=tuple(pooled),
        binding=_binding_flags(menu, types, v, DEFAULT_TOLERANCE),
    )


def solve_first_best(
    types: TypeSet,
    v: ValuationSpec,
    curve: CostCurve,
    opts: SolverOptions | None = None,
) -> SolveResult:
    """Full-information benchmark: the provider observes the type.

    Each type's quality maximizes that type's whole surplus and the price
    extracts all of it, so every user utility is exactly zero.  No
    selection constraints apply across items.
    """
    opts = opts or SolverOptions()
    qs = [
        _best_service_level(theta, 1.0, v, curve, opts) for theta in types.thetas
    ]
    ps = [theta * v.value(q) for theta, q in zip(types.thetas, qs)]
    menu = ContractMenu(tuple(zip(qs, ps)))
    per_type, welfare = _menu_outcomes(menu, types, v, curve)
    return SolveResult(
        mode="first-best",
        menu=menu,
        per_type=per_type,
        expected_profit=sp_expected_profit(menu, types, curve),
        social_welfare=welfare,
        virtual_weights=(),
        ironed_segments=(),
        binding=None,
    )


def brute_force_second_best(
    types: TypeSet,
    v: ValuationSpec,
    curve: CostCurve,
    grid_step: float = 1e-3,
) -> SolveResult:
    """Exact maximization over every weakly-monotone quality vector on the
    grid {0, step, ..., 1}, with binding-constraint prices.

    Test oracle for the analytic solver.  The maximization is organized
    as a dynamic program over (type, grid level): the expected profit of
    a binding-priced menu is a sum of adjacent-pair terms, so the program
    returns exactly the same argmax as literal enumeration of the lattice
    (literal enumeration at the default grid is ~1.7e8 menus for K=3,
    which is why the lattice is walked this way).
    """
    if types.k > 4:
        raise ValidationError("brute force oracle is limited to K <= 4")
    if not 0.0 < grid_step <= 0.5:
        raise ValidationError("grid_step must be in (0, 0.5]")

    steps = int(round(1.0 / grid_step))
    grid = np.linspace(0.0, 1.0, steps + 1)
    values = np.array([v.value(float(g)) for g in grid])
    serve_cost = np.array([effective_cost(curve, float(g)) for g in grid])

    # Expected profit with binding prices telescopes into per-type terms
    # tail_k*theta_k*(v(q_k) - v(q_{k-1})) - P_k*C_eff(q_k) with v(q_0)=0,
    # where tail_k is the mass at or above type k.
    best = types.tail_mass(0) * types.thetas[0] * values - types.pmf[0] * serve_cost
    parents: list[np.ndarray] = []
    for k in range(1, types.k):
        rent_weight = types.tail_mass(k) * types.thetas[k]
        carry = best - rent_weight * values
        arg = np.empty(len(grid), dtype=np.intp)
        run_best = -math.inf
        run_arg = 0
        for i, c in enumerate(carry):
            if c > run_best:
                run_best, run_arg = c, i
            carry[i] = run_best
            arg[i] = run_arg
        best = carry + rent_weight * values - types.pmf[k] * serve_cost
        parents.append(arg)

    idx = [int(np.argmax(best))]
    for arg in reversed(parents):
        idx.insert(0, int(arg[idx[0]]))
    qs = [float(grid[i]) for i in idx]
    ps = prices_from_binding(qs, types, v)
    menu = ContractMenu(tuple(zip(qs, ps)))
    per_type, welfare = _menu_outcomes(menu, types, v, curve)

    pooled = []
    start = 0
    for i in range(1, types.k):
        if qs[i] != qs[i - 1]:
            if i - 1 > start:
                pooled.append((start, i - 1))
            start = i
    if types.k - 1 > start:
        pooled.append((start, types.k - 1))

    return SolveResult(
        mode="oracle",
        menu=menu,
        per_type=per_type,
        expected_profit=sp_expected_profit(menu, types, curve),
        social_welfare=welfare,
        virtual_weights=virtual_weights(types),
        ironed_segments=tuple(pooled),
        binding=_binding_flags(menu, types, v, DEFAULT_TOLERANCE),
    )
