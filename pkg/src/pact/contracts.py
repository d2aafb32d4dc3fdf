"""User types, valuations, contract menus, and feasibility checking.

A menu assigns each user type an item (quality level, price).  A menu is
usable only if every type is willing to participate (nonnegative utility
from its own item) and no type prefers another type's item.  The checker
here evaluates the complete constraint set on purpose: it is the oracle
the solver's constraint-reduction shortcuts are validated against, so it
must not share them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .costs import CostCurve, effective_cost
from .errors import ValidationError

__all__ = [
    "TypeSet",
    "ValuationSpec",
    "ContractMenu",
    "FeasibilityReport",
    "user_utility",
    "sp_expected_profit",
    "best_response",
    "verify_feasibility",
]

DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TypeSet:
    """Ordered user types with their probability masses.

    A type is the marginal willingness to pay for quality; types are
    strictly ascending and positive, and the masses form a distribution.
    """

    thetas: tuple[float, ...]
    pmf: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.thetas:
            raise ValidationError("types.thetas: at least one type required")
        if len(self.thetas) != len(self.pmf):
            raise ValidationError("types: thetas and pmf must have equal length")
        if self.thetas[0] <= 0:
            raise ValidationError("types.thetas: values must be > 0")
        if any(b <= a for a, b in zip(self.thetas, self.thetas[1:])):
            raise ValidationError("types.thetas: values must be strictly ascending")
        if any(p < 0 for p in self.pmf):
            raise ValidationError("types.pmf: probabilities must be >= 0")
        total = math.fsum(self.pmf)
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"types.pmf: probabilities must sum to 1 (got {total})")

    @property
    def k(self) -> int:
        return len(self.thetas)

    def tail_mass(self, k: int) -> float:
        """P(type index >= k), summed high-to-low for stability."""
        total = 0.0
        for p in reversed(self.pmf[k:]):
            total += p
        return total


@dataclass(frozen=True)
class ValuationSpec:
    """Monetary value of quality: v(0) = 0, increasing and strictly concave.

    Families: log ``a*ln(1+q)``, sqrt ``a*sqrt(q)``, power ``a*q^b`` with
    0 < b < 1.  Concavity is what makes quality discounts informative, so
    only these families are offered.
    """

    family: str = "log"
    a: float = 1.0
    b: float | None = None

    def __post_init__(self) -> None:
        if self.family not in ("log", "sqrt", "power"):
            raise ValidationError(f"valuation.family: unknown family {self.family!r}")
        if self.a <= 0:
            raise ValidationError("valuation.a: scale must be > 0")
        if self.family == "power":
            if self.b is None or not 0.0 < self.b < 1.0:
                raise ValidationError("valuation.b: power family needs 0 < b < 1")
        elif self.b is not None:
            raise ValidationError(f"valuation.b: not used by family {self.family!r}")

    def value(self, q: float) -> float:
        if not 0.0 <= q <= 1.0:
            raise ValidationError(f"valuation: q={q} outside [0, 1]")
        if self.family == "log":
            return self.a * math.log1p(q)
        if self.family == "sqrt":
            return self.a * math.sqrt(q)
        return self.a * q ** self.b


@dataclass(frozen=True)
class ContractMenu:
    """Per-type (quality, price) items, aligned with a TypeSet by position.

    Only domain validity is enforced here.  Monotone quality and prices
    are consequences of feasibility, not prerequisites: the checker needs
    to accept broken menus in order to diagnose them.
    """

    items: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.items:
            raise ValidationError("menu: at least one item required")
        for i, (q, p) in enumerate(self.items):
            if not 0.0 <= q <= 1.0:
                raise ValidationError(f"menu item {i}: q={q} outside [0, 1]")
            if not (math.isfinite(p) and p >= 0.0):
                raise ValidationError(f"menu item {i}: price must be finite and >= 0")

    @property
    def k(self) -> int:
        return len(self.items)

    @property
    def qs(self) -> tuple[float, ...]:
        return tuple(q for q, _ in self.items)

    @property
    def ps(self) -> tuple[float, ...]:
        return tuple(p for _, p in self.items)

    @property
    def monotone(self) -> bool:
        """Weakly nondecreasing in both quality and price."""
        return all(a <= b for a, b in zip(self.qs, self.qs[1:])) and all(
            a <= b for a, b in zip(self.ps, self.ps[1:])
        )


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of the full participation/selection constraint check.

    ``ir_violations`` holds (type index, slack) pairs and ``ic_violations``
    ((type index, other index), slack) pairs, slack < -tolerance meaning
    violated by that amount.  ``feasible`` iff the worst violation is
    within tolerance.
    """

    ir_violations: tuple[tuple[int, float], ...]
    ic_violations: tuple[tuple[tuple[int, int], float], ...]
    max_violation: float
    feasible: bool
    tolerance: float


def user_utility(theta: float, v: ValuationSpec, item: tuple[float, float]) -> float:
    """Type theta's payoff from an item: valuation of quality minus price."""
    q, p = item
    if theta <= 0:
        raise ValidationError(f"theta must be > 0, got {theta}")
    if not 0.0 <= q <= 1.0:
        raise ValidationError(f"q={q} outside [0, 1]")
    if p < 0:
        raise ValidationError(f"price must be >= 0, got {p}")
    return theta * v.value(q) - p


def sp_expected_profit(menu: ContractMenu, types: TypeSet, curve: CostCurve) -> float:
    """Provider's expected margin when each type takes its own item.

    Uses the null-contract cost convention: an item with q=0 sells no
    service and therefore costs nothing.
    """
    if menu.k != types.k:
        raise ValidationError(f"menu has {menu.k} items for {types.k} types")
    total = 0.0
    for pk, (q, p) in zip(types.pmf, menu.items):
        total += pk * (p - effective_cost(curve, q))
    return total


def best_response(theta: float, v: ValuationSpec, menu: ContractMenu) -> tuple[int, float]:
    """Index and utility of the menu item type theta likes best.

    Ties go to the higher-quality item: at an optimum the selection
    constraints bind with equality, and the designated item is the higher
    one, so this convention makes "every type picks its own item" hold
    exactly rather than up to tie-breaking luck.
    """
    best_idx = 0
    best_u = user_utility(theta, v, menu.items[0])
    for idx in range(1, menu.k):
        u = user_utility(theta, v, menu.items[idx])
        if u >= best_u:
            best_idx, best_u = idx, u
    return best_idx, best_u


def verify_feasibility(
    menu: ContractMenu,
    types: TypeSet,
    v: ValuationSpec,
    tolerance: float = DEFAULT_TOLERANCE,
) -> FeasibilityReport:
    """Check every participation and every pairwise selection constraint.

    All K participation constraints and all K*(K-1) selection constraints
    are evaluated explicitly; nothing is reduced or assumed.  Violations
    are findings, not errors.
    """
    if menu.k != types.k:
        raise ValidationError(f"menu has {menu.k} items for {types.k} types")
    if tolerance < 0:
        raise ValidationError("tolerance must be >= 0")

    own = [user_utility(th, v, item) for th, item in zip(types.thetas, menu.items)]
    ir_viol: list[tuple[int, float]] = []
    ic_viol: list[tuple[tuple[int, int], float]] = []
    worst = 0.0

    for k, u_own in enumerate(own):
        slack = u_own
        worst = min(worst, slack)
        if slack < -tolerance:
            ir_viol.append((k, slack))
    for k, theta in enumerate(types.thetas):
        for j in range(types.k):
            if j == k:
                continue
            slack = own[k] - user_utility(theta, v, menu.items[j])
            worst = min(worst, slack)
            if slack < -tolerance:
                ic_viol.append(((k, j), slack))

    max_violation = max(0.0, -worst)
    return FeasibilityReport(
        ir_violations=tuple(ir_viol),
        ic_violations=tuple(ic_viol),
        max_violation=max_violation,
        feasible=max_violation <= tolerance,
        tolerance=tolerance,
    )
