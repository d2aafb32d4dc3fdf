"""Provider-side request costs and the fitted cost-of-quality curve.

Per-request cost is additive: compute (per-FLOP price times total FLOPs),
fixed hardware and model fees, and the configuration's liability
surcharge.  The discrete (q, cost) points from a configuration table are
then fitted with an increasing curve C(q) on [0, 1], which is what the
menu solver optimizes against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CurveFitError, ValidationError
from .qos import Environment, ServiceConfig, flops_per_token, token_count

__all__ = [
    "CostParams",
    "CostBreakdown",
    "CostCurve",
    "token_cost",
    "service_cost",
    "fit_cost_curve",
    "cost_at",
    "effective_cost",
]

# Grid used for the numerical monotonicity / nonnegativity checks at fit
# time and for curve validation on direct construction.
_CHECK_GRID = np.linspace(0.0, 1.0, 1001)
_CHECK_SLACK = 1e-12


@dataclass(frozen=True)
class CostParams:
    """Pricing constants shared by every configuration of a scenario.

    The hardware and model fees are flat per-request amortizations of
    subscription-style costs.  Defaults are the documented scenario
    defaults; none of these constants is pinned by external data.
    """

    flop_price: float = 1e-12   # currency per FLOP
    hw_fee: float = 0.01
    model_fee: float = 0.01

    def __post_init__(self) -> None:
        if min(self.flop_price, self.hw_fee, self.model_fee) < 0:
            raise ValidationError("cost params must be >= 0")


@dataclass(frozen=True)
class CostBreakdown:
    """Additive per-request cost components; total is exactly their sum."""

    token_cost: float
    hw_cost: float
    model_cost: float
    liability_cost: float
    total: float

    def __post_init__(self) -> None:
        if min(self.token_cost, self.hw_cost, self.model_cost, self.liability_cost) < 0:
            raise ValidationError("cost components must be >= 0")
        expected = self.token_cost + self.hw_cost + self.model_cost + self.liability_cost
        if self.total != expected:
            raise ValidationError("total must equal the sum of cost components")


@dataclass(frozen=True)
class CostCurve:
    """Fitted map from quality level to provider cost on [0, 1].

    Families: quadratic ``a*q^2 + b*q + c0`` and exponential
    ``a*exp(b*q) + c0``.  A valid curve is nondecreasing and nonnegative
    on [0, 1]; both are checked numerically on a 1e-3 grid when the curve
    is built, so every constructed instance is safe for the solver.
    """

    DOMAIN = (0.0, 1.0)

    family: str
    a: float
    b: float
    c0: float
    fit_residual: float = 0.0

    def __post_init__(self) -> None:
        if self.family not in ("quadratic", "exponential"):
            raise ValidationError(f"unknown cost curve family {self.family!r}")
        values = self._evaluate(_CHECK_GRID)
        if np.any(np.diff(values) < -_CHECK_SLACK):
            raise ValidationError(
                "cost curve must be nondecreasing on [0, 1]; a cost that falls "
                "as quality rises is not screening-compatible"
            )
        if np.min(values) < -_CHECK_SLACK:
            raise ValidationError("cost curve must be nonnegative on [0, 1]")

    def _evaluate(self, q: np.ndarray) -> np.ndarray:
        if self.family == "quadratic":
            return self.a * q * q + self.b * q + self.c0
        return self.a * np.exp(self.b * q) + self.c0

    @property
    def is_convex(self) -> bool:
        # Both families have second derivative with the sign of `a`.
        return self.a >= 0.0


def token_cost(cfg: ServiceConfig, env: Environment, params: CostParams) -> float:
    """Compute cost of one request: per-FLOP price * tokens * FLOPs/token."""
    return params.flop_price * token_count(cfg, env) * flops_per_token(cfg)


def service_cost(cfg: ServiceConfig, env: Environment, params: CostParams) -> CostBreakdown:
    """Full additive per-request cost of serving one configuration."""
    tok = token_cost(cfg, env, params)
    total = tok + params.hw_fee + params.model_fee + cfg.liability
    return CostBreakdown(tok, params.hw_fee, params.model_fee, cfg.liability, total)


def cost_at(curve: CostCurve, q: float) -> float:
    """Evaluate the fitted curve at q in [0, 1]."""
    if not 0.0 <= q <= 1.0:
        raise ValidationError(f"cost_at: q={q} outside [0, 1]")
    if curve.family == "quadratic":
        return curve.a * q * q + curve.b * q + curve.c0
    return curve.a * math.exp(curve.b * q) + curve.c0


def effective_cost(curve: CostCurve, q: float) -> float:
    """Serving cost with the null-contract convention.

    q=0 means the buyer takes no service, which costs the provider
    nothing; the fitted curve's value at 0 (fixed fees) applies only to
    levels that are actually served.
    """
    return 0.0 if q == 0.0 else cost_at(curve, q)


def _constrained_lstsq(design: np.ndarray, y: np.ndarray,
                       floor_design: np.ndarray) -> tuple[np.ndarray, float]:
    """Least squares, re-solved on the zero-floor boundary when the
    unconstrained solution dips below zero somewhere on [0, 1].

    ``floor_design`` holds the basis evaluated on the check grid.  The
    active constraint pins the curve to zero at the grid point where the
    unconstrained fit is most negative (for monotone shapes that point is
    an endpoint), eliminating one degree of freedom.
    """
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    grid_values = floor_design @ coef
    if np.min(grid_values) >= -_CHECK_SLACK:
        sse = float(np.sum((design @ coef - y) ** 2))
        return coef, sse
    pin = floor_design[int(np.argmin(grid_values))]
    # Parameterize the intercept out (last basis column is the constant 1):
    # c_last = -(pin[:-1] @ c_rest) / pin[-1]
    reduced = design[:, :-1] - np.outer(design[:, -1], pin[:-1]) / pin[-1]
    rest, *_ = np.linalg.lstsq(reduced, y, rcond=None)
    last = -float(pin[:-1] @ rest) / pin[-1]
    coef = np.append(rest, last)
    sse = float(np.sum((design @ coef - y) ** 2))
    return coef, sse


def _fit_quadratic(q: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    design = np.column_stack([q * q, q, np.ones_like(q)])
    floor_design = np.column_stack(
        [_CHECK_GRID * _CHECK_GRID, _CHECK_GRID, np.ones_like(_CHECK_GRID)]
    )
    coef, sse = _constrained_lstsq(design, y, floor_design)
    a, b, c0 = (float(c) for c in coef)
    return a, b, c0, math.sqrt(sse / len(y))


def _fit_exponential(q: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    """Profile least squares: scan the rate b, solving the linear (a, c0)
    subproblem per candidate, then refine b by golden section on the
    profiled squared error.  Deterministic, and robust to the wide rate
    range these cost tables need (b up to ~15)."""

    def solve_for(b: float) -> tuple[float, np.ndarray]:
        e = np.exp(b * q)
        design = np.column_stack([e, np.ones_like(q)])
        floor_design = np.column_stack(
            [np.exp(b * _CHECK_GRID), np.ones_like(_CHECK_GRID)]
        )
        coef, sse = _constrained_lstsq(design, y, floor_design)
        return sse, coef

    candidates = [b for b in np.linspace(-30.0, 30.0, 1201) if abs(b) > 1e-2]
    sses = [solve_for(b)[0] for b in candidates]
    best = int(np.argmin(sses))
    lo = candidates[max(0, best - 1)]
    hi = candidates[min(len(candidates) - 1, best + 1)]

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - inv_phi * (hi - lo)
    x2 = lo + inv_phi * (hi - lo)
    f1, f2 = solve_for(x1)[0], solve_for(x2)[0]
    while hi - lo > 1e-12:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_phi * (hi - lo)
            f1 = solve_for(x1)[0]
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_phi * (hi - lo)
            f2 = solve_for(x2)[0]
    b = 0.5 * (lo + hi)
    sse, coef = solve_for(b)
    a, c0 = float(coef[0]), float(coef[1])
    return a, b, c0, math.sqrt(sse / len(y))


def fit_cost_curve(points: list[tuple[float, float]], family: str = "quadratic") -> CostCurve:
    """Least-squares fit of (q, cost) points within the chosen family.

    Nonnegativity on [0, 1] is enforced inside the least squares (the fit
    is pinned to zero at its most negative point when needed).  A fit
    that comes out decreasing anywhere on [0, 1] is rejected: decreasing
    provider cost in quality means the scenario's costs cannot support a
    screening menu.
    """
    if family not in ("quadratic", "exponential"):
        raise CurveFitError(f"unknown cost curve family {family!r}")
    if len(points) < 3:
        raise CurveFitError(f"need at least 3 points to fit, got {len(points)}")
    q = np.asarray([p[0] for p in points], dtype=float)
    y = np.asarray([p[1] for p in points], dtype=float)
    if len(set(q.tolist())) != len(points):
        raise CurveFitError("fit points must have distinct q values")
    if np.any((q < 0.0) | (q > 1.0)):
        raise CurveFitError("fit points must have q in [0, 1]")
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(y))):
        raise CurveFitError("fit points must be finite")

    if family == "quadratic":
        a, b, c0, residual = _fit_quadratic(q, y)
    else:
        a, b, c0, residual = _fit_exponential(q, y)
    try:
        return CostCurve(family, a, b, c0, residual)
    except ValidationError as exc:
        raise CurveFitError(str(exc)) from exc
