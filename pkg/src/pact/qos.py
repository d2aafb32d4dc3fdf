"""Latency and quality scoring for hosted LLM service configurations.

A service configuration is scored on two axes: end-to-end response time
(transmission + tokenization + model inference) and a user-satisfaction
probability supplied with the configuration.  The two are blended into a
single quality score in [0, 1] that the pricing layers consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError

__all__ = [
    "ServiceConfig",
    "Environment",
    "LatencyBreakdown",
    "QosLevel",
    "QosTable",
    "transmission_time",
    "tokenization_time",
    "flops_per_token",
    "inference_time",
    "total_latency",
    "qos_score",
    "qos_table",
]


@dataclass(frozen=True)
class ServiceConfig:
    """One deployable service option: payload sizes, model shape, throughput.

    ``beta`` is the model parameter count in units of 1e9 parameters (a
    0.124e9-parameter model is beta=0.124).  ``liability`` is an exogenous
    per-request surcharge covering accountability for harmful output; how
    large it should be is a policy input, not computed here.
    """

    id: int
    d_in: float            # input payload, KB
    d_out: float           # response payload, KB
    beta: float            # parameters, 1e9 units
    n_layer: int
    n_ctx: int
    n_attn: int
    satisfaction: float    # P(response meets the user's intent), in [0, 1]
    gamma_gflops: float    # advertised accelerator throughput, GFLOPS
    liability: float = 0.0
    model_label: str = ""
    expected_q: float | None = None   # optional reference score to compare against

    def __post_init__(self) -> None:
        if self.d_in < 0 or self.d_out < 0:
            raise ValidationError(f"service {self.id}: payload sizes must be >= 0")
        if self.beta < 0:
            raise ValidationError(f"service {self.id}: beta must be >= 0")
        if min(self.n_layer, self.n_ctx, self.n_attn) < 0:
            raise ValidationError(f"service {self.id}: model shape must be >= 0")
        if not 0.0 <= self.satisfaction <= 1.0:
            raise ValidationError(f"service {self.id}: satisfaction must be in [0, 1]")
        if self.gamma_gflops <= 0:
            raise ValidationError(f"service {self.id}: gamma_gflops must be > 0")
        if self.liability < 0:
            raise ValidationError(f"service {self.id}: liability must be >= 0")


@dataclass(frozen=True)
class Environment:
    """Shared physical constants for scoring a task's configurations.

    Defaults are the reference operating point used by the bundled
    scenarios: 20 Mbps link, 0.5 ms/KB (de)tokenization, 4 tokens per KB
    in both directions, equal weight on satisfaction and latency.

    ``gamma_calibration`` multiplies every configuration's advertised
    GFLOPS before use.  Advertised accelerator peak numbers and the scores
    they should reproduce are mutually consistent only up to a constant
    factor; x10 reconciles the bundled configuration table (see README).
    """

    rate_bps: float = 2e7
    alpha_tok: float = 5e-4        # s per KB of input
    alpha_detok: float = 5e-4      # s per KB of output
    tokens_per_kb_in: float = 4.0
    tokens_per_kb_out: float = 4.0
    delta: float = 0.5             # weight on satisfaction vs. (1 - latency)
    gamma_calibration: float = 10.0
    task_label: str = ""

    def __post_init__(self) -> None:
        if self.rate_bps <= 0:
            raise ValidationError("environment: rate_bps must be > 0")
        if self.alpha_tok < 0 or self.alpha_detok < 0:
            raise ValidationError("environment: tokenization times must be >= 0")
        if self.tokens_per_kb_in < 0 or self.tokens_per_kb_out < 0:
            raise ValidationError("environment: token maps must be >= 0")
        if not 0.0 <= self.delta <= 1.0:
            raise ValidationError("environment: delta must be in [0, 1]")
        if self.gamma_calibration <= 0:
            raise ValidationError("environment: gamma_calibration must be > 0")


@dataclass(frozen=True)
class LatencyBreakdown:
    """Response-time components in seconds; total is exactly their sum."""

    t_tran: float
    t_tok: float
    t_inf: float
    t_total: float

    def __post_init__(self) -> None:
        if min(self.t_tran, self.t_tok, self.t_inf) < 0:
            raise ValidationError("latency components must be >= 0")
        if self.t_total != self.t_tran + self.t_tok + self.t_inf:
            raise ValidationError("t_total must equal the sum of its components")


@dataclass(frozen=True)
class QosLevel:
    """Quality score for one configuration.

    ``q_raw`` may leave [0, 1] when total latency exceeds one second (the
    latency term then turns negative); ``q`` is the clamped value that the
    contract layers use.
    """

    id: int
    q_raw: float
    q: float
    latency: LatencyBreakdown
    satisfaction: float

    @property
    def latency_warning(self) -> bool:
        """True when total latency exceeds the one-second scoring budget."""
        return self.latency.t_total > 1.0


@dataclass(frozen=True)
class QosTable:
    """Scored configurations, in input order plus an ascending-q view."""

    levels: tuple[QosLevel, ...]
    ascending: tuple[QosLevel, ...]
    duplicate_groups: tuple[tuple[int, ...], ...] = field(default=())


def transmission_time(cfg: ServiceConfig, env: Environment) -> float:
    """Round-trip link time: 8000 bits/KB times payload over the link rate."""
    return 8000.0 * (cfg.d_in + cfg.d_out) / env.rate_bps


def tokenization_time(cfg: ServiceConfig, env: Environment) -> float:
    """Tokenize input and detokenize output at per-KB constants."""
    return env.alpha_tok * cfg.d_in + env.alpha_detok * cfg.d_out


def flops_per_token(cfg: ServiceConfig) -> float:
    """Per-token forward cost of a transformer: 2*params + 2*layers*ctx*attn."""
    return 2.0 * cfg.beta * 1e9 + 2.0 * cfg.n_layer * cfg.n_ctx * cfg.n_attn


def token_count(cfg: ServiceConfig, env: Environment) -> float:
    """Total tokens processed for one request (linear token maps)."""
    return env.tokens_per_kb_in * cfg.d_in + env.tokens_per_kb_out * cfg.d_out


def inference_time(cfg: ServiceConfig, env: Environment) -> float:
    """Model compute time: tokens * FLOPs/token over calibrated throughput."""
    effective_flops = cfg.gamma_gflops * 1e9 * env.gamma_calibration
    return token_count(cfg, env) * flops_per_token(cfg) / effective_flops


def total_latency(cfg: ServiceConfig, env: Environment) -> LatencyBreakdown:
    t_tran = transmission_time(cfg, env)
    t_tok = tokenization_time(cfg, env)
    t_inf = inference_time(cfg, env)
    return LatencyBreakdown(t_tran, t_tok, t_inf, t_tran + t_tok + t_inf)


def qos_score(cfg: ServiceConfig, env: Environment) -> QosLevel:
    """Blend satisfaction and latency into a [0, 1] quality score.

    q_raw = delta * satisfaction + (1 - delta) * (1 - total latency).
    The raw value is kept for reporting; the clamped value feeds the
    contract math, whose quality domain is [0, 1].
    """
    latency = total_latency(cfg, env)
    q_raw = env.delta * cfg.satisfaction + (1.0 - env.delta) * (1.0 - latency.t_total)
    q = min(1.0, max(0.0, q_raw))
    return QosLevel(cfg.id, q_raw, q, latency, cfg.satisfaction)


def qos_table(configs: list[ServiceConfig], env: Environment) -> QosTable:
    """Score a batch of configurations.

    Returns levels in input order, an ascending-q view, and groups of
    configurations whose scores collide within 1e-9 (colliding scores make
    menu levels indistinguishable downstream, so they are worth surfacing).
    """
    if not configs:
        raise ValidationError("qos_table: at least one service configuration required")
    levels = tuple(qos_score(cfg, env) for cfg in configs)
    ascending = tuple(sorted(levels, key=lambda lv: lv.q))

    duplicates: list[tuple[int, ...]] = []
    group: list[QosLevel] = [ascending[0]]
    for lv in ascending[1:]:
        if abs(lv.q - group[-1].q) <= 1e-9:
            group.append(lv)
        else:
            if len(group) > 1:
                duplicates.append(tuple(g.id for g in group))
            group = [lv]
    if len(group) > 1:
        duplicates.append(tuple(g.id for g in group))
    return QosTable(levels, ascending, tuple(duplicates))
