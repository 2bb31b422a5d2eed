"""Group-relative policy optimisation math: advantages, clipped surrogate, KL."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence


@dataclass(frozen=True)
class GrpoConfig:
    epsilon: float = 0.2
    beta: float = 0.0
    std_floor: float = 1e-8

    def validate(self) -> None:
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if not self.std_floor > 0:
            raise ValueError("std_floor must be > 0")


@dataclass(frozen=True)
class PolicyGroup:
    """One prompt's G candidates: rewards plus optional sequence log-probs."""

    rewards: Sequence[float]
    logp_current: Optional[Sequence[float]] = None
    logp_old: Optional[Sequence[float]] = None
    logp_ref: Optional[Sequence[float]] = None

    def __post_init__(self):
        g = len(self.rewards)
        if g < 1:
            raise ValueError("rewards must be non-empty")
        for name in ("logp_current", "logp_old", "logp_ref"):
            vals = getattr(self, name)
            if vals is not None and len(vals) != g:
                raise ValueError(f"{name} has length {len(vals)}, expected {g}")


def group_advantages(rewards: Sequence[float], cfg: GrpoConfig | None = None) -> list[float]:
    """Group z-scores: (r_i - mean) / max(population std, std_floor)."""
    cfg = cfg or GrpoConfig()
    if len(rewards) < 1:
        raise ValueError("rewards must be non-empty")
    for i, r in enumerate(rewards):
        if not math.isfinite(r):
            raise ValueError(f"rewards[{i}] is not finite")
    n = len(rewards)
    if all(r == rewards[0] for r in rewards):
        return [0.0] * n
    mean = math.fsum(rewards) / n
    var = math.fsum((r - mean) ** 2 for r in rewards) / n
    std = max(math.sqrt(var), cfg.std_floor)
    return [(r - mean) / std for r in rewards]


def clipped_surrogate(
    ratios: Sequence[float], advantages: Sequence[float], epsilon: float
) -> list[float]:
    """Per-sample min(ratio * A, clip(ratio, 1-eps, 1+eps) * A)."""
    if len(ratios) != len(advantages):
        raise ValueError("ratios and advantages must have equal length")
    lo, hi = 1.0 - epsilon, 1.0 + epsilon
    out = []
    for rho, a in zip(ratios, advantages):
        clipped = min(max(rho, lo), hi)
        out.append(min(rho * a, clipped * a))
    return out


def kl_divergence(logp_current: Sequence[float], logp_ref: Sequence[float]) -> float:
    """Unbiased k3 estimator: mean(exp(d) - d - 1) with d = logp_ref - logp_current.

    Non-negative for all finite inputs and zero iff the two vectors agree
    elementwise.
    """
    if len(logp_current) != len(logp_ref):
        raise ValueError("logp_current and logp_ref must have equal length")
    if not logp_current:
        raise ValueError("log-prob lists must be non-empty")
    terms = []
    for lc, lr in zip(logp_current, logp_ref):
        d = lr - lc
        terms.append(math.exp(d) - d - 1.0)
    return math.fsum(terms) / len(terms)


def grpo_objective(
    group: PolicyGroup, cfg: GrpoConfig | None = None
) -> tuple[float, list[float], float]:
    """Objective value for one group: (objective, per-sample terms, kl).

    objective = mean_i min(ratio_i * A_i, clip(ratio_i) * A_i) - beta * kl
    with ratio_i = exp(logp_current_i - logp_old_i) and A_i the group
    z-score of the rewards.
    """
    cfg = cfg or GrpoConfig()
    cfg.validate()
    if group.logp_current is None or group.logp_old is None:
        raise ValueError("grpo_objective requires logp_current and logp_old")
    if cfg.beta > 0 and group.logp_ref is None:
        raise ValueError("grpo_objective requires logp_ref when beta > 0")

    advantages = group_advantages(group.rewards, cfg)
    ratios = [math.exp(lc - lo) for lc, lo in zip(group.logp_current, group.logp_old)]
    per_sample = clipped_surrogate(ratios, advantages, cfg.epsilon)
    if group.logp_ref is not None:
        kl = kl_divergence(group.logp_current, group.logp_ref)
    else:
        kl = 0.0
    objective = math.fsum(per_sample) / len(per_sample) - cfg.beta * kl
    return objective, per_sample, kl
