"""Neighbor-admission tests: should agent b's stream be averaged with a's?

Three interchangeable rules.  The oracle reads true means.  The two-sample
moment-condition test compares privatized running means against the
threshold z_{theta_t}; the optimistic-distance rule accepts while the
confidence radii of the two estimates still overlap.  All rules are
symmetric in (a, b) because they use only published values, which keeps the
per-round mixing matrix doubly stochastic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bernstein import DistributionSpec, privatized_beta
from .privacy import PrivacySpec


@dataclass(frozen=True)
class ThetaSchedule:
    """Significance level min(cap, coefficient / t^exponent) at local time t.

    Decays to 0 (vanishing false-rejection rate) but slower than
    exp(-sqrt(t)), so the acceptance threshold still separates distinct
    means.
    """

    cap: float = 2.0
    coefficient: float = 3.0
    exponent: float = 1.0 / 7.0

    def __post_init__(self):
        if not 0.0 < self.cap <= 2.0:
            raise ValueError("cap must be in (0, 2]")
        if self.coefficient <= 0.0 or self.exponent < 0.0:
            raise ValueError("coefficient must be > 0 and exponent >= 0")


def theta_at(schedule: ThetaSchedule, t: int) -> float:
    if t < 1:
        raise ValueError("t must be >= 1")
    return min(schedule.cap, schedule.coefficient / t**schedule.exponent)


@dataclass(frozen=True)
class RuleSpec:
    """Which admission rule to run, with its constants.

    kind: "oracle" | "bernstein" | "optimistic" | "local".
    theta applies to the bernstein test; delta and r_assumed to optimistic
    distance ("local" admits nobody and is the non-collaborative baseline).
    """

    kind: str
    theta: ThetaSchedule | None = None
    delta: float | None = None
    r_assumed: int | None = None

    def __post_init__(self):
        if self.kind not in ("oracle", "bernstein", "optimistic", "local"):
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if self.kind == "bernstein" and self.theta is None:
            object.__setattr__(self, "theta", ThetaSchedule())
        if self.kind == "optimistic":
            if self.delta is None:
                object.__setattr__(self, "delta", 1.0)
            if not 0.0 < self.delta <= 1.0:
                raise ValueError("delta must be in (0, 1]")
        if self.kind != "bernstein" and self.theta is not None:
            raise ValueError(f"theta schedule does not apply to {self.kind!r}")
        if self.kind != "optimistic" and (self.delta is not None
                                          or self.r_assumed is not None):
            raise ValueError(f"delta/r_assumed do not apply to {self.kind!r}")


def oracle_decide(a: int, b: int, structure) -> bool:
    """Ground truth: same mean, same class."""
    return bool(structure.mu_of[a] == structure.mu_of[b])


def bernstein_threshold(sigma_sq_a, beta_a, sigma_sq_b, beta_b,
                        privacy: PrivacySpec, t: int, theta: float):
    """Acceptance threshold for privatized running means at time t:

        z = [ 2 (bt_a + bt_b) ln(2/theta)
              + sqrt(sigma_a^2 + sigma_b^2 + 2 sigma_dp^2) sqrt(2 ln(2/theta)) ] / sqrt(t)

    where bt is each agent's per-sample data-plus-noise moment parameter.
    Broadcasts over arrays of per-agent constants.
    """
    if not 0.0 < theta <= 2.0:
        raise ValueError(f"theta must be in (0, 2], got {theta}")
    if t < 1:
        raise ValueError("t must be >= 1")
    bt_a = privatized_beta(np.sqrt(sigma_sq_a), beta_a, privacy.sigma_dp, privacy.beta_dp)
    bt_b = privatized_beta(np.sqrt(sigma_sq_b), beta_b, privacy.sigma_dp, privacy.beta_dp)
    lg = math.log(2.0 / theta)
    rt = math.sqrt(t)
    return (2.0 * (bt_a + bt_b) * lg
            + np.sqrt(sigma_sq_a + sigma_sq_b + 2.0 * privacy.sigma_dp_sq)
            * math.sqrt(2.0 * lg)) / rt


def bernstein_decide(xa: float, xb: float, t: int,
                     spec_a: DistributionSpec, spec_b: DistributionSpec,
                     privacy: PrivacySpec, theta_t: float) -> bool:
    """Accept equal means iff |xa - xb| < z_{theta_t} (strict).

    With a power-law theta schedule the threshold shrinks as ~1/sqrt(t), so
    distinct means (gap > 0) are eventually separated; the probability of
    still accepting them decays on the order of
    exp(-gap sqrt(t) / (2 (bt_a + bt_b))) for large t.
    """
    z = bernstein_threshold(spec_a.sigma_sq, spec_a.beta, spec_b.sigma_sq, spec_b.beta,
                            privacy, t, theta_t)
    return bool(abs(xa - xb) < z)


def optimistic_radius(sigma_sq, privacy: PrivacySpec, t: int, delta: float,
                      r: int, num_agents: int):
    """Confidence radius of one privatized running mean at time t:

        sqrt( 2 (sigma_dp^2 + sigma^2) / t * (1 + 1/t)
              * ln(4 r M sqrt(t+1) / delta) )

    Broadcasts over per-agent variances.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must be in (0, 1], got {delta}")
    if t < 1:
        raise ValueError("t must be >= 1")
    lg = math.log(4.0 * r * num_agents * math.sqrt(t + 1.0) / delta)
    return np.sqrt(2.0 * (privacy.sigma_dp_sq + np.asarray(sigma_sq, dtype=float))
                   / t * (1.0 + 1.0 / t) * lg)


def optimistic_decide(xa: float, xb: float, t: int,
                      spec_a: DistributionSpec, spec_b: DistributionSpec,
                      privacy: PrivacySpec, delta: float, r: int,
                      num_agents: int) -> bool:
    """Accept iff |xa - xb| - radius_a - radius_b <= 0 (non-strict)."""
    ra = optimistic_radius(spec_a.sigma_sq, privacy, t, delta, r, num_agents)
    rb = optimistic_radius(spec_b.sigma_sq, privacy, t, delta, r, num_agents)
    return bool(abs(xa - xb) - ra - rb <= 0.0)
