"""Moment-condition algebra for sub-exponential concentration.

A random variable with mean mu and variance sigma^2 satisfies the moment
condition with parameter beta > 0 when

    |E[(X - mu)^k]| <= (1/2) k! sigma^2 beta^(k-2)   for k = 2, 3, ...

which yields the two-sided tail bound ``tail_bound`` and, from it, the
two-sample equal-means test thresholds ``z_threshold_exact`` /
``z_threshold_simple`` and the acceptance-error bound ``type2_bound``.

All functions are pure and 64-bit float; the threshold helpers broadcast
over numpy arrays so callers may evaluate them pointwise or in bulk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# For any RV, |E[(X-mu)^4]| >= sigma^4 forces beta/sigma >= 1/(2*sqrt(3)).
MIN_BETA_SIGMA_RATIO = 1.0 / (2.0 * math.sqrt(3.0))


@dataclass(frozen=True)
class BernsteinParams:
    """(mean, variance, beta) triple of the moment condition."""

    mean: float
    variance: float
    beta: float

    def __post_init__(self):
        if not (self.variance >= 0.0 and math.isfinite(self.variance)):
            raise ValueError(f"variance must be finite and >= 0, got {self.variance}")
        if not (self.beta > 0.0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be finite and > 0, got {self.beta}")


@dataclass(frozen=True)
class DistributionSpec:
    """One agent's bounded data law: uniform on [mean - L, mean + L].

    Carries the public constants every agent publishes: variance and the
    moment-condition parameter beta.
    """

    mean: float
    half_range: float
    sigma_sq: float
    beta: float

    def __post_init__(self):
        if self.half_range <= 0.0:
            raise ValueError("half_range must be > 0")
        if self.sigma_sq > 0.0 and self.beta / math.sqrt(self.sigma_sq) < MIN_BETA_SIGMA_RATIO - 1e-15:
            raise ValueError("beta too small for the declared variance")

    @classmethod
    def uniform(cls, mean: float, sigma: float) -> "DistributionSpec":
        """Uniform law with standard deviation sigma: L = sigma * sqrt(3)."""
        if sigma <= 0.0:
            raise ValueError("sigma must be > 0")
        half_range = sigma * math.sqrt(3.0)
        return cls(mean, half_range, sigma * sigma, uniform_beta(half_range))

    @property
    def params(self) -> BernsteinParams:
        return BernsteinParams(self.mean, self.sigma_sq, self.beta)

    def sample(self, rng: np.random.Generator, size=None):
        """Draw from uniform(mean - L, mean + L); one uniform per sample."""
        return self.mean + self.half_range * (2.0 * rng.random(size) - 1.0)


def uniform_beta(half_range: float) -> float:
    """Moment-condition parameter of uniform(-L, L): L / (2 sqrt(5))."""
    if not half_range > 0.0:
        raise ValueError(f"half_range must be > 0, got {half_range}")
    return half_range / (2.0 * math.sqrt(5.0))


def compose(params: Sequence[BernsteinParams]) -> BernsteinParams:
    """Parameters of a signed sum of independent variables.

    variance = sum(sigma_i^2),
    beta = min(sum(beta_i), sqrt(n) * max(sigma_1..sigma_n, beta_1..beta_n)).

    The caller encodes signs in the means; signs do not affect variance or
    beta.  The n-ary form is canonical: the sqrt(n) term makes pairwise
    folding non-associative.
    """
    if len(params) == 0:
        raise ValueError("compose requires at least one input")
    mean = sum(p.mean for p in params)
    variance = sum(p.variance for p in params)
    beta_sum = sum(p.beta for p in params)
    spread = max(max(math.sqrt(p.variance), p.beta) for p in params)
    beta = min(beta_sum, math.sqrt(len(params)) * spread)
    return BernsteinParams(mean, variance, beta)


def scaled_sample_mean_params(base: BernsteinParams, t: int) -> BernsteinParams:
    """Parameters of the mean of t i.i.d. copies: variance/t, beta/sqrt(t)."""
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    return BernsteinParams(base.mean, base.variance / t, base.beta / math.sqrt(t))


def privatized_beta(sigma, beta, sigma_dp, beta_dp):
    """Moment parameter of one data sample plus one noise draw.

    Tighter of two valid compositions:

        min( max(sigma, beta) + max(sigma_dp, beta_dp),
             max(beta + beta_dp, sqrt(sigma^2 + sigma_dp^2)) )

    Broadcasts over arrays; sigma_dp = beta_dp = 0 gives max(sigma, beta).
    """
    left = np.maximum(sigma, beta) + np.maximum(sigma_dp, beta_dp)
    right = np.maximum(beta + beta_dp, np.sqrt(sigma**2 + sigma_dp**2))
    return np.minimum(left, right)


def tail_bound(x, p: BernsteinParams):
    """Two-sided tail bound 2 exp(-x^2 / (2 (sigma^2 + beta x))).

    Returns the raw analytic value (2 at x = 0, possibly > 1); callers clamp
    when reading it as a probability.  Broadcasts over x.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise ValueError("x must be >= 0")
    out = 2.0 * np.exp(-(x * x) / (2.0 * (p.variance + p.beta * x)))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TestSpec:
    """Combined parameters of the two-sample equal-means test.

    sigma_sq and beta describe the difference of the two (independent)
    estimates; theta in (0, 2] is the significance level; delta_gap is the
    true mean gap used only by the acceptance-error bound.
    """

    __test__ = False  # keep pytest from collecting the Test* name

    sigma_sq: float
    beta: float
    theta: float
    delta_gap: float | None = None

    def __post_init__(self):
        if not self.sigma_sq > 0.0:
            raise ValueError("sigma_sq must be > 0")
        if not self.beta > 0.0:
            raise ValueError("beta must be > 0")
        if not 0.0 < self.theta <= 2.0:
            raise ValueError(f"theta must be in (0, 2], got {self.theta}")


def z_threshold_exact(spec: TestSpec) -> float:
    """Smallest z with tail_bound(z) = theta:

    z = beta ln(2/theta) + sqrt(beta^2 ln^2(2/theta) + 2 sigma^2 ln(2/theta)).
    """
    lg = math.log(2.0 / spec.theta)
    return spec.beta * lg + math.sqrt(spec.beta**2 * lg**2 + 2.0 * spec.sigma_sq * lg)


def z_threshold_simple(spec: TestSpec) -> float:
    """Looser closed form 2 beta ln(2/theta) + sigma sqrt(2 ln(2/theta)).

    Always >= z_threshold_exact since sqrt(a^2 + b^2) <= a + b for a, b >= 0.
    """
    lg = math.log(2.0 / spec.theta)
    return 2.0 * spec.beta * lg + math.sqrt(spec.sigma_sq) * math.sqrt(2.0 * lg)


def type2_bound(z_theta: float, spec: TestSpec) -> float:
    """Bound on accepting equal means when the true gap is delta_gap.

    min(1, 2 exp(-(z - gap)^2 / (2 (sigma^2 + beta (gap - z))))), and 1
    (vacuous) whenever gap <= z.
    """
    gap = spec.delta_gap
    if gap is None or not gap > 0.0:
        raise ValueError("type2_bound requires delta_gap > 0")
    if gap <= z_theta:
        return 1.0
    raw = 2.0 * math.exp(-((z_theta - gap) ** 2) / (2.0 * (spec.sigma_sq + spec.beta * (gap - z_theta))))
    return min(1.0, raw)
