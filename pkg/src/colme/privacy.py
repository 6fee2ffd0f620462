"""Laplace output-perturbation calibrated to a privacy level.

For data supported on [mu - L, mu + L], adding Laplace(0, sigma_dp / sqrt(2))
noise to each sample with sigma_dp^2 = 8 L^2 / eps^2 makes the released
running mean eps-differentially private.  eps = inf is the no-privacy limit
and short-circuits to exactly zero noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PrivacySpec:
    """Privacy level and the derived Laplace noise constants."""

    epsilon: float
    half_range: float
    sigma_dp: float  # noise standard deviation, sqrt(8 L^2 / eps^2)
    beta_dp: float   # moment-condition parameter, sigma_dp / sqrt(2)

    @property
    def sigma_dp_sq(self) -> float:
        return self.sigma_dp * self.sigma_dp

    @property
    def scale(self) -> float:
        """Laplace scale parameter b = sigma_dp / sqrt(2)."""
        return self.beta_dp

    @property
    def off(self) -> bool:
        return math.isinf(self.epsilon)


def calibrate(epsilon: float, half_range: float) -> PrivacySpec:
    """Build the noise spec for level epsilon over support half-width L."""
    if not half_range > 0.0:
        raise ValueError(f"half_range must be > 0, got {half_range}")
    if not epsilon > 0.0:
        raise ValueError(f"epsilon must be > 0 or inf, got {epsilon}")
    if math.isinf(epsilon):
        return PrivacySpec(epsilon, half_range, 0.0, 0.0)
    sigma_dp = math.sqrt(8.0 * half_range * half_range / (epsilon * epsilon))
    return PrivacySpec(epsilon, half_range, sigma_dp, sigma_dp / math.sqrt(2.0))


def laplace_from_uniform(u, scale: float):
    """Inverse-CDF map of one uniform draw u in (0, 1) to Laplace(0, scale).

    Uses scale * sign(u - 1/2) * log(1 - 2|u - 1/2|); the map is symmetric so
    the sign convention only fixes which half of the stream lands negative.
    """
    u = np.asarray(u, dtype=float)
    # u == 0 is the one representable endpoint (numpy never returns 1.0);
    # map it to the median rather than -inf.
    u = np.where(u == 0.0, 0.5, u)
    shifted = u - 0.5
    out = scale * np.sign(shifted) * np.log1p(-2.0 * np.abs(shifted))
    return float(out) if out.ndim == 0 else out


def sample_noise(spec: PrivacySpec, rng: np.random.Generator, size=None):
    """Draw Laplace(0, sigma_dp / sqrt(2)) noise; exactly 0 when eps = inf.

    One uniform is consumed per draw so stream accounting stays exact; the
    no-privacy case consumes nothing.
    """
    if spec.off:
        return 0.0 if size is None else np.zeros(size)
    return laplace_from_uniform(rng.random(size), spec.scale)
