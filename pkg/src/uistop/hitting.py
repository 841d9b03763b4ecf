"""Law of the first time the wage reaches a threshold, and threshold strategies.

For a threshold ``b`` above the current wage ``x`` the hitting time tau_b of
the geometric Brownian wage has Laplace transform (x/b)^q1(theta), where
q1(theta) is the positive characteristic root at rate ``theta``.  Buying at
tau_b is worth (beta1 b - P)(x/b)^q* in expectation; maximising that over
``b`` recovers b*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DomainError
from .model import DerivedParams, ModelParams, characteristic_roots, derive


@dataclass(frozen=True)
class ThresholdPolicy:
    """Buy the policy the first time the wage reaches ``b``."""

    b: float
    params: ModelParams
    derived: DerivedParams

    def __post_init__(self):
        if not self.b >= 0.0:
            raise DomainError(f"threshold must be >= 0, got {self.b}")

    @classmethod
    def at(cls, b: float, params: ModelParams) -> "ThresholdPolicy":
        return cls(float(b), params, derive(params))

    @property
    def immediate(self) -> bool:
        return self.params.x >= self.b


def _pow_ratio(x: float, b: float, q: float) -> float:
    if x <= 0.0:
        return 0.0
    return math.exp(q * math.log(x / b))


def laplace_transform(policy: ThresholdPolicy, theta: float) -> float:
    """E[exp(-theta tau_b)]."""
    if not theta > 0.0:
        raise DomainError(f"theta must be > 0, got {theta}")
    if policy.immediate:
        return 1.0
    q1, _ = characteristic_roots(policy.params.mu, policy.params.sigma, theta)
    return _pow_ratio(policy.params.x, policy.b, q1)


def hit_probability(policy: ThresholdPolicy) -> float:
    """P(tau_b < infinity)."""
    if policy.immediate:
        return 1.0
    mu, sigma = policy.params.mu, policy.params.sigma
    if mu >= 0.5 * sigma * sigma:
        return 1.0
    return _pow_ratio(policy.params.x, policy.b, 1.0 - 2.0 * mu / (sigma * sigma))


def mean_hitting_time(policy: ThresholdPolicy) -> float:
    """E[tau_b] in weeks; infinite unless the log-wage drifts upward."""
    if policy.immediate:
        return 0.0
    a = policy.params.mu - 0.5 * policy.params.sigma ** 2
    if a <= 0.0 or policy.params.x <= 0.0:
        return math.inf
    return math.log(policy.b / policy.params.x) / a


def enpv(policy: ThresholdPolicy) -> float:
    """Expected net present value of buying at tau_b."""
    d, P, x = policy.derived, policy.params.premium, policy.params.x
    if policy.immediate:
        return d.beta1 * x - P
    return (d.beta1 * policy.b - P) * _pow_ratio(x, policy.b, d.q_star)


def enpv_curve(params: ModelParams, derived: DerivedParams, b) -> np.ndarray:
    """eNPV over an array of thresholds."""
    b = np.asarray(b, dtype=float)
    x, P = params.x, params.premium
    with np.errstate(divide="ignore"):
        waiting = (derived.beta1 * b - P) * np.exp(derived.q_star * np.log(x / b))
    return np.where(b <= x, derived.beta1 * x - P, waiting)


@dataclass(frozen=True)
class GridMaximum:
    b_hat: float
    value: float
    step: float


def maximize_enpv(
    params: ModelParams,
    derived: DerivedParams,
    b_min: float,
    b_max: float,
    n: int,
) -> GridMaximum:
    """Brute-force argmax of the eNPV over ``n`` evenly spaced thresholds.

    No unimodality is assumed.  Ties resolve to the smallest threshold.
    """
    if not (0.0 <= b_min < b_max) or not math.isfinite(b_max) or n < 2:
        raise DomainError(f"degenerate grid [{b_min}, {b_max}] with n={n}")
    grid = np.linspace(b_min, b_max, int(n))
    vals = enpv_curve(params, derived, grid)
    i = int(np.argmax(vals))
    return GridMaximum(float(grid[i]), float(vals[i]), float(grid[1] - grid[0]))


def refine_enpv_maximum(params: ModelParams, derived: DerivedParams, coarse: GridMaximum) -> GridMaximum:
    """Polish a grid maximum by bounded scalar search inside the neighbouring cells."""
    lo = max(coarse.b_hat - coarse.step, 0.0)
    hi = coarse.b_hat + coarse.step
    res = optimize.minimize_scalar(
        lambda b: -float(enpv_curve(params, derived, b)),
        bounds=(lo, hi), method="bounded", options={"xatol": 1e-10 * hi},
    )
    if -res.fun < coarse.value:
        return coarse
    return GridMaximum(float(res.x), float(-res.fun), coarse.step)
