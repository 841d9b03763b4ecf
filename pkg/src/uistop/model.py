"""Model parameters, the optimal entry threshold and the value function.

The insured's weekly wage follows a geometric Brownian motion with drift
``mu`` and volatility ``sigma``.  Buying the policy at wage ``x`` is worth

    g(x) = beta1 * x - P,

and the optimal rule is to buy the first time the wage reaches

    b* = P q* / (beta1 (q* - 1)),

where ``q*`` is the positive root of 0.5 sigma^2 q (q - 1) + mu q - r_tilde = 0.
All rates are per week.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import AssumptionViolated, DegenerateSigma, DomainError
from .schedule import schedule_beta

STOCHASTIC = "stochastic"
DETERMINISTIC = "deterministic"


@dataclass(frozen=True)
class Mortality:
    """Constant force of mortality ``lambda2`` and the death-in-service multiple ``a_dag``."""

    lambda2: float
    a_dag: float

    def __post_init__(self):
        if not (self.lambda2 >= 0.0 and math.isfinite(self.lambda2)):
            raise DomainError(f"lambda2 must be a finite rate >= 0, got {self.lambda2}")
        if not (self.a_dag >= 0.0 and math.isfinite(self.a_dag)):
            raise DomainError(f"a_dag must be finite and >= 0, got {self.a_dag}")


@dataclass(frozen=True)
class ModelParams:
    r: float
    lambda0: float
    mu: float
    sigma: float
    premium: float
    beta: float
    x: float
    mortality: Mortality | None = None

    def __post_init__(self):
        for name in ("r", "lambda0", "mu", "sigma", "premium", "beta", "x"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise DomainError(f"{name} must be a finite number, got {v!r}")
        if self.lambda0 <= 0.0:
            raise DomainError(f"lambda0 must be > 0, got {self.lambda0}")
        if self.premium <= 0.0:
            raise DomainError(f"premium must be > 0, got {self.premium}")
        if self.beta <= 0.0:
            raise DomainError(f"beta must be > 0, got {self.beta}")
        if self.x < 0.0:
            raise DomainError(f"wage x must be >= 0, got {self.x}")
        if self.sigma < 0.0:
            raise DomainError(f"sigma must be >= 0, got {self.sigma}")
        if not self.mu < self.r_tilde:
            raise AssumptionViolated(
                f"assumption mu < r_tilde violated: mu={self.mu:.7g} but "
                f"r_tilde={self.r_tilde:.7g}; the discounted final wage has no finite mean"
            )

    @property
    def lambda2(self) -> float:
        return self.mortality.lambda2 if self.mortality else 0.0

    @property
    def r_tilde(self) -> float:
        if self.mortality is None:
            return self.r + self.lambda0
        return self.r + self.lambda0 + self.mortality.lambda2

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class DerivedParams:
    """Quantities derived from :class:`ModelParams`.

    In the deterministic regime ``q_star`` is ``r_tilde / mu`` (infinite when
    ``mu <= 0``) and ``q_neg`` is NaN.
    """

    r_tilde: float
    beta1: float
    q_star: float
    q_neg: float


def characteristic_roots(mu: float, sigma: float, rate: float) -> tuple[float, float]:
    """Roots of 0.5 sigma^2 q (q - 1) + mu q - rate = 0, positive root first.

    Uses the rationalised radical on whichever side avoids cancellation.
    """
    if sigma <= 0.0:
        raise DegenerateSigma("the characteristic quadratic needs sigma > 0")
    s2 = sigma * sigma
    a = mu - 0.5 * s2
    disc = math.sqrt(a * a + 2.0 * rate * s2)
    if a > 0.0:
        q1 = 2.0 * rate / (a + disc)
        q2 = -(a + disc) / s2
    else:
        q1 = (disc - a) / s2
        q2 = -2.0 * rate / (disc - a)
    return q1, q2


def beta1_of(params: ModelParams) -> float:
    beta = params.beta
    if params.mortality is not None:
        m = params.mortality
        beta = beta + m.lambda2 * m.a_dag / (params.r + params.lambda0)
    return beta * params.lambda0 / (params.r_tilde - params.mu)


def derive(params: ModelParams) -> DerivedParams:
    """r_tilde, beta1 and the characteristic roots for sigma > 0."""
    if params.sigma == 0.0:
        raise DegenerateSigma("sigma = 0: use deterministic_threshold / solve instead")
    r_tilde = params.r_tilde
    q1, q2 = characteristic_roots(params.mu, params.sigma, r_tilde)
    return DerivedParams(r_tilde=r_tilde, beta1=beta1_of(params), q_star=q1, q_neg=q2)


def gain(x, derived: DerivedParams, premium: float):
    """g(x) = beta1 x - P."""
    return derived.beta1 * x - premium


def optimal_threshold(derived: DerivedParams, premium: float) -> float:
    q = derived.q_star
    if math.isinf(q):
        return premium / derived.beta1
    return premium * q / (derived.beta1 * (q - 1.0))


def _power_ratio(x, b, q):
    """(x/b)**q evaluated as exp(q ln(x/b)), with 0 at x = 0."""
    with np.errstate(divide="ignore"):
        return np.exp(q * np.log(np.asarray(x, dtype=float) / b))


@dataclass(frozen=True)
class DeterministicThreshold:
    b0_star: float
    t_star: float


@dataclass(frozen=True)
class Solution:
    b_star: float
    derived: DerivedParams
    regime: str
    params: ModelParams

    def value(self, x):
        return value(x, self)

    def stop_now(self, x: float) -> bool:
        """Ties at b* count as stopping."""
        return x >= self.b_star


def deterministic_threshold(params: ModelParams) -> DeterministicThreshold:
    """Threshold and entry time when the wage grows deterministically."""
    if params.sigma != 0.0:
        raise DomainError("deterministic_threshold needs sigma = 0")
    beta1 = beta1_of(params)
    r_tilde, mu, x = params.r_tilde, params.mu, params.x
    if mu > 0.0:
        b0 = params.premium * r_tilde / (beta1 * (r_tilde - mu))
    else:
        b0 = params.premium / beta1
    if x >= b0:
        t_star = 0.0
    elif mu > 0.0 and x > 0.0:
        t_star = math.log(b0 / x) / mu
    else:
        t_star = math.inf
    return DeterministicThreshold(b0_star=b0, t_star=t_star)


def solve(params: ModelParams) -> Solution:
    """Optimal threshold in whichever regime ``params`` falls."""
    if params.sigma > 0.0:
        derived = derive(params)
        return Solution(optimal_threshold(derived, params.premium), derived, STOCHASTIC, params)
    det = deterministic_threshold(params)
    r_tilde = params.r_tilde
    q = r_tilde / params.mu if params.mu > 0.0 else math.inf
    derived = DerivedParams(r_tilde=r_tilde, beta1=beta1_of(params), q_star=q, q_neg=math.nan)
    return Solution(det.b0_star, derived, DETERMINISTIC, params)


def value(x, solution: Solution):
    """v(x): value of waiting optimally from wage ``x``; vectorised over ``x``."""
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0.0):
        raise DomainError("wage must be >= 0")
    b, d, P = solution.b_star, solution.derived, solution.params.premium
    stopped = d.beta1 * xs - P
    if math.isinf(d.q_star):
        waiting = np.zeros_like(xs)
    else:
        waiting = (d.beta1 * b - P) * _power_ratio(xs, b, d.q_star)
    out = np.where(xs >= b, stopped, waiting)
    return out if out.ndim else float(out)


def apply_mortality(
    params: ModelParams,
    lambda2: float,
    a_dag: float,
    schedule=None,
    lambda1: float | None = None,
) -> ModelParams:
    """Attach a constant force of mortality to ``params``.

    When ``schedule`` and ``lambda1`` are given, beta is recomputed with the
    spell clock running at ``lambda1 + lambda2``.  With ``lambda2 = 0`` the
    parameters come back unchanged.
    """
    mort = Mortality(float(lambda2), float(a_dag))
    if mort.lambda2 == 0.0:
        return params
    beta = params.beta
    if schedule is not None:
        if lambda1 is None:
            raise DomainError("recomputing beta needs lambda1")
        beta = schedule_beta(schedule, lambda1 + mort.lambda2, params.r)
    return params.replace(beta=beta, mortality=mort)


def perpetual_call(spot: float, strike: float, rate: float, mu: float, sigma: float):
    """Exercise boundary and price of a perpetual American call.

    The underlying has drift ``mu`` (so ``rate - mu`` acts as a dividend
    yield).  Returns ``(boundary, price)``.  Entering the insurance is this
    option scaled by beta1 with strike P / beta1 and rate r_tilde.
    """
    q, _ = characteristic_roots(mu, sigma, rate)
    boundary = strike * q / (q - 1.0)
    if spot >= boundary:
        return boundary, spot - strike
    if spot <= 0.0:
        return boundary, 0.0
    return boundary, (boundary - strike) * math.exp(q * math.log(spot / boundary))
