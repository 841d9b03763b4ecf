"""Utility-modified threshold strategies and the consumption-adjusted premium cap.

An individual may value the mere event of entering the scheme (weight
``kappa``), or dislike long waits.  Restricted to "buy when the wage first
reaches b" strategies, the objectives become:

``hit_prob_raw``
    kappa P(tau_b < inf) + eNPV(b)
``hit_prob_powered``
    kappa P(tau_b < inf)^(q*/(1 - 2 mu/sigma^2)) + eNPV(b) = kappa (x/b)^q* + eNPV(b),
    solved in closed form by b_dag = (P - kappa) q* / (beta1 (q* - 1))
``mean_time_exp``
    kappa exp(-E tau_b) + eNPV(b), maximised numerically
``mean_time_powered``
    same solution as ``hit_prob_powered``
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DomainError
from .hitting import enpv_curve
from .model import DerivedParams, ModelParams, beta1_of, optimal_threshold, solve

HIT_PROB_RAW = "hit_prob_raw"
HIT_PROB_POWERED = "hit_prob_powered"
MEAN_TIME_EXP = "mean_time_exp"
MEAN_TIME_POWERED = "mean_time_powered"
VARIANTS = (HIT_PROB_RAW, HIT_PROB_POWERED, MEAN_TIME_EXP, MEAN_TIME_POWERED)


@dataclass(frozen=True)
class UtilityConfig:
    kappa: float
    variant: str = HIT_PROB_POWERED
    rho: float | None = None

    def __post_init__(self):
        if not (self.kappa >= 0.0 and math.isfinite(self.kappa)):
            raise DomainError(f"kappa must be finite and >= 0, got {self.kappa}")
        if self.variant not in VARIANTS:
            raise DomainError(f"unknown variant {self.variant!r}; choose from {', '.join(VARIANTS)}")
        if self.rho is not None and not self.rho >= 0.0:
            raise DomainError(f"rho must be >= 0, got {self.rho}")


def _pow(x, b, q):
    with np.errstate(divide="ignore"):
        return np.exp(q * np.log(np.asarray(x, dtype=float) / b))


def _check_kappa(kappa: float, premium: float | None = None) -> None:
    if not kappa >= 0.0:
        raise DomainError(f"kappa must be >= 0, got {kappa}")
    if premium is not None and kappa > premium:
        raise DomainError(f"kappa={kappa} exceeds the premium {premium}; the threshold would be negative")


def raw_objective(params: ModelParams, derived: DerivedParams, kappa: float, b):
    """kappa P(tau_b < inf) + eNPV(b) over thresholds ``b >= x``."""
    mu, s2, x = params.mu, params.sigma ** 2, params.x
    b = np.asarray(b, dtype=float)
    hit = np.ones_like(b) if mu >= 0.5 * s2 else np.minimum(_pow(x, b, 1.0 - 2.0 * mu / s2), 1.0)
    return kappa * hit + enpv_curve(params, derived, b)


def suboptimal_threshold_raw(params: ModelParams, derived: DerivedParams, kappa: float) -> float:
    """Maximiser of :func:`raw_objective`.

    The first-order condition is f(b) >= 0 with
    f(b) = a kappa (b/x)^(q*-a) + (q*-1) beta1 b - P q*,  a = 1 - 2 mu / sigma^2,
    and f increases in b, so the answer is its root in [x, b*] or x itself.
    """
    _check_kappa(kappa)
    P, q, beta1, x = params.premium, derived.q_star, derived.beta1, params.x
    b_star = optimal_threshold(derived, P)
    a = 1.0 - 2.0 * params.mu / params.sigma ** 2
    if a <= 0.0 or kappa == 0.0:
        return b_star
    if x >= b_star:
        return x
    if x <= 0.0:
        raise DomainError("the raw variant needs a positive wage")

    def f(b):
        return a * kappa * math.exp((q - a) * math.log(b / x)) + (q - 1.0) * beta1 * b - P * q

    if f(x) >= 0.0:
        return x
    return optimize.brentq(f, x, b_star, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def modified_threshold(params: ModelParams, derived: DerivedParams, kappa: float) -> float:
    """b_dag = (P - kappa) q* / (beta1 (q* - 1))."""
    _check_kappa(kappa, params.premium)
    q = derived.q_star
    return (params.premium - kappa) * q / (derived.beta1 * (q - 1.0))


def modified_value(params: ModelParams, derived: DerivedParams, kappa: float, x: float | None = None) -> float:
    """u_dag(x): the value function with P replaced by P - kappa, plus kappa once stopped."""
    x = params.x if x is None else float(x)
    b = modified_threshold(params, derived, kappa)
    P, beta1 = params.premium, derived.beta1
    if x >= b:
        return beta1 * x + kappa - P
    return (beta1 * b + kappa - P) * float(_pow(x, b, derived.q_star))


def kappa_dag(params: ModelParams, derived: DerivedParams, x: float | None = None) -> float:
    """Weight at which the powered threshold falls to the wage ``x``."""
    x = params.x if x is None else float(x)
    q = derived.q_star
    return params.premium - derived.beta1 * (q - 1.0) * x / q


def powered_objective(params: ModelParams, derived: DerivedParams, kappa: float, b):
    """kappa P(tau_b < inf)^(q*/(1 - 2 mu/sigma^2)) + eNPV(b), needs mu < sigma^2 / 2."""
    mu, s2, x = params.mu, params.sigma ** 2, params.x
    a = 1.0 - 2.0 * mu / s2
    if a <= 0.0:
        raise DomainError("the powered hit-probability objective needs mu < sigma^2 / 2")
    b = np.asarray(b, dtype=float)
    hit = np.where(b <= x, 1.0, _pow(x, b, a))
    return kappa * hit ** (derived.q_star / a) + enpv_curve(params, derived, b)


def mean_time_objective(params: ModelParams, derived: DerivedParams, kappa: float, b):
    """kappa exp(-E tau_b) + eNPV(b) over thresholds ``b >= x``."""
    a = params.mu - 0.5 * params.sigma ** 2
    if a <= 0.0:
        raise DomainError("the mean hitting time is infinite unless mu > sigma^2 / 2")
    b = np.asarray(b, dtype=float)
    penalty = np.where(b <= params.x, 1.0, _pow(params.x, b, 1.0 / a))
    return kappa * penalty + enpv_curve(params, derived, b)


def mean_time_threshold(
    params: ModelParams,
    derived: DerivedParams,
    kappa: float,
    variant: str = MEAN_TIME_EXP,
    n_grid: int = 20001,
) -> float:
    """Maximiser of the mean-time objective over ``b >= x``.

    Past b* both terms decrease, so the search interval is [x, b*].  The
    objective can have two local maxima, so a grid scan picks the basin and a
    bounded scalar search polishes it.
    """
    _check_kappa(kappa)
    if params.mu - 0.5 * params.sigma ** 2 <= 0.0:
        raise DomainError("the mean hitting time is infinite unless mu > sigma^2 / 2")
    if variant == MEAN_TIME_POWERED:
        return modified_threshold(params, derived, kappa)
    if variant != MEAN_TIME_EXP:
        raise DomainError(f"not a mean-time variant: {variant!r}")
    b_star = optimal_threshold(derived, params.premium)
    x = params.x
    if kappa == 0.0:
        return b_star
    if x >= b_star:
        return x
    grid = np.linspace(x, b_star, n_grid)
    vals = mean_time_objective(params, derived, kappa, grid)
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, n_grid - 1)]
    res = optimize.minimize_scalar(
        lambda b: -float(mean_time_objective(params, derived, kappa, b)),
        bounds=(lo, hi), method="bounded", options={"xatol": 1e-12 * hi},
    )
    return float(res.x) if -res.fun >= vals[i] else float(grid[i])


def utility_threshold(params: ModelParams, derived: DerivedParams, cfg: UtilityConfig) -> float:
    """Threshold for any of the four variants."""
    if cfg.variant == HIT_PROB_RAW:
        return suboptimal_threshold_raw(params, derived, cfg.kappa)
    if cfg.variant == HIT_PROB_POWERED:
        return modified_threshold(params, derived, cfg.kappa)
    return mean_time_threshold(params, derived, cfg.kappa, cfg.variant)


def consumption_gamma(c: float, r: float, lambda0: float, lambda1: float) -> float:
    """Expected discounted consumption over the unemployment spell that follows job loss."""
    if not c >= 0.0:
        raise DomainError(f"consumption must be >= 0, got {c}")
    if not (r >= 0.0 and lambda0 > 0.0 and lambda1 > 0.0):
        raise DomainError("need r >= 0 and positive lambda0, lambda1")
    return lambda0 * c / ((r + lambda0) * (r + lambda1))


def immediate_max_premium(derived: DerivedParams, x: float, gamma: float = 0.0) -> float:
    """Largest premium worth paying to enter right now: beta1 x - gamma."""
    return derived.beta1 * x - gamma


def max_premium(params: ModelParams, x: float | None = None, gamma: float = 0.0) -> float:
    """Largest premium P with v_P(x) >= gamma, where b* moves with P.

    v_P(x) decreases in P, so the answer is the root of v_P(x) = gamma, found
    by bisection.  With gamma = 0 every premium qualifies and the result is
    ``inf``.  When even a vanishing premium leaves v below gamma the
    immediate-entry cap beta1 x - gamma (<= 0) is returned.
    """
    x = params.x if x is None else float(x)
    if not gamma >= 0.0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    if x < 0.0:
        raise DomainError("wage must be >= 0")
    beta1 = beta1_of(params)
    if gamma == 0.0:
        return math.inf
    if gamma >= beta1 * x:
        return beta1 * x - gamma

    def excess(P):
        return float(solve(params.replace(premium=P)).value(x)) - gamma

    lo, hi = 0.0, beta1 * x * 1e3
    while excess(hi) > 0.0:
        lo, hi = hi, hi * 10.0
        if hi > 1e300:
            return math.inf
    # P = 0 is not a legal premium, but v_P(x) -> beta1 x > gamma as P -> 0
    return optimize.brentq(
        lambda P: excess(P) if P > 0.0 else beta1 * x - gamma,
        lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500,
    )
