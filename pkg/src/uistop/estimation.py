"""Drift and volatility estimates from an observed wage path, and the drift test.

With log-wages Y_i on an equally spaced grid over [0, T] and increments
Z_i = Y_i - Y_{i-1}:

    a_hat      = (Y_T - Y_0) / T
    sigma2_hat = (n / T) * sample variance of Z (ddof = 1)
    mu_hat     = a_hat + sigma2_hat / 2

The drift test rejects H0: a >= 0 when Y_T - Y_0 <= -z(alpha) sigma sqrt(T),
or the Student-t analogue when sigma is estimated.  A rejection means the
wage may never reach the threshold, so waiting is pointless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .errors import DomainError

KEEP_WAITING = "keep_waiting"
BUY_NOW_HIT = "buy_now_hit"
BUY_NOW_REJECTED = "buy_now_rejected"

NORMAL = "normal"
STUDENT_T = "t"


@dataclass(frozen=True)
class EstimateReport:
    a_hat: float
    sigma2_hat: float
    mu_hat: float
    var_a_hat: float
    var_sigma2_hat: float
    var_mu_hat: float
    n: int
    T: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _log_path(times: Sequence[float], wages: Sequence[float]):
    t = np.asarray(times, dtype=float)
    w = np.asarray(wages, dtype=float)
    if t.ndim != 1 or t.shape != w.shape:
        raise DomainError("times and wages must be one-dimensional and of equal length")
    if t.size < 3:
        raise DomainError("need at least two increments")
    if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
        raise DomainError("wages must be positive")
    step = np.diff(t)
    if not np.all(step > 0.0) or not np.allclose(step, step[0], rtol=1e-9, atol=0.0):
        raise DomainError("observation times must form a uniform increasing grid")
    return t, np.log(w)


def estimate(times: Sequence[float], wages: Sequence[float]) -> EstimateReport:
    t, y = _log_path(times, wages)
    n = y.size - 1
    T = float(t[-1] - t[0])
    z = np.diff(y)
    a_hat = (y[-1] - y[0]) / T
    s2 = n / T * float(np.var(z, ddof=1))
    return EstimateReport(
        a_hat=float(a_hat),
        sigma2_hat=s2,
        mu_hat=float(a_hat + 0.5 * s2),
        var_a_hat=s2 / T,
        var_sigma2_hat=2.0 * s2 * s2 / (n - 1),
        var_mu_hat=s2 / T + s2 * s2 / (2.0 * (n - 1)),
        n=n,
        T=T,
    )


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha <= 0.5:
        raise DomainError(f"alpha must lie in (0, 0.5], got {alpha}")


def critical_value(alpha: float, df: int | None = None) -> float:
    """Upper ``alpha`` quantile of the standard normal, or of Student t with ``df`` degrees."""
    _check_alpha(alpha)
    if df is None:
        return float(stats.norm.isf(alpha))
    return float(stats.t.isf(alpha, df))


@dataclass(frozen=True)
class DriftTest:
    reject: bool
    statistic: float
    threshold: float
    variant: str


def _drift_test(dy: float, T: float, n: int, alpha: float, sigma: float | None, s2_hat) -> DriftTest:
    if sigma is not None:
        if not sigma > 0.0:
            raise DomainError(f"known sigma must be > 0, got {sigma}")
        thr = -critical_value(alpha) * sigma * math.sqrt(T)
        variant = NORMAL
    else:
        thr = -critical_value(alpha, n - 1) * math.sqrt(s2_hat() * T)
        variant = STUDENT_T
    return DriftTest(bool(dy <= thr), float(dy), float(thr), variant)


def test_drift(times, wages, alpha: float, sigma: float | None = None) -> DriftTest:
    """One-sided test of H0: a >= 0.  Uses the normal test iff ``sigma`` is given."""
    _check_alpha(alpha)
    t, y = _log_path(times, wages)
    n = y.size - 1
    T = float(t[-1] - t[0])
    return _drift_test(
        float(y[-1] - y[0]), T, n, alpha, sigma,
        lambda: n / T * float(np.var(np.diff(y), ddof=1)),
    )


test_drift.__test__ = False  # not a pytest test despite the name


@dataclass(frozen=True)
class Decision:
    action: str
    week: float


class SequentialDecision:
    """Weekly monitoring: buy on a hit of b*, or as soon as the drift test rejects.

    Every week the test is rerun on all data so far at the same ``alpha``; no
    multiple-testing correction is applied.  Instances hold mutable state and
    belong to one caller.
    """

    def __init__(self, b_star: float, alpha: float, sigma: float | None = None):
        _check_alpha(alpha)
        if not b_star > 0.0:
            raise DomainError(f"threshold must be > 0, got {b_star}")
        self.b_star = float(b_star)
        self.alpha = alpha
        self.sigma = sigma
        self._times: list[float] = []
        self._logs: list[float] = []
        self._sum = 0.0
        self._sumsq = 0.0
        self.decision: Decision | None = None

    def observe(self, week: float, wage: float) -> Decision:
        if self.decision is not None:
            return self.decision
        if not wage > 0.0:
            raise DomainError(f"wages must be positive, got {wage}")
        if self._times:
            gap = week - self._times[-1]
            first_gap = self._times[1] - self._times[0] if len(self._times) > 1 else gap
            if not gap > 0.0 or not math.isclose(gap, first_gap, rel_tol=1e-9):
                raise DomainError("observations must arrive on a uniform weekly grid")
            z = math.log(wage) - self._logs[-1]
            self._sum += z
            self._sumsq += z * z
        self._times.append(float(week))
        self._logs.append(math.log(wage))

        if wage >= self.b_star:
            self.decision = Decision(BUY_NOW_HIT, float(week))
            return self.decision
        n = len(self._logs) - 1
        if n >= (1 if self.sigma is not None else 2):
            T = self._times[-1] - self._times[0]
            test = _drift_test(
                self._logs[-1] - self._logs[0], T, n, self.alpha, self.sigma,
                lambda: n / T * max(self._sumsq - self._sum * self._sum / n, 0.0) / (n - 1),
            )
            if test.reject:
                self.decision = Decision(BUY_NOW_REJECTED, float(week))
                return self.decision
        return Decision(KEEP_WAITING, float(week))


def sequential_decision(
    observations: Iterable[tuple[float, float]],
    b_star: float,
    alpha: float,
    sigma: float | None = None,
) -> Decision:
    """Run weekly monitoring over ``(week, wage)`` pairs until the first buy signal.

    Returns ``keep_waiting`` at the last week if the stream ends first.
    """
    state = SequentialDecision(b_star, alpha, sigma)
    last = None
    for week, wage in observations:
        last = state.observe(week, wage)
        if last.action != KEEP_WAITING:
            return last
    if last is None:
        raise DomainError("no observations")
    return last
