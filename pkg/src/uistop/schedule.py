"""Benefit schedules h(s) and the discounted-benefit multiplier beta.

A schedule gives the weekly benefit as a fraction of the final wage, as a
function of time ``s`` (weeks) since the start of an unemployment spell.
Two kinds are supported: a flat grace period followed by exponential decay,
and a tabulated curve with linear interpolation.

    H(t)  = int_0^t exp(-r s) h(s) ds
    beta  = int_0^inf lambda1 exp(-lambda1 t) H(t) dt

``beta`` is the expected discounted benefit per unit of final wage when the
spell length is exponential with rate ``lambda1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import integrate

from .errors import DomainError

PIECEWISE = "piecewise-exponential"
TABULATED = "tabulated"

# French system: 57.4% replacement, eight months at the full rate, then a 15%
# cut every three months (continuous-time equivalent of the step cut).
FRENCH_H0 = 0.574
FRENCH_S0 = 8 * 52 / 12
FRENCH_DELTA = -(3 / 52) * math.log(0.85)
FRENCH_MEAN_SPELL = 21 * 52 / 12

_QUAD_OPTS = dict(epsabs=1e-14, epsrel=1e-13, limit=400)
_TAIL_MASS = 1e-12


@dataclass(frozen=True)
class BenefitSchedule:
    """Weekly benefit rate as a fraction of the final wage.

    Build instances with :meth:`piecewise` or :meth:`tabulated`.
    """

    kind: str = PIECEWISE
    h0: float = 1.0
    s0: float = math.inf
    delta: float = 1.0
    table: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.kind == PIECEWISE:
            if not 0.0 < self.h0 <= 1.0:
                raise DomainError(f"h0 must lie in (0, 1], got {self.h0}")
            if not self.s0 >= 0.0:
                raise DomainError(f"s0 must be >= 0, got {self.s0}")
            if not (self.delta > 0.0 and math.isfinite(self.delta)):
                raise DomainError(f"delta must be a positive finite rate, got {self.delta}")
        elif self.kind == TABULATED:
            if not self.table or len(self.table) < 2:
                raise DomainError("a tabulated schedule needs at least two knots")
            t = np.array([k[0] for k in self.table], dtype=float)
            h = np.array([k[1] for k in self.table], dtype=float)
            if not np.all(np.isfinite(t)) or not np.all(np.isfinite(h)):
                raise DomainError("schedule knots must be finite")
            if t[0] < 0.0 or np.any(np.diff(t) <= 0.0):
                raise DomainError("knot times must be non-negative and strictly increasing")
            if np.any(h < 0.0):
                raise DomainError("tabulated benefit rates must be non-negative")
        else:
            raise DomainError(f"unknown schedule kind {self.kind!r}")

    @classmethod
    def piecewise(cls, h0: float, s0: float, delta: float) -> "BenefitSchedule":
        return cls(kind=PIECEWISE, h0=float(h0), s0=float(s0), delta=float(delta))

    @classmethod
    def tabulated(cls, knots: Sequence[Sequence[float]]) -> "BenefitSchedule":
        table = tuple((float(t), float(h)) for t, h in knots)
        return cls(kind=TABULATED, table=table)

    @classmethod
    def french(cls) -> "BenefitSchedule":
        """The French declining-benefit preset."""
        return cls.piecewise(FRENCH_H0, FRENCH_S0, FRENCH_DELTA)

    def rate(self, s):
        """h(s), vectorised over ``s``."""
        s = np.asarray(s, dtype=float)
        if self.kind == PIECEWISE:
            if math.isinf(self.s0):
                out = np.full_like(s, self.h0)
            else:
                out = self.h0 * np.exp(-self.delta * np.maximum(s - self.s0, 0.0))
        else:
            t, h = self._knots()
            out = np.interp(s, t, h, left=0.0, right=0.0)
        return out if out.ndim else float(out)

    def breakpoints(self) -> list[float]:
        """Points where h has a kink, useful as quadrature hints."""
        if self.kind == PIECEWISE:
            return [] if math.isinf(self.s0) else [self.s0]
        return [t for t, _ in self.table]

    def _knots(self):
        t = np.array([k[0] for k in self.table], dtype=float)
        h = np.array([k[1] for k in self.table], dtype=float)
        return t, h

    def to_mapping(self) -> dict:
        if self.kind == TABULATED:
            return {"table": [[t, h] for t, h in self.table]}
        s0 = "inf" if math.isinf(self.s0) else self.s0
        return {"h0": self.h0, "s0_weeks": s0, "delta": self.delta}

    @classmethod
    def from_mapping(cls, data: Mapping) -> "BenefitSchedule":
        """Parse the config form: ``h0``/``s0_weeks``/``delta`` or ``table``."""
        if "table" in data:
            extra = set(data) - {"table"}
            if extra:
                raise DomainError(f"unexpected keys next to 'table': {sorted(extra)}")
            return cls.tabulated(data["table"])
        missing = {"h0", "delta"} - set(data)
        if missing:
            raise DomainError(f"schedule is missing keys: {sorted(missing)}")
        s0 = data.get("s0_weeks", math.inf)
        return cls.piecewise(data["h0"], float(s0), data["delta"])


def lambda1_mean_matching(mean_spell: float = FRENCH_MEAN_SPELL) -> float:
    """Re-employment rate whose exponential mean equals ``mean_spell`` weeks."""
    if mean_spell <= 0:
        raise DomainError("mean spell length must be positive")
    return 1.0 / mean_spell


def lambda1_tail(mean_spell: float = FRENCH_MEAN_SPELL, tail: float = 0.1) -> float:
    """Re-employment rate leaving probability ``tail`` of a spell longer than ``mean_spell``."""
    if mean_spell <= 0 or not 0.0 < tail < 1.0:
        raise DomainError("need mean_spell > 0 and tail in (0, 1)")
    return -math.log(tail) / mean_spell


def _check_rate(name: str, value: float) -> None:
    if not value >= 0.0:
        raise DomainError(f"{name} must be >= 0, got {value}")


def _hints(schedule: BenefitSchedule, lo: float, hi: float):
    pts = [p for p in schedule.breakpoints() if lo < p < hi]
    return pts or None


def discounted_benefit_H(schedule: BenefitSchedule, t: float, r: float) -> float:
    """H(t) by adaptive quadrature."""
    _check_rate("t", t)
    _check_rate("r", r)
    if t == 0.0:
        return 0.0
    val, _ = integrate.quad(
        lambda s: math.exp(-r * s) * schedule.rate(s), 0.0, t,
        points=_hints(schedule, 0.0, t), **_QUAD_OPTS,
    )
    return val


def _expint(rate: float, a: float, b: float) -> float:
    """int_a^b exp(-rate*s) ds, stable for rate -> 0."""
    length = b - a
    z = rate * length
    if z < 1e-9:
        # short series; also avoids subnormal rates losing all precision
        return math.exp(-rate * a) * length * (1.0 - 0.5 * z)
    return math.exp(-rate * a) * -math.expm1(-z) / rate


def discounted_benefit_H_exact(schedule: BenefitSchedule, t: float, r: float) -> float:
    """H(t) from the antiderivative; piecewise-exponential schedules only."""
    if schedule.kind != PIECEWISE:
        raise DomainError("the closed-form H needs a piecewise-exponential schedule")
    _check_rate("t", t)
    _check_rate("r", r)
    h0, s0, d = schedule.h0, schedule.s0, schedule.delta
    if t <= s0:
        return h0 * _expint(r, 0.0, t)
    # past s0 the integrand is h0 exp(-r s0) exp(-(r+d)(s-s0))
    flat = h0 * _expint(r, 0.0, s0)
    tail = h0 * math.exp(-r * s0) * _expint(r + d, 0.0, t - s0)
    return flat + tail


def beta_closed_form(h0: float, s0: float, delta: float, lambda1: float, r: float) -> float:
    """beta for the piecewise-exponential schedule."""
    BenefitSchedule.piecewise(h0, s0, delta)
    if not lambda1 > 0.0:
        raise DomainError(f"lambda1 must be > 0, got {lambda1}")
    _check_rate("r", r)
    k = r + lambda1
    if math.isinf(s0):
        return h0 / k
    e = math.exp(-k * s0)
    return h0 * -math.expm1(-k * s0) / k + h0 * e / (k + delta)


def beta_from_schedule(schedule: BenefitSchedule, lambda1: float, r: float) -> float:
    """beta by nested adaptive quadrature.

    The outer integral is truncated where the exponential tail mass drops
    below 1e-12; H is bounded by the undiscounted benefit total, so the
    dropped part is at most 1e-12 * H(t_max).
    """
    if not lambda1 > 0.0:
        raise DomainError(f"lambda1 must be > 0, got {lambda1}")
    _check_rate("r", r)
    t_max = -math.log(_TAIL_MASS) / lambda1
    if schedule.kind == TABULATED:
        t_max = max(t_max, schedule.table[-1][0])

    def outer(t):
        return lambda1 * math.exp(-lambda1 * t) * discounted_benefit_H(schedule, t, r)

    val, _ = integrate.quad(outer, 0.0, t_max, points=_hints(schedule, 0.0, t_max), **_QUAD_OPTS)
    # lower bound for the dropped tail; its relative size is about 1e-12
    return val + math.exp(-lambda1 * t_max) * discounted_benefit_H(schedule, t_max, r)


def schedule_beta(schedule: BenefitSchedule, lambda1: float, r: float) -> float:
    """beta, using the closed form whenever the schedule admits one."""
    if schedule.kind == PIECEWISE:
        return beta_closed_form(schedule.h0, schedule.s0, schedule.delta, lambda1, r)
    return beta_from_schedule(schedule, lambda1, r)
