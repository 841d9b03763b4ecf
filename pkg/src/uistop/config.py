"""Scenario files: a flat TOML document describing one model instance.

Top-level keys: ``r``, ``lambda0``, ``mu``, ``sigma``, ``premium``, ``x0`` and
either ``beta`` or a ``[schedule]`` table (which then needs ``lambda1``).
Optional: ``lambda2`` and ``a_dag`` for mortality, a ``[sim]`` table
(``dt``, ``horizon``, ``paths``, ``seed``, ``monitoring``, ``workers``) and an
``[output]`` table (``format``, ``path``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import tomli
import tomli_w

from .errors import DomainError
from .model import ModelParams, Mortality
from .montecarlo import SimConfig
from .schedule import BenefitSchedule, schedule_beta

_MODEL_KEYS = {"r", "lambda0", "mu", "sigma", "premium", "x0", "beta", "lambda1", "lambda2", "a_dag"}
_TABLES = {"schedule", "sim", "output"}
_SIM_KEYS = {"dt": "dt", "horizon": "horizon", "paths": "n_paths", "seed": "seed",
             "monitoring": "monitoring", "workers": "workers", "batch_size": "batch_size"}


@dataclass(frozen=True)
class Scenario:
    params: ModelParams
    schedule: BenefitSchedule | None = None
    lambda1: float | None = None
    sim: SimConfig | None = None
    output_format: str = "csv"
    output_path: str | None = None

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "Scenario":
        unknown = set(data) - _MODEL_KEYS - _TABLES
        if unknown:
            raise DomainError(f"unknown config keys: {', '.join(sorted(unknown))}")
        missing = {"r", "lambda0", "mu", "sigma", "premium", "x0"} - set(data)
        if missing:
            raise DomainError(f"missing config keys: {', '.join(sorted(missing))}")
        if ("beta" in data) == ("schedule" in data):
            raise DomainError("give exactly one of 'beta' or 'schedule'")

        num = {k: _number(k, data[k]) for k in _MODEL_KEYS & set(data)}
        lambda1 = num.get("lambda1")
        mortality = None
        if "lambda2" in num or "a_dag" in num:
            mortality = Mortality(num.get("lambda2", 0.0), num.get("a_dag", 0.0))
            if mortality.lambda2 == 0.0:
                mortality = None

        schedule = None
        if "schedule" in data:
            if lambda1 is None:
                raise DomainError("a schedule needs 'lambda1' to compute beta")
            schedule = BenefitSchedule.from_mapping(data["schedule"])
            spell_rate = lambda1 + (mortality.lambda2 if mortality else 0.0)
            beta = schedule_beta(schedule, spell_rate, num["r"])
        else:
            beta = num["beta"]

        params = ModelParams(
            r=num["r"], lambda0=num["lambda0"], mu=num["mu"], sigma=num["sigma"],
            premium=num["premium"], beta=beta, x=num["x0"], mortality=mortality,
        )

        sim = None
        if "sim" in data:
            raw = dict(data["sim"])
            bad = set(raw) - set(_SIM_KEYS)
            if bad:
                raise DomainError(f"unknown [sim] keys: {', '.join(sorted(bad))}")
            sim = SimConfig(**{_SIM_KEYS[k]: v for k, v in raw.items()})

        out = dict(data.get("output", {}))
        fmt = out.get("format", "csv")
        if fmt not in ("csv", "json"):
            raise DomainError(f"output format must be csv or json, got {fmt!r}")
        return cls(params, schedule, lambda1, sim, fmt, out.get("path"))

    def to_mapping(self) -> dict:
        p = self.params
        data: dict[str, Any] = {
            "r": p.r, "lambda0": p.lambda0, "mu": p.mu, "sigma": p.sigma,
            "premium": p.premium, "x0": p.x,
        }
        if self.lambda1 is not None:
            data["lambda1"] = self.lambda1
        if p.mortality is not None:
            data["lambda2"] = p.mortality.lambda2
            data["a_dag"] = p.mortality.a_dag
        if self.schedule is not None:
            data["schedule"] = self.schedule.to_mapping()
        else:
            data["beta"] = p.beta
        if self.sim is not None:
            s = self.sim
            sim = {"dt": s.dt, "paths": s.n_paths, "seed": s.seed, "monitoring": s.monitoring,
                   "workers": s.workers, "batch_size": s.batch_size}
            if s.horizon is not None:
                sim["horizon"] = s.horizon
            data["sim"] = sim
        output = {"format": self.output_format}
        if self.output_path is not None:
            output["path"] = self.output_path
        data["output"] = output
        return data

    def dumps(self) -> str:
        return tomli_w.dumps(self.to_mapping())


def _number(key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DomainError(f"config key {key!r} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"config key {key!r} must be finite")
    return value


def loads(text: str) -> Scenario:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise DomainError(f"cannot parse config: {exc}") from None
    return Scenario.from_mapping(data)


def load(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DomainError(f"cannot read config {path}: {exc.strerror}") from None
    return loads(text)
