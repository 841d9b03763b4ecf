"""Closed-form optimal timing of unemployment insurance entry, with numerical oracles."""

from .errors import AssumptionViolated, DegenerateSigma, DomainError, TruncationWarning
from .model import (
    DerivedParams,
    ModelParams,
    Mortality,
    Solution,
    apply_mortality,
    derive,
    deterministic_threshold,
    gain,
    optimal_threshold,
    solve,
    value,
)
from .schedule import BenefitSchedule, beta_closed_form, beta_from_schedule, discounted_benefit_H

__version__ = "0.1.0"

__all__ = [
    "AssumptionViolated",
    "BenefitSchedule",
    "DegenerateSigma",
    "DerivedParams",
    "DomainError",
    "ModelParams",
    "Mortality",
    "Solution",
    "TruncationWarning",
    "apply_mortality",
    "beta_closed_form",
    "beta_from_schedule",
    "derive",
    "deterministic_threshold",
    "discounted_benefit_H",
    "gain",
    "optimal_threshold",
    "solve",
    "value",
]
