"""Experiment orchestration: per-n contexts, condition diagnostics, the rate
study and the bound evaluation"""

from qclt.experiments.bound_eval import BoundReport, run_bound_eval
from qclt.experiments.conditions import ConditionsReport, verify_conditions
from qclt.experiments.models import build_context
from qclt.experiments.rate_study import RateReport, run_rate_study

__all__ = (
    "BoundReport",
    "ConditionsReport",
    "RateReport",
    "build_context",
    "run_bound_eval",
    "run_rate_study",
    "verify_conditions",
)
