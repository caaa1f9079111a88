"""Finite-sample diagnostics of the model conditions behind the rate theorems"""

import logging
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from qclt.data_structures.config import ExperimentConfig
from qclt.data_structures.exceptions import ConditionsViolated, NumericalException
from qclt.data_structures.modes import ModelKind
from qclt.data_structures.output_keys import CONDITIONS_COLUMNS, OutputKeys
from qclt.data_structures.typing import Vector
from qclt.experiments.models import (
    ExperimentContext,
    GPCVContext,
    LogisticContext,
    build_context,
    parameter_space,
)
from qclt.numerics import gpcv
from qclt.numerics.mestim import ParamBox, SandwichPair

__all__ = (
    "ConditionRow",
    "ConditionsReport",
    "logistic_conditions",
    "gpcv_conditions",
    "context_conditions",
    "verify_conditions",
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class ConditionRow:
    n: int
    condition: str
    value: Optional[float]
    threshold: Optional[float]
    passed: bool
    # Informational rows never abort a rate study
    blocking: bool = True

    def to_mapping(self) -> dict[str, Any]:
        return {
            OutputKeys.N: self.n,
            OutputKeys.CONDITION: self.condition,
            OutputKeys.VALUE: self.value,
            OutputKeys.THRESHOLD: self.threshold,
            OutputKeys.PASSED: self.passed,
        }


@dataclass(frozen=True, slots=True)
class ConditionsReport:
    rows: tuple[ConditionRow, ...] = field(default_factory=tuple)

    @property
    def failures(self) -> tuple[ConditionRow, ...]:
        return tuple(row for row in self.rows if row.blocking and not row.passed)

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def detail(self) -> str:
        return "; ".join(
            f"{row.condition} at n={row.n} (value {row.value}, threshold {row.threshold})"
            for row in self.failures
        )

    def to_mapping(self) -> dict[str, Any]:
        return {
            OutputKeys.COLUMNS: [str(column) for column in CONDITIONS_COLUMNS],
            OutputKeys.ROWS: [row.to_mapping() for row in self.rows],
        }


def _at_least(
    n: int, name: str, value: Optional[float], threshold: float, blocking: bool = True
) -> ConditionRow:
    return ConditionRow(
        n, name, value, threshold, value is None or value >= threshold, blocking
    )


def _margin_row(n: int, box: ParamBox, theta0: Vector) -> ConditionRow:
    return ConditionRow(
        n,
        "interior_margin",
        box.boundary_distance(theta0),
        box.interior_margin,
        box.fits_margin_ball(theta0),
    )


def _sandwich_rows(n: int, sandwich: SandwichPair, config: ExperimentConfig) -> list[ConditionRow]:
    return [
        _at_least(n, "hessian_lambda_min", sandwich.lambda_min_h, config.thresholds.c_theta0_h),
        _at_least(
            n,
            "score_covariance_lambda_min",
            sandwich.lambda_min_c,
            config.thresholds.c_theta0_grad,
        ),
    ]


def logistic_conditions(
    context: LogisticContext, config: ExperimentConfig
) -> list[ConditionRow]:
    """Covariate bound, design eigenvalue, sandwich eigenvalues and the
    margin ball around theta0"""
    n: int = context.n
    design = context.design
    return [
        ConditionRow(
            n,
            "covariate_norm",
            design.max_row_norm,
            design.c_x1,
            design.max_row_norm <= design.c_x1,
        ),
        _at_least(n, "design_lambda_min", design.design_lambda_min, config.logistic.c_x2),
        *_sandwich_rows(n, context.sandwich, config),
        _margin_row(n, context.box, context.theta0),
    ]


def gpcv_conditions(context: GPCVContext, config: ExperimentConfig) -> list[ConditionRow]:
    """Point separation, correlation eigenvalues over a theta grid, sandwich
    eigenvalues, plus informational decay and identifiability surrogates"""
    n: int = context.n
    settings = config.gp_cv
    lower, upper = settings.box_bounds
    grid = gpcv.theta_grid(lower, upper, settings.theta_grid_points)

    corr_lambda: float = min(
        gpcv.build_corr(context.family, theta, context.points).lambda_n
        for theta in grid
    )
    decay: float = max(
        gpcv.kernel_decay_ratio(context.family, theta, settings.decay_exponent)
        for theta in grid
    )
    b_norm: float = max(gpcv.grad_matrices(context.corr0).spectral_norms)

    rows: list[ConditionRow] = [
        _at_least(
            n, "min_pairwise_distance", context.points.min_pairwise_distance, settings.min_distance
        ),
        _at_least(n, "corr_lambda_min", corr_lambda, settings.c_r1),
        *_sandwich_rows(n, context.sandwich, config),
        _margin_row(n, context.box, context.theta0),
        ConditionRow(
            n,
            "kernel_decay",
            decay,
            settings.decay_constant,
            decay <= settings.decay_constant,
            False,
        ),
        _at_least(
            n,
            "global_identifiability",
            gpcv.global_identifiability(
                context.family,
                context.theta0,
                context.points,
                grid,
                settings.identifiability_radius,
            ),
            settings.identifiability_threshold,
            False,
        ),
        _at_least(
            n,
            "local_identifiability",
            gpcv.local_identifiability(context.family, context.theta0, context.points),
            settings.identifiability_threshold,
            False,
        ),
        ConditionRow(n, "grad_matrix_norm", b_norm, None, bool(np.isfinite(b_norm)), False),
    ]
    return rows


def context_conditions(
    context: ExperimentContext, config: ExperimentConfig
) -> list[ConditionRow]:
    if isinstance(context, LogisticContext):
        return logistic_conditions(context, config)
    if isinstance(context, GPCVContext):
        return gpcv_conditions(context, config)
    return []


def verify_conditions(config: ExperimentConfig) -> ConditionsReport:
    """
    Evaluate every diagnostic at every n of the grid, never raising on a failure

    :param config: experiment configuration
    :type config: ExperimentConfig

    :return: one row per (n, condition)
    :rtype: ConditionsReport
    """
    rows: list[ConditionRow] = []
    if config.model == ModelKind.SYNTHETIC:
        logger.info("Synthetic model has no conditions to verify")
        return ConditionsReport()

    for n in config.n_grid:
        try:
            context: ExperimentContext = build_context(config, n)
        except (ConditionsViolated, NumericalException) as e:
            logger.info("Setup failed at n=%d: %s", n, e.message)
            rows.append(ConditionRow(n, "setup", None, None, False))
            rows.append(_margin_row(n, *parameter_space(config)))
            continue
        rows.extend(context_conditions(context, config))

    report = ConditionsReport(tuple(rows))
    logger.info(
        "%d of %d diagnostics passed", sum(row.passed for row in rows), len(rows)
    )
    return report
