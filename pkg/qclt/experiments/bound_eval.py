"""Explicit W1 bounds next to Monte Carlo estimates of the distance they bound"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
from scipy import special

from qclt.data_structures.config import ExperimentConfig
from qclt.data_structures.modes import Convention, StreamTag
from qclt.data_structures.output_keys import BOUND_EVAL_COLUMNS, OutputKeys
from qclt.data_structures.typing import Matrix, Vector
from qclt.experiments.models import (
    ExperimentContext,
    GPCVContext,
    LogisticContext,
    build_context,
)
from qclt.numerics import gpcv, logistic
from qclt.numerics.linalg import sym_inv_sqrt, sym_sqrt
from qclt.numerics.mestim import bonis_bound
from qclt.numerics.streams import stream
from qclt.numerics.wasserstein import MAX_ASSIGNMENT_SIZE, EmpiricalSample, w1_exact_pair

__all__ = ("BoundRow", "BoundReport", "run_bound_eval", "mc_gradient_w1", "mc_score_w1")

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class BoundRow:
    n: int
    p: int
    bound_trace: Optional[float] = None
    bound_chaos: Optional[float] = None
    w1_mc: Optional[float] = None
    w1_mc_floor: Optional[float] = None
    bonis_beta: Optional[float] = None
    bonis_bound: Optional[float] = None

    def to_mapping(self) -> dict[str, Any]:
        return {
            OutputKeys.N: self.n,
            OutputKeys.P: self.p,
            OutputKeys.BOUND_TRACE: self.bound_trace,
            OutputKeys.BOUND_CHAOS: self.bound_chaos,
            OutputKeys.W1_MC: self.w1_mc,
            OutputKeys.W1_MC_FLOOR: self.w1_mc_floor,
            OutputKeys.BONIS_BETA: self.bonis_beta,
            OutputKeys.BONIS_BOUND: self.bonis_bound,
        }


@dataclass(frozen=True, slots=True)
class BoundReport:
    rows: tuple[BoundRow, ...]

    def to_mapping(self) -> dict[str, Any]:
        return {
            OutputKeys.COLUMNS: [str(column) for column in BOUND_EVAL_COLUMNS],
            OutputKeys.ROWS: [row.to_mapping() for row in self.rows],
        }


def _draw_count(requested: int, p: int) -> int:
    if p >= 2 and requested > MAX_ASSIGNMENT_SIZE:
        logger.warning(
            "Limiting Monte Carlo draws to %d for the assignment solver (requested %d)",
            MAX_ASSIGNMENT_SIZE,
            requested,
        )
        return MAX_ASSIGNMENT_SIZE
    return requested


def _paired_w1(
    statistic: Matrix, covariance_root: Matrix, seed: int, n: int
) -> tuple[float, float]:
    """Exact W1 of a sample against an equal-size N(0, S S^T) sample, and the
    same distance between two independent Gaussian samples"""
    draws, p = statistic.shape
    references: list[Matrix] = [
        stream(seed, StreamTag.MONTE_CARLO, n, tag).standard_normal((draws, p))
        @ covariance_root.T
        for tag in (1, 2)
    ]
    target = EmpiricalSample(references[0], label="gaussian")
    value: float = w1_exact_pair(EmpiricalSample(statistic, label="statistic"), target).value
    floor: float = w1_exact_pair(EmpiricalSample(references[1], label="floor"), target).value
    return value, floor


def mc_gradient_w1(context: GPCVContext, draws: int) -> tuple[float, float]:
    """W1 between sqrt(n) grad M_n(theta0) and N(0, C) from field draws"""
    n: int = context.n
    draws = _draw_count(draws, context.p)
    fields: Matrix = context.corr0.chol @ stream(
        context.seed, StreamTag.MONTE_CARLO, n, 0
    ).standard_normal((n, draws))
    matrices = gpcv.grad_matrices(context.corr0)
    gradients: Matrix = np.column_stack(
        [np.sum(fields * (b @ fields), axis=0) / math.sqrt(n) for b in matrices.b_sym]
    )
    return _paired_w1(gradients, sym_sqrt(context.sandwich.c_bar), context.seed, n)


def mc_score_w1(context: LogisticContext, draws: int) -> tuple[float, float]:
    """W1 between the standardized score C^{-1/2} sqrt(n) grad M_n(theta0) and N(0, I_p)"""
    design = context.design
    draws = _draw_count(draws, context.p)
    probabilities: Vector = special.expit(design.x @ design.theta0)
    uniforms: Matrix = stream(context.seed, StreamTag.MONTE_CARLO, context.n, 0).random(
        (draws, context.n)
    )
    residuals: Matrix = probabilities - (uniforms < probabilities)
    scores: Matrix = residuals @ design.x / math.sqrt(context.n)
    standardized: Matrix = scores @ sym_inv_sqrt(context.sandwich.c_bar)
    return _paired_w1(standardized, np.eye(context.p), context.seed, context.n)


def _beta(context: ExperimentContext, config: ExperimentConfig) -> Optional[float]:
    if config.bounds.beta is not None:
        return config.bounds.beta
    if isinstance(context, LogisticContext):
        return logistic.fourth_moment_beta(context.design, context.sandwich)
    return None


def _row(context: ExperimentContext, config: ExperimentConfig) -> BoundRow:
    n, p = context.n, context.p
    beta: Optional[float] = _beta(context, config)
    bonis: dict[str, Optional[float]] = {
        "bonis_beta": beta,
        "bonis_bound": bonis_bound(beta, p, n, config.bounds.c0) if beta is not None else None,
    }

    if isinstance(context, GPCVContext):
        scaled: list[Matrix] = [
            b / math.sqrt(n) for b in gpcv.grad_matrices(context.corr0).b_sym
        ]
        bound_trace, _ = gpcv.quadform_w1_bound(context.corr0.r, scaled, Convention.TRACE)
        bound_chaos, _ = gpcv.quadform_w1_bound(context.corr0.r, scaled, Convention.CHAOS)
        w1_mc, w1_floor = mc_gradient_w1(context, config.bounds.mc_draws)
        logger.info(
            "n=%d: quadratic-form bound %.5g (trace) / %.5g (chaos), Monte Carlo W1 %.5g",
            n,
            bound_trace,
            bound_chaos,
            w1_mc,
        )
        return BoundRow(n, p, bound_trace, bound_chaos, w1_mc, w1_floor, **bonis)

    if isinstance(context, LogisticContext):
        w1_mc, w1_floor = mc_score_w1(context, config.bounds.mc_draws)
        logger.info(
            "n=%d: Bonis bound %s, Monte Carlo W1 %.5g", n, bonis["bonis_bound"], w1_mc
        )
        return BoundRow(n, p, w1_mc=w1_mc, w1_mc_floor=w1_floor, **bonis)

    return BoundRow(n, p, **bonis)


def run_bound_eval(config: ExperimentConfig) -> BoundReport:
    """
    Bound table over the n grid

    :param config: experiment configuration
    :type config: ExperimentConfig

    :return: quadratic-form bounds under both covariance conventions (gp-cv),
        the Bonis plug-in bound and Monte Carlo W1 estimates per n
    :rtype: BoundReport
    """
    return BoundReport(tuple(_row(build_context(config, n), config) for n in config.n_grid))
