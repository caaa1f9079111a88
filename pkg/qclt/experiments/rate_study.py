"""Monte Carlo rate study: W1 between the replicated normalized statistic and
N(0, I_p) along a grid of sample sizes, and the fitted log-log slope"""

import logging
import platform
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from qclt import __version__
from qclt.data_structures.config import ExperimentConfig, ToolDefaults
from qclt.data_structures.exceptions import ConditionsViolated, UnstableExperiment
from qclt.data_structures.modes import ModelKind
from qclt.data_structures.output_keys import RATE_STUDY_COLUMNS, OutputKeys
from qclt.data_structures.typing import Vector
from qclt.experiments.conditions import ConditionsReport, context_conditions
from qclt.experiments.models import ExperimentContext, build_context
from qclt.numerics.linalg import spectral_norm
from qclt.numerics.mestim import normalization_map, reference_rate
from qclt.numerics.wasserstein import (
    EmpiricalSample,
    W1Estimate,
    debias,
    w1_coordmax_vs_gaussian,
    w1_sliced_vs_gaussian,
)
from qclt.utilities.core import SlopeFit, fit_slope, map_replications

__all__ = ("RateRow", "RateReport", "run_rate_study", "summarize_statistics")

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class RateRow:
    n: int
    replications: int
    failures: int
    coordmax: W1Estimate
    sliced: W1Estimate

    @property
    def coordmax_debiased(self) -> float:
        return debias(self.coordmax)

    @property
    def sliced_debiased(self) -> float:
        return debias(self.sliced)

    def to_mapping(self) -> dict[str, Any]:
        return {
            OutputKeys.N: self.n,
            OutputKeys.R: self.replications,
            OutputKeys.FAILURES: self.failures,
            OutputKeys.W1_COORDMAX_RAW: self.coordmax.value,
            OutputKeys.W1_COORDMAX_FLOOR: self.coordmax.floor,
            OutputKeys.W1_COORDMAX_DEBIASED: self.coordmax_debiased,
            OutputKeys.W1_SLICED_RAW: self.sliced.value,
            OutputKeys.W1_SLICED_FLOOR: self.sliced.floor,
            OutputKeys.W1_SLICED_DEBIASED: self.sliced_debiased,
        }


@dataclass(frozen=True, slots=True)
class RateReport:
    rows: tuple[RateRow, ...]
    slope: Optional[SlopeFit]
    meta: dict[str, Any] = field(default_factory=dict)

    def to_mapping(self) -> dict[str, Any]:
        return {
            OutputKeys.COLUMNS: [str(column) for column in RATE_STUDY_COLUMNS],
            OutputKeys.ROWS: [row.to_mapping() for row in self.rows],
            OutputKeys.META: self.meta,
        }


def summarize_statistics(
    n: int,
    statistics: list[Optional[Vector]],
    seed: int,
    n_slices: int,
    floor_replicates: int,
) -> RateRow:
    """W1 estimates of the successful replications; None entries are failures"""
    kept: list[Vector] = [s for s in statistics if s is not None]
    sample = EmpiricalSample(np.vstack(kept), label=f"n={n}")
    return RateRow(
        n=n,
        replications=len(statistics),
        failures=len(statistics) - len(kept),
        coordmax=w1_coordmax_vs_gaussian(sample, seed, floor_replicates),
        sliced=w1_sliced_vs_gaussian(sample, n_slices, seed, floor_replicates),
    )


def _check_conditions(contexts: list[ExperimentContext], config: ExperimentConfig) -> None:
    report = ConditionsReport(
        tuple(row for context in contexts for row in context_conditions(context, config))
    )
    if not report.passed:
        raise ConditionsViolated(report.detail)


def _meta(
    config: ExperimentConfig,
    contexts: list[ExperimentContext],
    slope: Optional[SlopeFit],
) -> dict[str, Any]:
    return {
        OutputKeys.SLOPE: slope.slope if slope else None,
        OutputKeys.SLOPE_SE: slope.slope_se if slope else None,
        OutputKeys.SLOPE_INTERVAL: list(slope.interval) if slope else None,
        OutputKeys.SLOPE_POINTS: slope.points if slope else 0,
        OutputKeys.REFERENCE_RATE: {
            str(n): reference_rate(n, config.bounds.c0, config.bounds.log_exponent)
            for n in config.n_grid
        },
        OutputKeys.NORMALIZATION_NORM: {
            str(context.n): spectral_norm(normalization_map(context.sandwich))
            for context in contexts
        },
        OutputKeys.CONFIG: config.to_mapping(),
        OutputKeys.VERSION: __version__,
        OutputKeys.PLATFORM: platform.platform(),
    }


def run_rate_study(
    config: ExperimentConfig, defaults: ToolDefaults, workers: int = 1
) -> RateReport:
    """
    Replicate the estimator at every n and measure its distance to normality

    :param config: experiment configuration
    :type config: ExperimentConfig

    :param defaults: tool defaults supplying the W1 settings not set in config
    :type defaults: ToolDefaults

    :param workers: worker processes for the replications, results do not depend on it
    :type workers: int

    :return: per-n W1 rows, slope fit and metadata
    :rtype: RateReport

    :raises ConditionsViolated: a blocking diagnostic fails at some n
    :raises UnstableExperiment: too many replications fail to minimize
    """
    contexts: list[ExperimentContext] = [build_context(config, n) for n in config.n_grid]
    if config.model != ModelKind.SYNTHETIC:
        _check_conditions(contexts, config)

    n_slices: int = config.n_slices(defaults)
    floor_replicates: int = config.floor_replicates(defaults)
    allowed_failures: float = config.thresholds.max_failure_fraction * config.replications

    rows: list[RateRow] = []
    for context in contexts:
        logger.info(
            "Running %d replications at n=%d (%s)", config.replications, context.n, config.model
        )
        statistics = map_replications(context, config.replications, workers)
        failures: int = sum(s is None for s in statistics)
        if failures:
            logger.warning("Dropped %d failed replications at n=%d", failures, context.n)
        if failures > allowed_failures:
            raise UnstableExperiment(failures, config.replications)
        row = summarize_statistics(
            context.n, statistics, config.seed, n_slices, floor_replicates
        )
        logger.info(
            "n=%d: coord-max W1 %.5f (floor %.5f), sliced W1 %.5f (floor %.5f)",
            row.n,
            row.coordmax.value,
            row.coordmax.floor,
            row.sliced.value,
            row.sliced.floor,
        )
        rows.append(row)

    slope: Optional[SlopeFit] = fit_slope(
        [row.n for row in rows], [row.coordmax_debiased for row in rows]
    )
    if slope is None:
        logger.info("Slope unavailable: fewer than 3 positive debiased estimates")
    else:
        logger.info("Fitted slope %.4f (se %.4f)", slope.slope, slope.slope_se)
    return RateReport(tuple(rows), slope, _meta(config, contexts, slope))
