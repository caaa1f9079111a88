"""Per-n experiment contexts: everything frozen for one sample size (design or
points, sandwich at theta0, parameter box) plus the replication step that
turns one random dataset into one normalized statistic"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from qclt.data_structures.config import ExperimentConfig, MinimizerSettings
from qclt.data_structures.exceptions import (
    BadStart,
    ConditionsViolated,
    NotPD,
    StalledStart,
)
from qclt.data_structures.modes import ModelKind, StreamTag
from qclt.data_structures.typing import Matrix, Vector
from qclt.numerics import gpcv, logistic
from qclt.numerics.mestim import (
    EstimRun,
    ParamBox,
    SandwichPair,
    minimize,
    normalization_matrix,
)
from qclt.numerics.streams import stream

__all__ = (
    "LogisticContext",
    "GPCVContext",
    "SyntheticContext",
    "ExperimentContext",
    "build_context",
    "parameter_space",
    "start_points",
)

logger = logging.getLogger(__name__)


def start_points(
    box: ParamBox,
    theta0: Vector,
    settings: MinimizerSettings,
    seed: int,
    n: int,
    replication: int,
) -> list[Vector]:
    """theta0 projected into the box (when warm starting) followed by uniform
    draws from the stream keyed by (seed, n, replication)"""
    warm: list[Vector] = [box.project(theta0)] if settings.warm_start else []
    draws: Matrix = box.uniform(
        stream(seed, StreamTag.STARTS, n, replication),
        (settings.n_starts or 1) - len(warm),
    )
    return warm + list(draws)


def _normalization(sandwich: SandwichPair) -> Optional[Matrix]:
    return normalization_matrix(sandwich) if sandwich.normalizable else None


def _finish(
    run: EstimRun, theta0: Vector, n: int, normalization: Optional[Matrix]
) -> Optional[Vector]:
    if not run.converged:
        return None
    assert normalization is not None
    return normalization @ (math.sqrt(n) * (run.theta_hat - theta0))


@dataclass(frozen=True, slots=True)
class LogisticContext:
    n: int
    seed: int
    design: logistic.LogisticDesign
    sandwich: SandwichPair
    box: ParamBox
    minimizer: MinimizerSettings
    normalization: Optional[Matrix]

    @property
    def theta0(self) -> Vector:
        return self.design.theta0

    @property
    def p(self) -> int:
        return self.design.p

    def replicate(self, replication: int) -> Optional[Vector]:
        data = logistic.sample_outcomes(self.design, self.seed, replication)
        try:
            run: EstimRun = minimize(
                logistic.LogisticObjective(data),
                self.box,
                start_points(
                    self.box, self.theta0, self.minimizer, self.seed, self.n, replication
                ),
                self.minimizer,
            )
        except (BadStart, StalledStart) as e:
            logger.warning("Replication %d at n=%d failed: %s", replication, self.n, e.message)
            return None
        return _finish(run, self.theta0, self.n, self.normalization)


@dataclass(frozen=True, slots=True)
class GPCVContext:
    n: int
    seed: int
    family: gpcv.KernelFamily
    theta0: Vector
    points: gpcv.PointSet
    corr0: gpcv.CorrMatrices
    sandwich: SandwichPair
    box: ParamBox
    minimizer: MinimizerSettings
    normalization: Optional[Matrix]

    @property
    def p(self) -> int:
        return self.family.n_params

    def replicate(self, replication: int) -> Optional[Vector]:
        y: Vector = gpcv.sample_field(self.corr0, self.seed, replication)
        try:
            run: EstimRun = minimize(
                gpcv.CrossValidationObjective(self.family, self.points, y),
                self.box,
                start_points(
                    self.box, self.theta0, self.minimizer, self.seed, self.n, replication
                ),
                self.minimizer,
            )
        except (BadStart, StalledStart, NotPD) as e:
            logger.warning("Replication %d at n=%d failed: %s", replication, self.n, e.message)
            return None
        return _finish(run, self.theta0, self.n, self.normalization)


@dataclass(frozen=True, slots=True)
class SyntheticContext:
    """Draws the statistic directly as N(0, I_p) + shift * n^{-1/2} * ones"""

    n: int
    seed: int
    p: int
    shift: float

    @property
    def sandwich(self) -> SandwichPair:
        return SandwichPair.from_matrices(np.eye(self.p), np.eye(self.p))

    def replicate(self, replication: int) -> Optional[Vector]:
        draw: Vector = stream(
            self.seed, StreamTag.SYNTHETIC, self.n, replication
        ).standard_normal(self.p)
        return draw + self.shift / math.sqrt(self.n)


ExperimentContext = Union[LogisticContext, GPCVContext, SyntheticContext]


def _logistic_context(config: ExperimentConfig, n: int) -> LogisticContext:
    settings = config.logistic
    design = logistic.draw_design(settings, n, config.seed)
    sandwich: SandwichPair = logistic.sandwich_at_truth(design)
    return LogisticContext(
        n=n,
        seed=config.seed,
        design=design,
        sandwich=sandwich,
        box=logistic.parameter_box(settings),
        minimizer=config.minimizer,
        normalization=_normalization(sandwich),
    )


def parameter_space(config: ExperimentConfig) -> tuple[ParamBox, Vector]:
    """Parameter box and true parameter of a logistic or gp-cv experiment"""
    if config.model == ModelKind.LOGISTIC:
        settings = config.logistic
        return logistic.parameter_box(settings), np.asarray(settings.theta0, dtype=np.float64)
    lower, upper = config.gp_cv.box_bounds
    return (
        ParamBox(np.asarray(lower), np.asarray(upper), config.gp_cv.interior_margin),
        np.asarray(config.gp_cv.theta0, dtype=np.float64),
    )


def _gpcv_context(config: ExperimentConfig, n: int) -> GPCVContext:
    settings = config.gp_cv
    family = gpcv.KernelFamily(settings.family, settings.d)
    box, theta0 = parameter_space(config)
    # The sandwich differentiates the criterion inside the margin ball
    if not box.fits_margin_ball(theta0):
        raise ConditionsViolated(
            " ".join(
                (
                    f"interior_margin at n={n}: theta0 {theta0.tolist()} lies within",
                    f"{box.interior_margin} of the parameter box",
                )
            )
        )
    points: gpcv.PointSet = gpcv.build_points(
        n, settings.d, settings.spacing, settings.jitter, config.seed
    )
    try:
        corr0: gpcv.CorrMatrices = gpcv.build_corr(family, theta0, points)
    except NotPD as e:
        raise ConditionsViolated(f"correlation matrix at theta0 for n={n}: {e.message}")
    sandwich: SandwichPair = gpcv.cv_sandwich_at_truth(family, theta0, points, box)
    return GPCVContext(
        n=n,
        seed=config.seed,
        family=family,
        theta0=theta0,
        points=points,
        corr0=corr0,
        sandwich=sandwich,
        box=box,
        minimizer=config.minimizer,
        normalization=_normalization(sandwich),
    )


def build_context(config: ExperimentConfig, n: int) -> ExperimentContext:
    """
    Freeze everything shared by the replications at sample size n

    :param config: experiment configuration
    :type config: ExperimentConfig

    :param n: sample size
    :type n: int

    :return: context whose replicate method yields normalized statistics
    :rtype: ExperimentContext

    :raises ConditionsViolated: no admissible design, a singular correlation matrix
        or theta0 too close to the box boundary
    """
    logger.debug("Building %s context for n=%d", config.model, n)
    if config.model == ModelKind.LOGISTIC:
        return _logistic_context(config, n)
    if config.model == ModelKind.GP_CV:
        return _gpcv_context(config, n)
    return SyntheticContext(n, config.seed, config.synthetic.p, config.synthetic.shift)
