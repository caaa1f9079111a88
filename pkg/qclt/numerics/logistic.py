"""Well-specified logistic regression with deterministic covariates:
outcome sampling, the negative log-likelihood criterion and its sandwich"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import numpy.typing as npt
from scipy import special

from qclt.data_structures.config import LogisticSettings
from qclt.data_structures.exceptions import ConditionsViolated, InvalidArgument
from qclt.data_structures.modes import StreamTag
from qclt.data_structures.typing import Matrix, Vector
from qclt.numerics.linalg import lambda_min, sym_inv_sqrt, symmetrize
from qclt.numerics.mestim import AverageObjective, ObjectiveEval, ParamBox, SandwichPair
from qclt.numerics.streams import stream

__all__ = (
    "LogisticDesign",
    "LogisticData",
    "LogisticObjective",
    "success_prob",
    "sample_outcomes",
    "objective",
    "sandwich_at_truth",
    "draw_design",
    "fourth_moment_beta",
    "parameter_box",
)

logger = logging.getLogger(__name__)


def _gram(x: Matrix, weights: Optional[Vector] = None) -> Matrix:
    weighted: Matrix = x if weights is None else x * weights[:, None]
    return symmetrize(weighted.T @ x / x.shape[0])


@dataclass(frozen=True, slots=True)
class LogisticDesign:
    x: Matrix
    theta0: Vector
    c_x1: float
    design_lambda_min: float

    @classmethod
    def from_rows(
        cls, x: npt.ArrayLike, theta0: npt.ArrayLike, c_x1: float
    ) -> "LogisticDesign":
        rows: Matrix = np.atleast_2d(np.asarray(x, dtype=np.float64))
        truth: Vector = np.asarray(theta0, dtype=np.float64).ravel()
        if rows.shape[1] != truth.size:
            raise InvalidArgument(
                f"Design has {rows.shape[1]} columns but theta0 has {truth.size} entries"
            )
        largest_norm: float = float(np.max(np.linalg.norm(rows, axis=1)))
        if largest_norm > c_x1 * (1 + 1e-12):
            raise InvalidArgument(
                f"Covariate norm {largest_norm:.6g} exceeds the bound c_x1={c_x1:.6g}"
            )
        return cls(rows, truth, c_x1, lambda_min(_gram(rows)))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def max_row_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.x, axis=1)))


@dataclass(frozen=True, slots=True)
class LogisticData:
    design: LogisticDesign
    y: Vector
    seed: int


def _sigmoid(t: npt.ArrayLike) -> Vector:
    return special.expit(t)


def success_prob(x_i: npt.ArrayLike, theta: npt.ArrayLike) -> float:
    """sigma(x_i^T theta), saturating without overflow for large |x_i^T theta|"""
    return float(_sigmoid(np.dot(x_i, theta)))


def sample_outcomes(
    design: LogisticDesign, seed: int, replication: int = 0
) -> LogisticData:
    """
    Independent Bernoulli(success_prob(x_i, theta0)) outcomes

    :param design: frozen covariates and true parameter
    :type design: LogisticDesign

    :param seed: experiment seed
    :type seed: int

    :param replication: replication counter, part of the stream key
    :type replication: int

    :return: outcomes paired with the design; draw i is the i-th uniform of the
        stream keyed by (seed, n, replication)
    :rtype: LogisticData
    """
    uniforms: Vector = stream(seed, StreamTag.OUTCOMES, design.n, replication).random(
        design.n
    )
    probabilities: Vector = _sigmoid(design.x @ design.theta0)
    return LogisticData(design, (uniforms < probabilities).astype(np.float64), seed)


class LogisticObjective(AverageObjective):
    """M_n(theta) = (1/n) sum_i (log(1 + e^{x_i^T theta}) - y_i x_i^T theta)"""

    __slots__ = ("data",)

    def __init__(self, data: LogisticData) -> None:
        super().__init__(self._rho, data.design.n)
        self.data = data

    def _rho(
        self, theta: Vector, with_hessian: bool
    ) -> tuple[Vector, Matrix, Optional[npt.NDArray[np.float64]]]:
        x: Matrix = self.data.design.x
        y: Vector = self.data.y
        t: Vector = x @ theta
        probabilities: Vector = _sigmoid(t)
        values: Vector = np.logaddexp(0.0, t) - y * t
        gradients: Matrix = (probabilities - y)[:, None] * x
        if not with_hessian:
            return values, gradients, None
        weights: Vector = probabilities * (1 - probabilities)
        hessians = weights[:, None, None] * x[:, :, None] * x[:, None, :]
        return values, gradients, hessians


def objective(data: LogisticData, theta: npt.ArrayLike) -> ObjectiveEval:
    return LogisticObjective(data).evaluate(theta)


def sandwich_at_truth(design: LogisticDesign) -> SandwichPair:
    """Expected Hessian at theta0; the score covariance equals it exactly
    under the well-specified model"""
    probabilities: Vector = _sigmoid(design.x @ design.theta0)
    h_bar: Matrix = _gram(design.x, probabilities * (1 - probabilities))
    return SandwichPair.from_matrices(h_bar, h_bar)


def draw_design(settings: LogisticSettings, n: int, seed: int) -> LogisticDesign:
    """Uniform covariates on [-1, 1]^p, redrawn until the Gram matrix has
    lambda_p >= c_x2"""
    for attempt in range(settings.max_redraws):
        rng: np.random.Generator = stream(seed, StreamTag.DESIGN, n, attempt)
        x: Matrix = rng.uniform(-1.0, 1.0, size=(n, settings.p))
        design = LogisticDesign.from_rows(x, settings.theta0, settings.covariate_bound)
        if design.design_lambda_min >= settings.c_x2:
            return design
        logger.debug(
            "Rejected design for n=%d (attempt %d): lambda_p=%.4g < %.4g",
            n,
            attempt,
            design.design_lambda_min,
            settings.c_x2,
        )
    raise ConditionsViolated(
        " ".join(
            (
                f"no design with lambda_p >= {settings.c_x2} for n={n}",
                f"after {settings.max_redraws} draws",
            )
        )
    )


def fourth_moment_beta(design: LogisticDesign, sandwich: SandwichPair) -> float:
    """max_i E||C^{-1/2} (p_i - y_i) x_i||^4, exact under the model"""
    standardized: Matrix = design.x @ sym_inv_sqrt(sandwich.c_bar)
    norms_squared: Vector = np.sum(standardized**2, axis=1)
    probabilities: Vector = _sigmoid(design.x @ design.theta0)
    central_moment: Vector = (
        probabilities
        * (1 - probabilities)
        * ((1 - probabilities) ** 3 + probabilities**3)
    )
    return float(np.max(norms_squared**2 * central_moment))


def parameter_box(settings: LogisticSettings) -> ParamBox:
    return ParamBox.around(settings.theta0, settings.box_halfwidth, settings.interior_margin)
