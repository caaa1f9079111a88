"""Generic M-estimation: objective evaluations, box-constrained multi-start
minimization, sandwich matrices and the normalized statistic
C^{-1/2} H sqrt(n) (theta_hat - theta0)"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Final, Optional, Sequence

import numpy as np
import numpy.typing as npt
from scipy import optimize

from qclt.data_structures.config import MinimizerSettings
from qclt.data_structures.exceptions import (
    BadStart,
    InvalidArgument,
    NotInvertible,
    StalledStart,
    StepOutOfDomain,
)
from qclt.data_structures.modes import DerivativeMode, MinimizerMethod
from qclt.data_structures.typing import (
    Matrix,
    RhoFunction,
    ScalarFunction,
    SupportsValueAndGradient,
    ValueAndGradient,
    Vector,
    VectorFunction,
)
from qclt.numerics.linalg import (
    as_symmetric,
    lambda_min,
    sym_inv,
    sym_inv_sqrt,
    sym_sqrt,
    symmetrize,
)

__all__ = (
    "ParamBox",
    "ObjectiveEval",
    "SandwichPair",
    "EstimRun",
    "AverageObjective",
    "minimize",
    "fd_gradient",
    "fd_jacobian",
    "fd_hessian",
    "raw_statistic",
    "normalization_matrix",
    "normalize_statistic",
    "sandwich_covariance",
    "normalization_map",
    "bonis_bound",
    "reference_rate",
)

logger = logging.getLogger(__name__)

# Stalled starts are still accepted when this close to stationarity
ACCEPTABLE_GRADIENT: Final[float] = 1e-7
TIE_TOLERANCE: Final[float] = 1e-12
MIN_LAMBDA_C: Final[float] = 1e-10
HESSIAN_ASYMMETRY_WARNING: Final[float] = 1e-4


@dataclass(frozen=True, slots=True)
class ParamBox:
    lower: Vector
    upper: Vector
    interior_margin: float

    def __post_init__(self) -> None:
        lower = np.asarray(self.lower, dtype=np.float64).ravel()
        upper = np.asarray(self.upper, dtype=np.float64).ravel()
        if lower.shape != upper.shape or not np.all(lower < upper):
            raise InvalidArgument("Parameter box needs lower < upper componentwise")
        if not self.interior_margin > 0:
            raise InvalidArgument("Parameter box interior margin must be positive")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def around(cls, center: npt.ArrayLike, halfwidth: float, margin: float) -> "ParamBox":
        center_array = np.asarray(center, dtype=np.float64)
        return cls(center_array - halfwidth, center_array + halfwidth, margin)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def center(self) -> Vector:
        return 0.5 * (self.lower + self.upper)

    def project(self, theta: npt.ArrayLike) -> Vector:
        return np.clip(np.asarray(theta, dtype=np.float64), self.lower, self.upper)

    def contains(self, theta: npt.ArrayLike) -> bool:
        theta_array = np.asarray(theta, dtype=np.float64)
        return bool(np.all(theta_array >= self.lower) and np.all(theta_array <= self.upper))

    def boundary_distance(self, theta: npt.ArrayLike) -> float:
        theta_array = np.asarray(theta, dtype=np.float64)
        return float(np.min(np.minimum(theta_array - self.lower, self.upper - theta_array)))

    def fits_margin_ball(self, theta0: npt.ArrayLike) -> bool:
        """Whether the closed ball B(theta0, margin) lies strictly inside the box"""
        return self.boundary_distance(theta0) > self.interior_margin

    def uniform(self, rng: np.random.Generator, size: int) -> Matrix:
        return self.lower + (self.upper - self.lower) * rng.random((size, self.dim))


@dataclass(frozen=True, slots=True)
class ObjectiveEval:
    value: float
    gradient: Vector
    hessian: Matrix
    gradient_mode: DerivativeMode = DerivativeMode.ANALYTIC
    hessian_mode: DerivativeMode = DerivativeMode.ANALYTIC


@dataclass(frozen=True, slots=True)
class SandwichPair:
    c_bar: Matrix
    h_bar: Matrix
    lambda_min_c: float
    lambda_min_h: float

    @classmethod
    def from_matrices(cls, c_bar: npt.ArrayLike, h_bar: npt.ArrayLike) -> "SandwichPair":
        c_matrix: Matrix = as_symmetric(c_bar)
        h_matrix: Matrix = as_symmetric(h_bar)
        return cls(c_matrix, h_matrix, lambda_min(c_matrix), lambda_min(h_matrix))

    @property
    def dim(self) -> int:
        return self.c_bar.shape[0]

    @property
    def normalizable(self) -> bool:
        return self.lambda_min_c > MIN_LAMBDA_C


@dataclass(frozen=True, slots=True)
class EstimRun:
    theta_hat: Vector
    objective_at_min: float
    n_starts: int
    converged: bool
    gradient_norm_at_min: float
    best_start: int = 0
    iterations: int = 0
    stalled_starts: tuple[int, ...] = field(default_factory=tuple)


class AverageObjective:
    """M_n(theta) = (1/n) sum_i rho(theta, X_i), from per-observation terms"""

    __slots__ = ("rho", "n")

    def __init__(self, rho: RhoFunction, n: int) -> None:
        self.rho = rho
        self.n = n

    def value_and_gradient(self, theta: Vector, /) -> ValueAndGradient:
        values, gradients, _ = self.rho(np.asarray(theta, dtype=np.float64), False)
        return float(np.mean(values)), gradients.mean(axis=0)

    def evaluate(self, theta: npt.ArrayLike) -> ObjectiveEval:
        values, gradients, hessians = self.rho(np.asarray(theta, dtype=np.float64), True)
        assert hessians is not None
        return ObjectiveEval(
            value=float(np.mean(values)),
            gradient=gradients.mean(axis=0),
            hessian=symmetrize(hessians.mean(axis=0)),
        )


@dataclass(slots=True)
class _StartOutcome:
    index: int
    theta: Vector
    value: float
    gradient_norm: float
    converged: bool
    stalled: bool
    iterations: int


def _projected_gradient(box: ParamBox, theta: Vector, gradient: Vector) -> Vector:
    return theta - box.project(theta - gradient)


def _projected_bfgs(
    objective: SupportsValueAndGradient,
    box: ParamBox,
    start: Vector,
    settings: MinimizerSettings,
    index: int,
) -> _StartOutcome:
    x: Vector = box.project(start)
    f, g = objective.value_and_gradient(x)
    inverse_hessian: Matrix = np.eye(box.dim)
    is_identity: bool = True

    for iteration in range(settings.max_iter):
        scale: float = max(1.0, abs(f))
        pg_norm = float(np.linalg.norm(_projected_gradient(box, x, g)))
        if pg_norm <= settings.gtol * scale:
            return _StartOutcome(index, x, f, float(np.linalg.norm(g)), True, False, iteration)

        active = ((x <= box.lower) & (g > 0)) | ((x >= box.upper) & (g < 0))
        free = ~active
        direction: Vector = np.zeros_like(x)
        direction[free] = -(inverse_hessian[np.ix_(free, free)] @ g[free])
        if g @ direction >= 0:
            inverse_hessian, is_identity = np.eye(box.dim), True
            direction = np.where(free, -g, 0.0)

        step_length: float = 1.0
        accepted: bool = False
        for _ in range(settings.max_backtracks):
            x_new: Vector = box.project(x + step_length * direction)
            step: Vector = x_new - x
            if not np.any(step):
                break
            f_new, g_new = objective.value_and_gradient(x_new)
            if np.isfinite(f_new) and f_new <= f + settings.armijo_c * float(g @ step):
                accepted = True
                break
            step_length *= settings.shrink

        if not accepted:
            if not is_identity:
                # Retry once along the projected steepest descent direction
                inverse_hessian, is_identity = np.eye(box.dim), True
                continue
            converged: bool = pg_norm <= ACCEPTABLE_GRADIENT * scale
            logger.debug(
                "Start %d stalled at iteration %d, projected gradient %.3g",
                index,
                iteration,
                pg_norm,
            )
            return _StartOutcome(
                index, x, f, float(np.linalg.norm(g)), converged, not converged, iteration
            )

        y: Vector = g_new - g
        sy = float(step @ y)
        if sy > 1e-12 * float(np.linalg.norm(step) * np.linalg.norm(y)):
            if is_identity:
                inverse_hessian = np.eye(box.dim) * (sy / float(y @ y))
            rho = 1.0 / sy
            v: Matrix = np.eye(box.dim) - rho * np.outer(step, y)
            inverse_hessian = v @ inverse_hessian @ v.T + rho * np.outer(step, step)
            is_identity = False
        x, f, g = x_new, f_new, g_new

    pg_norm = float(np.linalg.norm(_projected_gradient(box, x, g)))
    return _StartOutcome(
        index,
        x,
        f,
        float(np.linalg.norm(g)),
        pg_norm <= settings.gtol * max(1.0, abs(f)),
        False,
        settings.max_iter,
    )


def _scipy_lbfgsb(
    objective: SupportsValueAndGradient,
    box: ParamBox,
    start: Vector,
    settings: MinimizerSettings,
    index: int,
) -> _StartOutcome:
    result = optimize.minimize(
        objective.value_and_gradient,
        box.project(start),
        jac=True,
        method="L-BFGS-B",
        bounds=list(zip(box.lower, box.upper)),
        options={"maxiter": settings.max_iter, "gtol": settings.gtol, "ftol": 0.0},
    )
    x: Vector = box.project(result.x)
    f, g = objective.value_and_gradient(x)
    pg_norm = float(np.linalg.norm(_projected_gradient(box, x, g)))
    converged: bool = pg_norm <= ACCEPTABLE_GRADIENT * max(1.0, abs(f))
    return _StartOutcome(
        index, x, f, float(np.linalg.norm(g)), converged, False, int(result.nit)
    )


_LOCAL_SOLVERS: Final[dict[MinimizerMethod, Callable[..., _StartOutcome]]] = {
    MinimizerMethod.PROJECTED_BFGS: _projected_bfgs,
    MinimizerMethod.L_BFGS_B: _scipy_lbfgsb,
}


def minimize(
    objective: SupportsValueAndGradient,
    box: ParamBox,
    starts: Sequence[npt.ArrayLike],
    settings: MinimizerSettings,
) -> EstimRun:
    """
    Best local minimum of the objective over the box across all starts

    :param objective: criterion exposing value_and_gradient
    :type objective: SupportsValueAndGradient

    :param box: compact parameter space
    :type box: ParamBox

    :param starts: starting points, all inside the box
    :type starts: Sequence[npt.ArrayLike]

    :param settings: line search and stopping settings
    :type settings: MinimizerSettings

    :return: minimizer summary; lowest objective wins, ties go to the lowest start index
    :rtype: EstimRun
    """
    if not starts:
        raise InvalidArgument("At least one start is required")
    start_points: list[Vector] = [np.asarray(s, dtype=np.float64).ravel() for s in starts]
    for index, start in enumerate(start_points):
        if start.shape != box.lower.shape or not box.contains(start):
            raise InvalidArgument(f"Start {index} lies outside the parameter box")
        value, gradient = objective.value_and_gradient(start)
        if not (np.isfinite(value) and np.all(np.isfinite(gradient))):
            raise BadStart(index)

    solver = _LOCAL_SOLVERS[settings.method]

    def run_start(index: int) -> _StartOutcome:
        return solver(objective, box, start_points[index], settings, index)

    if settings.workers > 1 and len(start_points) > 1:
        with ThreadPoolExecutor(max_workers=settings.workers) as executor:
            outcomes: list[_StartOutcome] = list(
                executor.map(run_start, range(len(start_points)))
            )
    else:
        outcomes = [run_start(index) for index in range(len(start_points))]

    usable: list[_StartOutcome] = [o for o in outcomes if not o.stalled]
    if not usable:
        raise StalledStart()

    best: _StartOutcome = usable[0]
    for outcome in usable[1:]:
        if outcome.value < best.value - TIE_TOLERANCE:
            best = outcome

    return EstimRun(
        theta_hat=best.theta,
        objective_at_min=best.value,
        n_starts=len(start_points),
        converged=best.converged,
        gradient_norm_at_min=best.gradient_norm,
        best_start=best.index,
        iterations=best.iterations,
        stalled_starts=tuple(o.index for o in outcomes if o.stalled),
    )


def _steps(theta: Vector, rel_step: float) -> Vector:
    return rel_step * np.maximum(1.0, np.abs(theta))


def fd_gradient(value_fn: ScalarFunction, theta: npt.ArrayLike, h: float = 1e-6) -> Vector:
    """Central-difference gradient with steps h * max(1, |theta_j|)"""
    theta_array = np.asarray(theta, dtype=np.float64)
    steps: Vector = _steps(theta_array, h)
    gradient: Vector = np.empty_like(theta_array)
    for j, step in enumerate(steps):
        offset = np.zeros_like(theta_array)
        offset[j] = step
        gradient[j] = (value_fn(theta_array + offset) - value_fn(theta_array - offset)) / (
            2 * step
        )
    return gradient


def fd_jacobian(
    vector_fn: VectorFunction,
    theta: npt.ArrayLike,
    rel_step: float = 1e-5,
    box: Optional[ParamBox] = None,
) -> Matrix:
    """Central-difference Jacobian, J[i, k] = d f_i / d theta_k.

    Raises StepOutOfDomain unless theta sits at least two steps inside the box."""
    theta_array = np.asarray(theta, dtype=np.float64)
    steps: Vector = _steps(theta_array, rel_step)
    if box is not None and (
        np.any(theta_array - 2 * steps < box.lower)
        or np.any(theta_array + 2 * steps > box.upper)
    ):
        raise StepOutOfDomain(
            f"Finite-difference steps {steps} leave the parameter box at {theta_array}"
        )
    columns: list[Vector] = []
    for k, step in enumerate(steps):
        offset = np.zeros_like(theta_array)
        offset[k] = step
        columns.append(
            (
                np.asarray(vector_fn(theta_array + offset))
                - np.asarray(vector_fn(theta_array - offset))
            )
            / (2 * step)
        )
    return np.column_stack(columns)


def fd_hessian(
    gradient_fn: VectorFunction,
    theta: npt.ArrayLike,
    rel_step: float = 1e-5,
    box: Optional[ParamBox] = None,
) -> Matrix:
    """Hessian by central differences of an analytic gradient, symmetrized"""
    jacobian: Matrix = fd_jacobian(gradient_fn, theta, rel_step, box)
    asymmetry: float = float(
        np.linalg.norm(jacobian - jacobian.T) / max(np.linalg.norm(jacobian), 1e-300)
    )
    if asymmetry > HESSIAN_ASYMMETRY_WARNING:
        logger.warning("Finite-difference Hessian asymmetry %.3g", asymmetry)
    return symmetrize(jacobian)


def raw_statistic(theta_hat: npt.ArrayLike, theta0: npt.ArrayLike, n: int) -> Vector:
    return math.sqrt(n) * (np.asarray(theta_hat, dtype=np.float64) - np.asarray(theta0))


def normalization_matrix(sandwich: SandwichPair) -> Matrix:
    """C^{-1/2} H, the linear part of the normalized statistic"""
    if not sandwich.normalizable:
        raise NotInvertible(sandwich.lambda_min_c)
    return sym_inv_sqrt(sandwich.c_bar) @ sandwich.h_bar


def normalize_statistic(
    theta_hat: npt.ArrayLike,
    theta0: npt.ArrayLike,
    n: int,
    sandwich: SandwichPair,
) -> Vector:
    """C^{-1/2} H sqrt(n) (theta_hat - theta0); rows of a 2-D theta_hat are
    normalized independently"""
    displacement = raw_statistic(theta_hat, theta0, n)
    return displacement @ normalization_matrix(sandwich).T


def sandwich_covariance(sandwich: SandwichPair) -> Matrix:
    """H^{-1} C H^{-1}, the asymptotic covariance of sqrt(n) (theta_hat - theta0)"""
    h_inverse: Matrix = sym_inv(sandwich.h_bar)
    return symmetrize(h_inverse @ sandwich.c_bar @ h_inverse)


def normalization_map(sandwich: SandwichPair) -> Matrix:
    """H^{-1} C^{1/2}: maps the normalized statistic back to sqrt(n) (theta_hat - theta0).

    Its spectral norm is the Lipschitz constant transferring W1 bounds
    between the two statistics."""
    return sym_inv(sandwich.h_bar) @ sym_sqrt(sandwich.c_bar)


def bonis_bound(beta: float, p: int, n: int, c0: float) -> float:
    """c0 (beta^{3/2} + p beta) / sqrt(n)"""
    if not (beta > 0 and p >= 1 and n >= 1 and c0 > 0):
        raise InvalidArgument(
            f"Bound inputs must be positive, got beta={beta}, p={p}, n={n}, c0={c0}"
        )
    return c0 * (beta**1.5 + p * beta) / math.sqrt(n)


def reference_rate(n: int, c0: float, log_exponent: float) -> float:
    """c0 (log n)^k / sqrt(n), the theorem envelope with free constants"""
    if not (n >= 1 and c0 > 0):
        raise InvalidArgument(f"Rate inputs must be positive, got n={n}, c0={c0}")
    return c0 * math.log(n) ** log_exponent / math.sqrt(n)


