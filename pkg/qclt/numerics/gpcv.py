"""Leave-one-out cross validation for the correlation parameters of a
stationary Gaussian field observed on an increasing-domain point set"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Final, Optional, Sequence

import numpy as np
import numpy.typing as npt
from scipy import linalg
from scipy.spatial import distance

from qclt.data_structures.exceptions import (
    DegenerateC,
    InvalidArgument,
    ModelInconsistency,
    NotCentered,
    NotPD,
)
from qclt.data_structures.modes import POWER_RANGE, Convention, KernelKind, StreamTag
from qclt.data_structures.typing import Matrix, ValueAndGradient, Vector
from qclt.numerics.linalg import lambda_min, spectral_norm, sym_eig, symmetrize
from qclt.numerics.mestim import ParamBox, SandwichPair, fd_hessian, fd_jacobian
from qclt.numerics.streams import stream

__all__ = (
    "PointSet",
    "KernelFamily",
    "CorrMatrices",
    "GradMatrices",
    "CrossValidationObjective",
    "build_points",
    "kernel_eval",
    "build_corr",
    "sample_field",
    "cv_objective",
    "loo_objective_direct",
    "grad_matrices",
    "cv_gradient",
    "cv_hessian",
    "expected_gradient",
    "cv_sandwich_at_truth",
    "quadform_w1_bound",
    "theta_grid",
    "global_identifiability",
    "local_identifiability",
    "kernel_decay_ratio",
)

logger = logging.getLogger(__name__)

CENTERING_TOLERANCE: Final[float] = 1e-8
DEGENERACY_FLOOR: Final[float] = 1e-12


@dataclass(frozen=True, slots=True)
class PointSet:
    points: Matrix
    min_pairwise_distance: Optional[float]
    distances: Matrix

    @classmethod
    def from_points(cls, points: npt.ArrayLike) -> "PointSet":
        locations: Matrix = np.asarray(points, dtype=np.float64)
        if locations.ndim == 1:
            locations = locations[:, None]
        condensed: Vector = distance.pdist(locations)
        return cls(
            locations,
            float(condensed.min()) if condensed.size else None,
            distance.squareform(condensed),
        )

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True, slots=True)
class KernelFamily:
    kind: KernelKind
    d: int = 1

    @property
    def n_params(self) -> int:
        return 1 if self.kind == KernelKind.EXPONENTIAL else 2

    def validate(self, theta: npt.ArrayLike) -> Vector:
        parameters: Vector = np.asarray(theta, dtype=np.float64).ravel()
        if parameters.size != self.n_params or not np.all(np.isfinite(parameters)):
            raise InvalidArgument(
                f"{self.kind} kernel takes {self.n_params} finite parameters, got {parameters}"
            )
        if parameters[0] <= 0:
            raise InvalidArgument(f"Kernel rate must be positive, got {parameters[0]}")
        if self.kind == KernelKind.POWERED_EXPONENTIAL and not (
            POWER_RANGE[0] <= parameters[1] <= POWER_RANGE[1]
        ):
            raise InvalidArgument(
                f"Kernel power must lie in {list(POWER_RANGE)}, got {parameters[1]}"
            )
        return parameters

    def evaluate(
        self, theta: npt.ArrayLike, distances: npt.ArrayLike
    ) -> tuple[Matrix, tuple[Matrix, ...]]:
        """
        Correlations k_theta(r) and their theta-derivatives at the given distances

        :param theta: kernel parameters, (rate,) or (rate, power)
        :type theta: npt.ArrayLike

        :param distances: array of non-negative Euclidean lags, any shape
        :type distances: npt.ArrayLike

        :return: values and one derivative array per parameter, same shape as distances
        :rtype: tuple[Matrix, tuple[Matrix, ...]]
        """
        parameters: Vector = self.validate(theta)
        r: Matrix = np.asarray(distances, dtype=np.float64)
        if self.kind == KernelKind.EXPONENTIAL:
            values: Matrix = np.exp(-parameters[0] * r)
            return values, (-r * values,)

        rate, power = parameters
        r_power: Matrix = r**power
        values = np.exp(-rate * r_power)
        log_r: Matrix = np.log(np.where(r > 0, r, 1.0))
        return values, (-r_power * values, -rate * r_power * log_r * values)


def kernel_eval(
    family: KernelFamily, theta: npt.ArrayLike, lag: npt.ArrayLike
) -> ValueAndGradient:
    """k_theta(lag) and its gradient with respect to theta"""
    r: float = float(np.linalg.norm(np.atleast_1d(np.asarray(lag, dtype=np.float64))))
    values, derivatives = family.evaluate(theta, r)
    return float(values), np.array([float(derivative) for derivative in derivatives])


@dataclass(frozen=True, slots=True)
class CorrMatrices:
    r: Matrix
    r_inv: Matrix
    # Entries of diag(R^{-1})^{-1}
    d_inv: Vector
    dr: tuple[Matrix, ...]
    chol: Matrix
    lambda_n: float

    @property
    def n(self) -> int:
        return self.r.shape[0]


@dataclass(frozen=True, slots=True)
class GradMatrices:
    b: tuple[Matrix, ...]
    b_sym: tuple[Matrix, ...]

    @property
    def spectral_norms(self) -> tuple[float, ...]:
        return tuple(spectral_norm(b) for b in self.b)


def _grid_size(n: int, d: int) -> int:
    side: int = max(1, math.isqrt(n) if d == 2 else n)
    while side**d < n:
        side += 1
    return side


def build_points(
    n: int, d: int, spacing: float, jitter: float, seed: int
) -> PointSet:
    """
    First n nodes of a regular grid, each coordinate perturbed uniformly by at
    most jitter * spacing

    :param n: number of points
    :type n: int

    :param d: ambient dimension, 1 or 2
    :type d: int

    :param spacing: grid step
    :type spacing: float

    :param jitter: perturbation as a fraction of the spacing, below 0.5
    :type jitter: float

    :param seed: experiment seed, the offsets come from the stream keyed by (seed, n)
    :type seed: int

    :return: points whose pairwise distances are at least spacing * (1 - 2 * jitter)
    :rtype: PointSet
    """
    if not (n >= 1 and d in (1, 2) and spacing > 0 and 0 <= jitter < 0.5):
        raise InvalidArgument(
            f"Invalid point set request n={n}, d={d}, spacing={spacing}, jitter={jitter}"
        )
    side: int = _grid_size(n, d)
    nodes: Matrix = np.array(
        list(itertools.product(range(side), repeat=d))[:n], dtype=np.float64
    )
    offsets: Matrix = stream(seed, StreamTag.POINTS, n).uniform(-jitter, jitter, (n, d))
    return PointSet.from_points(spacing * (nodes + offsets))


def build_corr(
    family: KernelFamily, theta: npt.ArrayLike, points: PointSet
) -> CorrMatrices:
    """R_theta with entries k_theta(x_i - x_j), its inverse through a Cholesky
    factor, and the derivative matrices dR/dtheta_j"""
    values, derivatives = family.evaluate(theta, points.distances)
    r: Matrix = symmetrize(values)
    try:
        chol: Matrix = linalg.cholesky(r, lower=True)
    except linalg.LinAlgError:
        raise NotPD(lambda_min(r))
    r_inv: Matrix = symmetrize(linalg.cho_solve((chol, True), np.eye(points.n)))
    return CorrMatrices(
        r=r,
        r_inv=r_inv,
        d_inv=1.0 / np.diag(r_inv),
        dr=tuple(symmetrize(derivative) for derivative in derivatives),
        chol=chol,
        lambda_n=lambda_min(r),
    )


def sample_field(corr: CorrMatrices, seed: int, replication: int = 0) -> Vector:
    """y = L z with R = L L^T and z standard normal from the stream keyed by
    (seed, n, replication)"""
    z: Vector = stream(seed, StreamTag.FIELD, corr.n, replication).standard_normal(
        corr.n
    )
    return corr.chol @ z


def cv_objective(corr: CorrMatrices, y: npt.ArrayLike) -> float:
    """(1/n) y^T R^{-1} diag(R^{-1})^{-2} R^{-1} y"""
    residuals: Vector = corr.d_inv * (corr.r_inv @ np.asarray(y, dtype=np.float64))
    return float(residuals @ residuals) / corr.n


def loo_objective_direct(corr: CorrMatrices, y: npt.ArrayLike) -> float:
    """Mean squared leave-one-out prediction error by explicit conditional
    expectations, one (n-1)x(n-1) solve per point"""
    observations: Vector = np.asarray(y, dtype=np.float64)
    if corr.n == 1:
        return float(observations[0] ** 2)
    total: float = 0.0
    for i in range(corr.n):
        rest: npt.NDArray[np.bool_] = np.arange(corr.n) != i
        weights: Vector = linalg.solve(
            corr.r[np.ix_(rest, rest)], corr.r[rest, i], assume_a="pos"
        )
        total += (observations[i] - weights @ observations[rest]) ** 2
    return total / corr.n


def grad_matrices(corr: CorrMatrices) -> GradMatrices:
    """B_j = 2 R^{-1} D^{-2} (diag(R^{-1} R_j R^{-1}) D^{-1} - R^{-1} R_j) R^{-1}
    with D = diag(R^{-1}) and R_j = dR/dtheta_j"""
    matrices: list[Matrix] = []
    for dr_j in corr.dr:
        left: Matrix = corr.r_inv @ dr_j
        inner: Matrix = np.diag(np.sum(left * corr.r_inv, axis=1) * corr.d_inv) - left
        matrices.append(2 * corr.r_inv @ ((corr.d_inv**2)[:, None] * inner) @ corr.r_inv)
    return GradMatrices(
        tuple(matrices), tuple(0.5 * (b + b.T) for b in matrices)
    )


def cv_gradient(
    corr: CorrMatrices, y: npt.ArrayLike
) -> tuple[Vector, GradMatrices]:
    observations: Vector = np.asarray(y, dtype=np.float64)
    matrices: GradMatrices = grad_matrices(corr)
    gradient: Vector = np.array(
        [observations @ b @ observations for b in matrices.b]
    ) / corr.n
    return gradient, matrices


class CrossValidationObjective:
    """theta -> M_n(theta) for a fixed field sample, with the analytic gradient
    evaluated without forming B"""

    __slots__ = ("family", "points", "y")

    def __init__(self, family: KernelFamily, points: PointSet, y: npt.ArrayLike) -> None:
        self.family = family
        self.points = points
        self.y = np.asarray(y, dtype=np.float64)

    def value_and_gradient(self, theta: Vector, /) -> ValueAndGradient:
        corr: CorrMatrices = build_corr(self.family, theta, self.points)
        a: Vector = corr.r_inv @ self.y
        residuals: Vector = corr.d_inv * a
        weighted: Vector = corr.d_inv * residuals
        gradient: Vector = np.empty(len(corr.dr))
        for j, dr_j in enumerate(corr.dr):
            diagonal: Vector = np.sum((corr.r_inv @ dr_j) * corr.r_inv, axis=1)
            gradient[j] = weighted @ (diagonal * residuals) - weighted @ (
                corr.r_inv @ (dr_j @ a)
            )
        return float(residuals @ residuals) / corr.n, 2 * gradient / corr.n

    def value(self, theta: Vector, /) -> float:
        return cv_objective(build_corr(self.family, theta, self.points), self.y)

    def gradient(self, theta: Vector, /) -> Vector:
        return self.value_and_gradient(theta)[1]


def cv_hessian(
    family: KernelFamily,
    theta: npt.ArrayLike,
    points: PointSet,
    y: npt.ArrayLike,
    box: Optional[ParamBox] = None,
) -> Matrix:
    """Hessian of M_n by central differences of the analytic gradient"""
    return fd_hessian(
        CrossValidationObjective(family, points, y).gradient, theta, 1e-5, box
    )


def _trace_product(a: Matrix, b: Matrix) -> float:
    """Tr(a b) without forming the product"""
    return float(np.sum(a * b.T))


def expected_gradient(
    family: KernelFamily, theta: npt.ArrayLike, points: PointSet, r0: Matrix
) -> Vector:
    """E[grad M_n(theta)] = (1/n) Tr(R_{theta0} B_theta,j) for y ~ N(0, R_{theta0})"""
    matrices: GradMatrices = grad_matrices(build_corr(family, theta, points))
    return np.array([_trace_product(r0, b) for b in matrices.b_sym]) / points.n


def cv_sandwich_at_truth(
    family: KernelFamily,
    theta0: npt.ArrayLike,
    points: PointSet,
    box: Optional[ParamBox] = None,
) -> SandwichPair:
    """
    Score covariance and expected Hessian of the CV criterion at theta0

    :param family: kernel family
    :type family: KernelFamily

    :param theta0: true parameter
    :type theta0: npt.ArrayLike

    :param points: observation locations
    :type points: PointSet

    :param box: parameter box bounding the finite-difference steps
    :type box: Optional[ParamBox]

    :return: C_jk = (2/n) Tr(R B_j R B_k) and H from differentiating the expected gradient
    :rtype: SandwichPair

    :raises ModelInconsistency: expected gradient at theta0 is not zero
    """
    corr0: CorrMatrices = build_corr(family, theta0, points)
    matrices: GradMatrices = grad_matrices(corr0)
    n: int = points.n

    traces: Vector = np.array([_trace_product(corr0.r, b) for b in matrices.b_sym])
    if np.any(np.abs(traces) > CENTERING_TOLERANCE * n):
        raise ModelInconsistency(
            f"Expected CV gradient at theta0 is not zero, traces {traces.tolist()}"
        )

    weighted: list[Matrix] = [corr0.r @ b for b in matrices.b_sym]
    c_bar: Matrix = np.array(
        [[2 * _trace_product(wj, wk) / n for wk in weighted] for wj in weighted]
    )
    h_bar: Matrix = symmetrize(
        fd_jacobian(
            lambda theta: expected_gradient(family, theta, points, corr0.r),
            theta0,
            1e-5,
            box,
        )
    )
    return SandwichPair.from_matrices(symmetrize(c_bar), h_bar)


def quadform_w1_bound(
    k: npt.ArrayLike,
    a_list: Sequence[npt.ArrayLike],
    convention: Convention = Convention.CHAOS,
) -> tuple[float, Matrix]:
    """
    W1 bound between the vector (y^T A_i y)_i, y ~ N(0, K), and N(0, C)

    :param k: covariance K of the Gaussian vector
    :type k: npt.ArrayLike

    :param a_list: symmetric matrices with Tr(A_i K) = 0
    :type a_list: Sequence[npt.ArrayLike]

    :param convention: trace uses C_ij = Tr(K A_i K A_j), chaos doubles it
        into the exact quadratic-form covariance
    :type convention: Convention

    :return: sqrt(lambda_1(C)) / lambda_p(C) * sqrt(2 sum_ij Tr((K A_i K A_j)^2)), and C
    :rtype: tuple[float, Matrix]
    """
    covariance: Matrix = np.asarray(k, dtype=np.float64)
    n: int = covariance.shape[0]
    weighted: list[Matrix] = [covariance @ np.asarray(a, dtype=np.float64) for a in a_list]
    if not weighted:
        raise InvalidArgument("At least one quadratic form is required")

    traces: Vector = np.array([np.trace(w) for w in weighted])
    if np.any(np.abs(traces) > CENTERING_TOLERANCE * n):
        raise NotCentered(f"Quadratic forms are not centered, traces {traces.tolist()}")

    scale: float = 2.0 if convention == Convention.CHAOS else 1.0
    c: Matrix = symmetrize(
        np.array([[scale * _trace_product(wi, wj) for wj in weighted] for wi in weighted])
    )
    eigenvalues: Vector = sym_eig(c).eigenvalues
    if not (eigenvalues[0] > 0 and eigenvalues[-1] > DEGENERACY_FLOOR * eigenvalues[0]):
        raise DegenerateC(f"Quadratic-form covariance is singular, spectrum {eigenvalues}")

    fourth_order: float = 0.0
    for wi, wj in itertools.product(weighted, repeat=2):
        product: Matrix = wi @ wj
        fourth_order += _trace_product(product, product)

    bound: float = math.sqrt(eigenvalues[0]) / eigenvalues[-1] * math.sqrt(2 * fourth_order)
    return bound, c


def theta_grid(
    lower: Sequence[float], upper: Sequence[float], points_per_dim: int
) -> Matrix:
    axes: list[Vector] = [np.linspace(lo, hi, points_per_dim) for lo, hi in zip(lower, upper)]
    return np.array(list(itertools.product(*axes)), dtype=np.float64)


def global_identifiability(
    family: KernelFamily,
    theta0: npt.ArrayLike,
    points: PointSet,
    grid: Matrix,
    radius: float,
) -> Optional[float]:
    """inf over grid points at distance >= radius from theta0 of
    (1/n) sum_ij (k_theta - k_theta0)^2; None if no grid point qualifies"""
    truth: Vector = np.asarray(theta0, dtype=np.float64)
    r0, _ = family.evaluate(truth, points.distances)
    separations: list[float] = [
        float(np.sum((family.evaluate(theta, points.distances)[0] - r0) ** 2)) / points.n
        for theta in grid
        if np.linalg.norm(theta - truth) >= radius
    ]
    return min(separations) if separations else None


def local_identifiability(
    family: KernelFamily, theta0: npt.ArrayLike, points: PointSet
) -> float:
    """lambda_min((1/n) sum_ij grad k_theta0(x_i - x_j) grad k_theta0(x_i - x_j)^T)"""
    _, derivatives = family.evaluate(theta0, points.distances)
    information: Matrix = np.array(
        [[float(np.sum(dj * dk)) for dk in derivatives] for dj in derivatives]
    ) / points.n
    return lambda_min(symmetrize(information))


def kernel_decay_ratio(
    family: KernelFamily,
    theta: npt.ArrayLike,
    exponent: float,
    max_radius: float = 100.0,
    n_radii: int = 2001,
) -> float:
    """max_r |k_theta(r)| (1 + r^{d + exponent}) over a radius grid; the decay
    condition holds when this stays below the configured constant"""
    radii: Vector = np.linspace(0.0, max_radius, n_radii)
    values, _ = family.evaluate(theta, radii)
    return float(np.max(np.abs(values) * (1 + radii ** (family.d + exponent))))
