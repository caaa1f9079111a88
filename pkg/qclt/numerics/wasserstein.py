"""Empirical L1 Wasserstein distances between replicated statistics and
the standard Gaussian"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Final, Optional

import numpy as np
import numpy.typing as npt
from scipy import optimize, special
from scipy.spatial import distance

from qclt.data_structures.exceptions import (
    InvalidArgument,
    SizeMismatch,
    TooFewSamples,
    TooLarge,
)
from qclt.data_structures.modes import StreamTag, W1Method
from qclt.data_structures.typing import Matrix, Vector
from qclt.numerics.streams import stream

__all__ = (
    "EmpiricalSample",
    "W1Estimate",
    "normal_quantile_grid",
    "w1_1d_vs_gaussian",
    "w1_coordmax_vs_gaussian",
    "w1_assignment",
    "w1_exact_pair",
    "w1_sliced_vs_gaussian",
    "debias",
)

logger = logging.getLogger(__name__)

MAX_ASSIGNMENT_SIZE: Final[int] = 4096
DEFAULT_FLOOR_REPLICATES: Final[int] = 50


@dataclass(frozen=True, slots=True)
class EmpiricalSample:
    data: Matrix
    label: str = ""

    def __post_init__(self) -> None:
        data: Matrix = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2 or data.shape[0] < 2:
            raise TooFewSamples(
                f"Sample {self.label!r} needs at least 2 replications, got shape {data.shape}"
            )
        if not np.all(np.isfinite(data)):
            raise InvalidArgument(f"Sample {self.label!r} has non-finite entries")
        object.__setattr__(self, "data", data)

    @property
    def replications(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True, slots=True)
class W1Estimate:
    value: float
    method: W1Method
    floor: float = 0.0
    n_slices: Optional[int] = None


def normal_quantile_grid(size: int) -> Vector:
    """Phi^{-1}((i - 0.5) / size) for i = 1..size"""
    return special.ndtri((np.arange(1, size + 1) - 0.5) / size)


def _distance_to_grid(columns: Matrix) -> Vector:
    """Quantile-coupling W1 of each column against N(0, 1)"""
    ordered: Matrix = np.sort(columns, axis=0)
    grid: Vector = normal_quantile_grid(ordered.shape[0])
    return np.mean(np.abs(ordered - grid[:, None]), axis=0)


@lru_cache(maxsize=None)
def _floor_1d(size: int, seed: int, replicates: int) -> float:
    logger.debug("Estimating 1D W1 floor for R=%d from %d reference draws", size, replicates)
    draws: Matrix = np.column_stack(
        [
            stream(seed, StreamTag.REFERENCE, size, replicate).standard_normal(size)
            for replicate in range(replicates)
        ]
    )
    return float(np.mean(_distance_to_grid(draws)))


def _unit_directions(dim: int, n_slices: int, seed: int) -> Matrix:
    """(dim, n_slices) matrix of uniform unit directions, slice s drawn from
    the stream keyed by (seed, dim, s)"""
    directions: Matrix = np.column_stack(
        [
            stream(seed, StreamTag.SLICES, dim, s).standard_normal(dim)
            for s in range(n_slices)
        ]
    )
    return directions / np.linalg.norm(directions, axis=0, keepdims=True)


@lru_cache(maxsize=None)
def _floor_coordmax(size: int, dim: int, seed: int, replicates: int) -> float:
    if dim == 1:
        return _floor_1d(size, seed, replicates)
    logger.debug(
        "Estimating coordinate-max W1 floor for R=%d, p=%d from %d reference draws",
        size,
        dim,
        replicates,
    )
    values: list[float] = []
    for replicate in range(replicates):
        reference: Matrix = stream(
            seed, StreamTag.REFERENCE, size, replicate, dim
        ).standard_normal((size, dim))
        values.append(float(np.max(_distance_to_grid(reference))))
    return float(np.mean(values))


@lru_cache(maxsize=None)
def _floor_sliced(size: int, dim: int, n_slices: int, seed: int, replicates: int) -> float:
    logger.debug(
        "Estimating sliced W1 floor for R=%d, p=%d from %d reference draws",
        size,
        dim,
        replicates,
    )
    directions: Matrix = _unit_directions(dim, n_slices, seed)
    values: list[float] = []
    for replicate in range(replicates):
        reference: Matrix = stream(
            seed, StreamTag.REFERENCE, size, replicate, dim
        ).standard_normal((size, dim))
        values.append(float(np.mean(_distance_to_grid(reference @ directions))))
    return float(np.mean(values))


def w1_1d_vs_gaussian(
    sample: npt.ArrayLike,
    seed: int = 0,
    floor_replicates: int = DEFAULT_FLOOR_REPLICATES,
) -> W1Estimate:
    """
    W1 between the empirical law of a scalar sample and N(0, 1)

    :param sample: R scalar replications
    :type sample: npt.ArrayLike

    :param seed: seed of the reference draws behind the floor
    :type seed: int

    :param floor_replicates: number of reference samples averaged into the floor
    :type floor_replicates: int

    :return: (1/R) sum_i |x_(i) - Phi^{-1}((i - 0.5) / R)| and the expected value
        of the same statistic for a true N(0, 1) sample of size R
    :rtype: W1Estimate
    """
    values: Vector = np.asarray(sample, dtype=np.float64).ravel()
    if values.size < 2:
        raise TooFewSamples(f"W1 needs at least 2 replications, got {values.size}")
    return W1Estimate(
        value=float(_distance_to_grid(values[:, None])[0]),
        method=W1Method.EXACT_1D,
        floor=_floor_1d(values.size, seed, floor_replicates),
    )


def w1_coordmax_vs_gaussian(
    sample: EmpiricalSample,
    seed: int = 0,
    floor_replicates: int = DEFAULT_FLOOR_REPLICATES,
) -> W1Estimate:
    """Largest 1D W1 over the coordinates. The floor is the same maximum taken
    over N(0, I_p) reference samples of the same size"""
    return W1Estimate(
        value=float(np.max(_distance_to_grid(sample.data))),
        method=W1Method.EXACT_1D,
        floor=_floor_coordmax(sample.replications, sample.dim, seed, floor_replicates),
    )


def w1_assignment(a: npt.ArrayLike, b: npt.ArrayLike) -> float:
    """Mean Euclidean cost of the optimal matching between two equal-size point clouds"""
    cost: Matrix = distance.cdist(np.atleast_2d(a), np.atleast_2d(b))
    rows, columns = optimize.linear_sum_assignment(cost)
    return float(cost[rows, columns].mean())


def w1_exact_pair(a: EmpiricalSample, b: EmpiricalSample) -> W1Estimate:
    """Exact W1 between two empirical laws with the same number of atoms.

    Scalar samples use the sorted coupling at any size; vectors go through the
    assignment solver, limited to 4096 replications."""
    if a.data.shape != b.data.shape:
        raise SizeMismatch(
            f"Samples {a.label!r} and {b.label!r} have shapes {a.data.shape} and {b.data.shape}"
        )
    if a.dim == 1:
        value = float(np.mean(np.abs(np.sort(a.data[:, 0]) - np.sort(b.data[:, 0]))))
        return W1Estimate(value, W1Method.EXACT_1D)
    if a.replications > MAX_ASSIGNMENT_SIZE:
        raise TooLarge(
            f"Assignment W1 is limited to {MAX_ASSIGNMENT_SIZE} replications, got {a.replications}"
        )
    return W1Estimate(w1_assignment(a.data, b.data), W1Method.EXACT_ASSIGNMENT)


def w1_sliced_vs_gaussian(
    sample: EmpiricalSample,
    n_slices: int,
    seed: int = 0,
    floor_replicates: int = DEFAULT_FLOOR_REPLICATES,
) -> W1Estimate:
    """Mean over random unit directions u of the 1D W1 between sample.u and N(0, 1)"""
    if n_slices < 1:
        raise InvalidArgument(f"n_slices must be positive, got {n_slices}")
    directions: Matrix = _unit_directions(sample.dim, n_slices, seed)
    return W1Estimate(
        value=float(np.mean(_distance_to_grid(sample.data @ directions))),
        method=W1Method.SLICED,
        floor=_floor_sliced(sample.replications, sample.dim, n_slices, seed, floor_replicates),
        n_slices=n_slices,
    )


def debias(estimate: W1Estimate) -> float:
    return max(estimate.value - estimate.floor, 0.0)
