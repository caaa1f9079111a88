import os
from typing import Any, Optional, Protocol, TypeAlias, Union

import numpy as np
import numpy.typing as npt

__all__ = (
    "Vector",
    "Matrix",
    "ValueAndGradient",
    "SupportsValueAndGradient",
    "ScalarFunction",
    "VectorFunction",
    "RhoFunction",
    "OutputFunction",
)

Vector: TypeAlias = npt.NDArray[np.float64]
Matrix: TypeAlias = npt.NDArray[np.float64]
ValueAndGradient: TypeAlias = tuple[float, Vector]


class SupportsValueAndGradient(Protocol):
    """Anything the minimizer can drive"""

    def value_and_gradient(self, theta: Vector, /) -> ValueAndGradient: ...


class ScalarFunction(Protocol):
    def __call__(self, theta: Vector, /) -> float: ...


class VectorFunction(Protocol):
    def __call__(self, theta: Vector, /) -> Vector: ...


class RhoFunction(Protocol):
    """Per-observation criterion of an average-of-rho objective.

    Returns the n values, the (n, p) gradients and, when requested,
    the (n, p, p) Hessians of rho(theta, X_i)."""

    def __call__(
        self, theta: Vector, with_hessian: bool, /
    ) -> tuple[Vector, Matrix, Optional[npt.NDArray[np.float64]]]: ...


class OutputFunction(Protocol):
    def __call__(
        self,
        output_mapping: dict[str, Any],
        filepath: Union[str, os.PathLike[str]],
    ) -> None: ...
