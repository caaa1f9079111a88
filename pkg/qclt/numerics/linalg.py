"""Dense symmetric linear algebra shared by every model: eigendecomposition,
matrix square roots, the diag operator and spectral diagnostics"""

from dataclasses import dataclass
from typing import Final

import numpy as np
import numpy.typing as npt
from scipy import linalg

from qclt.data_structures.exceptions import (
    InvalidMatrix,
    NotInvertible,
    NotPSD,
)
from qclt.data_structures.typing import Matrix, Vector

__all__ = (
    "Spectrum",
    "as_symmetric",
    "symmetrize",
    "sym_eig",
    "sym_sqrt",
    "sym_inv_sqrt",
    "sym_inv",
    "diag_part",
    "lambda_min",
    "spectral_norm",
)

SYMMETRY_TOLERANCE: Final[float] = 1e-12
PSD_CLAMP: Final[float] = 1e-10
INVERTIBILITY_FLOOR: Final[float] = 1e-12


@dataclass(frozen=True, slots=True)
class Spectrum:
    eigenvalues: Vector
    eigenvectors: Matrix

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[-1])

    def reconstruct(self) -> Matrix:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T


def _as_square(a: npt.ArrayLike) -> Matrix:
    matrix: Matrix = np.atleast_2d(np.asarray(a, dtype=np.float64))
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidMatrix(f"Expected a square matrix, got shape {matrix.shape}")
    return matrix


def as_symmetric(a: npt.ArrayLike) -> Matrix:
    """Validate a matrix as finite and symmetric and return it as float64"""
    matrix: Matrix = _as_square(a)
    if not np.all(np.isfinite(matrix)):
        raise InvalidMatrix("Matrix has non-finite entries")
    asymmetry: Matrix = np.abs(matrix - matrix.T)
    if np.any(asymmetry > SYMMETRY_TOLERANCE * np.maximum(1.0, np.abs(matrix))):
        raise InvalidMatrix(
            f"Matrix is not symmetric, largest asymmetry {asymmetry.max():.3g}"
        )
    return matrix


def symmetrize(a: npt.ArrayLike) -> Matrix:
    matrix: Matrix = _as_square(a)
    return 0.5 * (matrix + matrix.T)


def sym_eig(a: npt.ArrayLike) -> Spectrum:
    """
    Eigendecomposition of a symmetric matrix, eigenvalues in descending order

    :param a: finite symmetric matrix
    :type a: npt.ArrayLike

    :return: eigenvalues and orthonormal eigenvectors (as columns)
    :rtype: Spectrum
    """
    matrix: Matrix = as_symmetric(a)
    eigenvalues, eigenvectors = linalg.eigh(matrix)
    return Spectrum(eigenvalues[::-1].copy(), eigenvectors[:, ::-1].copy())


def sym_sqrt(a: npt.ArrayLike) -> Matrix:
    """Unique symmetric non-negative definite square root.

    Eigenvalues down to -1e-10 * lambda_1 are treated as rounding and clamped to 0."""
    spectrum: Spectrum = sym_eig(a)
    if spectrum.lambda_min < -PSD_CLAMP * spectrum.lambda_max:
        raise NotPSD(spectrum.lambda_min)
    roots: Vector = np.sqrt(np.clip(spectrum.eigenvalues, 0.0, None))
    return symmetrize((spectrum.eigenvectors * roots) @ spectrum.eigenvectors.T)


def _check_invertible(spectrum: Spectrum) -> None:
    if not spectrum.lambda_min > INVERTIBILITY_FLOOR * spectrum.lambda_max:
        raise NotInvertible(spectrum.lambda_min)


def sym_inv_sqrt(a: npt.ArrayLike) -> Matrix:
    """A^{-1/2} = (A^{1/2})^{-1} for positive definite A"""
    spectrum: Spectrum = sym_eig(a)
    _check_invertible(spectrum)
    inverse_roots: Vector = 1.0 / np.sqrt(spectrum.eigenvalues)
    return symmetrize((spectrum.eigenvectors * inverse_roots) @ spectrum.eigenvectors.T)


def sym_inv(a: npt.ArrayLike) -> Matrix:
    spectrum: Spectrum = sym_eig(a)
    _check_invertible(spectrum)
    return symmetrize(
        (spectrum.eigenvectors / spectrum.eigenvalues) @ spectrum.eigenvectors.T
    )


def diag_part(a: npt.ArrayLike) -> Matrix:
    """Zero the off-diagonal entries of a square matrix"""
    matrix: Matrix = _as_square(a)
    return np.diag(np.diag(matrix))


def lambda_min(a: npt.ArrayLike) -> float:
    matrix: Matrix = as_symmetric(a)
    return float(linalg.eigvalsh(matrix, subset_by_index=[0, 0])[0])


def spectral_norm(a: npt.ArrayLike) -> float:
    """Largest singular value (rho_1), defined for non-symmetric matrices too"""
    return float(np.linalg.norm(np.atleast_2d(np.asarray(a, dtype=np.float64)), 2))
