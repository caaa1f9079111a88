from enum import IntEnum, StrEnum
from typing import Final

__all__ = (
    "ModelKind",
    "KernelKind",
    "MinimizerMethod",
    "DerivativeMode",
    "W1Method",
    "Convention",
    "StreamTag",
    "POWER_RANGE",
)


class ModelKind(StrEnum):
    LOGISTIC = "logistic"
    GP_CV = "gp-cv"
    SYNTHETIC = "synthetic"


class KernelKind(StrEnum):
    EXPONENTIAL = "exponential"
    POWERED_EXPONENTIAL = "powered-exponential"


# Admissible exponents of the powered-exponential kernel
POWER_RANGE: Final[tuple[float, float]] = (0.5, 1.5)


class MinimizerMethod(StrEnum):
    PROJECTED_BFGS = "projected-bfgs"
    L_BFGS_B = "l-bfgs-b"


class DerivativeMode(StrEnum):
    ANALYTIC = "analytic"
    FINITE_DIFFERENCE = "finite-difference"


class W1Method(StrEnum):
    EXACT_1D = "exact-1d"
    EXACT_ASSIGNMENT = "exact-assignment"
    SLICED = "sliced"


class Convention(StrEnum):
    TRACE = "trace"
    CHAOS = "chaos"


class StreamTag(IntEnum):
    """First component of every random stream key"""

    DESIGN = 0
    OUTCOMES = 1
    POINTS = 2
    FIELD = 3
    STARTS = 4
    SLICES = 5
    REFERENCE = 6
    SYNTHETIC = 7
    MONTE_CARLO = 8
