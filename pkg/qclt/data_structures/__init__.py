"""Data structures used within the qclt package"""

from qclt.data_structures.exceptions import (
    ConditionsViolated,
    ExitException,
    InvalidConfigurationException,
    NumericalException,
    UnstableExperiment,
)
from qclt.data_structures.config import ExperimentConfig, ToolDefaults
from qclt.data_structures.modes import (
    Convention,
    DerivativeMode,
    KernelKind,
    MinimizerMethod,
    ModelKind,
    StreamTag,
    W1Method,
)
from qclt.data_structures.output_format import OutputFormat
import qclt.data_structures.typing as qclt_typing

__all__ = (
    "ConditionsViolated",
    "ExitException",
    "InvalidConfigurationException",
    "NumericalException",
    "UnstableExperiment",
    "ExperimentConfig",
    "ToolDefaults",
    "Convention",
    "DerivativeMode",
    "KernelKind",
    "MinimizerMethod",
    "ModelKind",
    "StreamTag",
    "W1Method",
    "OutputFormat",
    "qclt_typing",
)
