"""Subpackage encapsulating the numerical library: linear algebra, random
streams, M-estimation, the logistic and cross validation models and the
Wasserstein estimators"""

from .linalg import Spectrum, diag_part, sym_eig, sym_inv_sqrt, sym_sqrt
from .mestim import (
    EstimRun,
    ObjectiveEval,
    ParamBox,
    SandwichPair,
    bonis_bound,
    minimize,
    normalization_map,
    normalize_statistic,
    reference_rate,
    sandwich_covariance,
)
from .streams import stream
from .wasserstein import (
    EmpiricalSample,
    W1Estimate,
    debias,
    w1_1d_vs_gaussian,
    w1_exact_pair,
    w1_sliced_vs_gaussian,
)

__all__ = (
    "Spectrum",
    "diag_part",
    "sym_eig",
    "sym_inv_sqrt",
    "sym_sqrt",
    "EstimRun",
    "ObjectiveEval",
    "ParamBox",
    "SandwichPair",
    "bonis_bound",
    "minimize",
    "normalization_map",
    "normalize_statistic",
    "reference_rate",
    "sandwich_covariance",
    "stream",
    "EmpiricalSample",
    "W1Estimate",
    "debias",
    "w1_1d_vs_gaussian",
    "w1_exact_pair",
    "w1_sliced_vs_gaussian",
)
