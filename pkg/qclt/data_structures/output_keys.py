from enum import StrEnum
from typing import Final

__all__ = (
    "OutputKeys",
    "RATE_STUDY_COLUMNS",
    "BOUND_EVAL_COLUMNS",
    "CONDITIONS_COLUMNS",
)


class OutputKeys(StrEnum):
    N = "n"
    R = "R"
    P = "p"
    FAILURES = "failures"

    W1_COORDMAX_RAW = "w1_coordmax_raw"
    W1_COORDMAX_FLOOR = "w1_coordmax_floor"
    W1_COORDMAX_DEBIASED = "w1_coordmax_debiased"
    W1_SLICED_RAW = "w1_sliced_raw"
    W1_SLICED_FLOOR = "w1_sliced_floor"
    W1_SLICED_DEBIASED = "w1_sliced_debiased"

    BOUND_TRACE = "bound_trace"
    BOUND_CHAOS = "bound_chaos"
    W1_MC = "w1_mc"
    W1_MC_FLOOR = "w1_mc_floor"
    BONIS_BETA = "bonis_beta"
    BONIS_BOUND = "bonis_bound"

    CONDITION = "condition"
    VALUE = "value"
    THRESHOLD = "threshold"
    PASSED = "passed"

    COLUMNS = "columns"
    ROWS = "rows"
    META = "meta"
    SLOPE = "slope"
    SLOPE_SE = "slope_se"
    SLOPE_INTERVAL = "slope_interval"
    REFERENCE_RATE = "reference_rate"
    NORMALIZATION_NORM = "normalization_map_norm"
    CONFIG = "config"
    VERSION = "version"
    PLATFORM = "platform"
    SLOPE_POINTS = "slope_points"


RATE_STUDY_COLUMNS: Final[tuple[OutputKeys, ...]] = (
    OutputKeys.N,
    OutputKeys.R,
    OutputKeys.FAILURES,
    OutputKeys.W1_COORDMAX_RAW,
    OutputKeys.W1_COORDMAX_FLOOR,
    OutputKeys.W1_COORDMAX_DEBIASED,
    OutputKeys.W1_SLICED_RAW,
    OutputKeys.W1_SLICED_FLOOR,
    OutputKeys.W1_SLICED_DEBIASED,
)

BOUND_EVAL_COLUMNS: Final[tuple[OutputKeys, ...]] = (
    OutputKeys.N,
    OutputKeys.P,
    OutputKeys.BOUND_TRACE,
    OutputKeys.BOUND_CHAOS,
    OutputKeys.W1_MC,
    OutputKeys.W1_MC_FLOOR,
    OutputKeys.BONIS_BETA,
    OutputKeys.BONIS_BOUND,
)

CONDITIONS_COLUMNS: Final[tuple[OutputKeys, ...]] = (
    OutputKeys.N,
    OutputKeys.CONDITION,
    OutputKeys.VALUE,
    OutputKeys.THRESHOLD,
    OutputKeys.PASSED,
)
