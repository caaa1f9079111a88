import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Optional, Protocol, Sequence

import numpy as np
from scipy import stats

from qclt.data_structures.typing import Vector

__all__ = ("SlopeFit", "fit_slope", "map_replications", "SupportsReplicate")

MIN_SLOPE_POINTS: int = 3


class SupportsReplicate(Protocol):
    def replicate(self, replication: int, /) -> Optional[Vector]: ...


@dataclass(frozen=True, slots=True)
class SlopeFit:
    slope: float
    slope_se: float
    interval: tuple[float, float]
    intercept: float
    points: int


def fit_slope(n_values: Sequence[int], w1_values: Sequence[float]) -> Optional[SlopeFit]:
    """
    Least-squares slope of log(w1) against log(n)

    :param n_values: sample sizes
    :type n_values: Sequence[int]

    :param w1_values: debiased W1 estimates aligned with n_values
    :type w1_values: Sequence[float]

    :return: slope with standard error and 95% interval, fitted over the
        positive estimates only; None when fewer than three are positive
    :rtype: Optional[SlopeFit]
    """
    pairs: list[tuple[int, float]] = [
        (n, w) for n, w in zip(n_values, w1_values) if w > 0
    ]
    if len(pairs) < MIN_SLOPE_POINTS:
        return None
    log_n: Vector = np.log([n for n, _ in pairs])
    log_w: Vector = np.log([w for _, w in pairs])
    fit: Any = stats.linregress(log_n, log_w)
    slope_se: float = float(fit.stderr)
    half_width: float = float(stats.t.ppf(0.975, len(pairs) - 2)) * slope_se
    slope: float = float(fit.slope)
    return SlopeFit(
        slope=slope,
        slope_se=slope_se,
        interval=(slope - half_width, slope + half_width),
        intercept=float(fit.intercept),
        points=len(pairs),
    )


# Set once per worker process by the pool initializer
_worker_context: Optional[SupportsReplicate] = None


def _install_context(context: SupportsReplicate) -> None:
    global _worker_context
    _worker_context = context


def _replicate_in_worker(replication: int) -> Optional[Vector]:
    assert _worker_context is not None
    return _worker_context.replicate(replication)


def map_replications(
    context: SupportsReplicate, replications: int, workers: int
) -> list[Optional[Vector]]:
    """context.replicate(r) for r = 0..replications-1, in replication order.

    The context is shipped once per worker process rather than once per task."""
    if workers <= 1:
        return [context.replicate(replication) for replication in range(replications)]
    chunksize: int = max(1, math.ceil(replications / (4 * workers)))
    with ProcessPoolExecutor(
        max_workers=workers, initializer=_install_context, initargs=(context,)
    ) as executor:
        return list(
            executor.map(_replicate_in_worker, range(replications), chunksize=chunksize)
        )
