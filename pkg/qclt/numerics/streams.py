"""Keyed counter-based random streams.

Every draw in the package comes from ``stream(seed, tag, *counters)``. The
Philox generator is counter-based: the i-th variate of a stream depends only
on the key and on i, so a replication's draws do not depend on which worker
produces them or in which order replications run."""

import numpy as np

from qclt.data_structures.modes import StreamTag

__all__ = ("stream",)


def stream(seed: int, tag: StreamTag, *counters: int) -> np.random.Generator:
    """
    Generator for the stream keyed by (seed, tag, *counters)

    :param seed: experiment seed, a non-negative integer
    :type seed: int

    :param tag: purpose of the stream, keeps e.g. outcome and start draws disjoint
    :type tag: StreamTag

    :param counters: further non-negative integers, typically (n, replication)
    :type counters: int

    :return: independent generator for that key
    :rtype: numpy.random.Generator
    """
    sequence = np.random.SeedSequence(
        entropy=seed, spawn_key=(int(tag), *(int(c) for c in counters))
    )
    return np.random.Generator(np.random.Philox(sequence))
