"""Monte Carlo oracles for the sandwich matrices, the trace identity and the
W1 estimators"""

import math

import numpy as np
import pytest

from qclt.data_structures.config import LogisticSettings
from qclt.data_structures.modes import KernelKind
from qclt.numerics import gpcv, logistic
from qclt.numerics.mestim import fd_gradient
from qclt.numerics.wasserstein import (
    EmpiricalSample,
    _unit_directions,
    w1_1d_vs_gaussian,
    w1_sliced_vs_gaussian,
)

from tests.constants import FD_GRADIENT_TOLERANCE, LOO_TOLERANCE, SEEDS, TRACE_TOLERANCE

FAMILIES: tuple[tuple[gpcv.KernelFamily, tuple[float, ...]], ...] = (
    (gpcv.KernelFamily(KernelKind.EXPONENTIAL), (1.0,)),
    (gpcv.KernelFamily(KernelKind.POWERED_EXPONENTIAL), (1.0, 1.2)),
)


def _relative_frobenius(observed: np.ndarray, expected: np.ndarray) -> float:
    return float(np.linalg.norm(observed - expected) / np.linalg.norm(expected))


def test_logistic_score_covariance() -> None:
    design = logistic.draw_design(LogisticSettings(), 500, 2)
    sandwich = logistic.sandwich_at_truth(design)
    probabilities = np.array([logistic.success_prob(x, design.theta0) for x in design.x])
    rng = np.random.default_rng(12)

    scores: list[np.ndarray] = []
    for _ in range(10):
        y = rng.random((10_000, design.n)) < probabilities
        scores.append((probabilities - y) @ design.x / math.sqrt(design.n))
    stacked = np.vstack(scores)

    error: float = _relative_frobenius(np.cov(stacked, rowvar=False), sandwich.c_bar)
    assert error <= 0.03, " ".join(
        (
            "Score covariance differs from the information matrix",
            "Expected relative error below: 0.03",
            f"Observed: {error}",
        )
    )
    standard_error = np.sqrt(np.diag(sandwich.c_bar) / stacked.shape[0])
    assert np.all(np.abs(stacked.mean(axis=0)) <= 5 * standard_error)


def test_cv_gradient_covariance() -> None:
    family, theta0 = FAMILIES[0]
    points = gpcv.build_points(20, 1, 1.0, 0.2, 0)
    corr = gpcv.build_corr(family, theta0, points)
    sandwich = gpcv.cv_sandwich_at_truth(family, theta0, points)
    matrices = gpcv.grad_matrices(corr)

    fields = corr.chol @ np.random.default_rng(4).standard_normal((points.n, 100_000))
    gradients = np.column_stack(
        [np.sum(fields * (b @ fields), axis=0) / math.sqrt(points.n) for b in matrices.b_sym]
    )

    error: float = _relative_frobenius(
        np.atleast_2d(np.cov(gradients, rowvar=False)), sandwich.c_bar
    )
    assert error <= 0.05, " ".join(
        (
            "Monte Carlo covariance of the CV gradient differs from (2/n) Tr(R B R B)",
            "Expected relative error below: 0.05",
            f"Observed: {error}",
        )
    )


def test_trace_identity() -> None:
    for family, theta0 in FAMILIES:
        for n in (10, 50, 200):
            corr = gpcv.build_corr(family, theta0, gpcv.build_points(n, 1, 1.0, 0.2, n))
            for b in gpcv.grad_matrices(corr).b_sym:
                trace: float = float(np.trace(corr.r @ b))
                assert abs(trace) <= TRACE_TOLERANCE * n, " ".join(
                    (
                        f"Tr(R B) not zero at theta0 ({family.kind}, n={n})",
                        f"Observed: {trace}",
                    )
                )


def test_gradient_oracles() -> None:
    for seed in SEEDS:
        n: int = 20 + 4 * seed
        design = logistic.draw_design(LogisticSettings(), n, seed)
        criterion = logistic.LogisticObjective(logistic.sample_outcomes(design, seed))
        theta = design.theta0 + 0.25
        _, analytic = criterion.value_and_gradient(theta)
        numeric = fd_gradient(lambda t: criterion.value_and_gradient(t)[0], theta)
        assert np.linalg.norm(numeric - analytic) <= FD_GRADIENT_TOLERANCE * max(
            1.0, float(np.linalg.norm(analytic))
        ), f"Logistic gradient oracle failed for seed {seed}"

        family, theta0 = FAMILIES[seed % 2]
        points = gpcv.build_points(n, 1, 1.0, 0.2, seed)
        y = gpcv.sample_field(gpcv.build_corr(family, theta0, points), seed)
        at = np.asarray(theta0) * 0.9
        quadratic_form, _ = gpcv.cv_gradient(gpcv.build_corr(family, at, points), y)
        cv_criterion = gpcv.CrossValidationObjective(family, points, y)
        numeric = fd_gradient(cv_criterion.value, at)
        assert np.linalg.norm(numeric - quadratic_form) <= FD_GRADIENT_TOLERANCE * max(
            1.0, float(np.linalg.norm(quadratic_form))
        ), f"CV gradient oracle failed for seed {seed}"


def test_leave_one_out_oracle() -> None:
    for seed in SEEDS:
        n: int = 10 * (seed + 1)
        family, theta0 = FAMILIES[seed % 2]
        points = gpcv.build_points(n, 1 + seed % 2, 1.0, 0.2, seed)
        corr = gpcv.build_corr(gpcv.KernelFamily(family.kind, points.d), theta0, points)
        y = gpcv.sample_field(corr, seed)
        direct: float = gpcv.loo_objective_direct(corr, y)
        assert abs(gpcv.cv_objective(corr, y) - direct) <= LOO_TOLERANCE * abs(direct), (
            f"Leave-one-out identity failed for n={n}"
        )


def test_field_correlation() -> None:
    family, _ = FAMILIES[0]
    points = gpcv.build_points(2, 1, 1.0, 0.0, 0)
    corr = gpcv.build_corr(family, [math.log(2)], points)
    draws = np.array([gpcv.sample_field(corr, 1, r) for r in range(20_000)])
    observed: float = float(np.corrcoef(draws, rowvar=False)[0, 1])
    assert abs(observed - 0.5) <= 0.02, " ".join(
        (
            "Sampled field correlation off the kernel value",
            "Expected: 0.5",
            f"Observed: {observed}",
        )
    )
    assert np.all(np.abs(draws.var(axis=0) - 1.0) <= 0.05)


def test_w1_calibration() -> None:
    rng = np.random.default_rng(8)
    shifted = w1_1d_vs_gaussian(rng.standard_normal(100_000) + 0.5, floor_replicates=5)
    assert abs(shifted.value - 0.5) <= 0.02, " ".join(
        ("W1 to N(0.5, 1) miscalibrated", "Expected: 0.5", f"Observed: {shifted.value}")
    )

    scaled = w1_1d_vs_gaussian(2 * rng.standard_normal(100_000), floor_replicates=5)
    assert abs(scaled.value - math.sqrt(2 / math.pi)) <= 0.02


def test_sliced_calibration() -> None:
    rng = np.random.default_rng(10)
    null = w1_sliced_vs_gaussian(
        EmpiricalSample(rng.standard_normal((20_000, 2))), 200, floor_replicates=5
    )
    assert null.value <= null.floor + 0.01

    shifted = w1_sliced_vs_gaussian(
        EmpiricalSample(rng.standard_normal((20_000, 2)) + np.array([1.0, 0.0])),
        200,
        floor_replicates=5,
    )
    expected: float = float(np.mean(np.abs(_unit_directions(2, 200, 0)[0])))
    assert shifted.value == pytest.approx(expected, abs=0.02)
