"""Full-size rate experiments. Deselect with -m "not slow"."""

import pytest

from qclt.data_structures.config import ExperimentConfig, ToolDefaults
from qclt.experiments import run_rate_study
from qclt.utilities.presentation import dump_csv_output

from tests.fixtures import tool_defaults

LOGISTIC_RATE: dict = {
    "model": "logistic",
    "n_grid": [50, 100, 200, 400, 800, 1600],
    "replications": 2000,
    "seed": 20240611,
    "logistic": {"p": 2, "theta0": [0.5, -0.5], "c_x2": 0.05},
}

GPCV_RATE: dict = {
    "model": "gp-cv",
    "n_grid": [100, 200, 400, 800],
    "replications": 500,
    "seed": 20240611,
    "gp_cv": {"family": "exponential", "theta0": [1.0], "spacing": 1.0, "jitter": 0.2},
    "minimizer": {"n_starts": 5, "warm_start": True},
}


def _inversions(values: list[float]) -> int:
    return sum(b >= a for a, b in zip(values, values[1:]))


@pytest.mark.slow
def test_logistic_rate(tool_defaults) -> None:
    report = run_rate_study(ExperimentConfig.from_mapping(LOGISTIC_RATE), tool_defaults, 4)
    assert report.slope is not None
    assert -0.65 <= report.slope.slope <= -0.35, " ".join(
        (
            "Logistic MLE distance to normality decays at the wrong rate",
            "Expected slope in: [-0.65, -0.35]",
            f"Observed: {report.slope.slope}",
        )
    )
    assert _inversions([row.coordmax_debiased for row in report.rows]) <= 1


@pytest.mark.slow
def test_gpcv_rate(tool_defaults) -> None:
    report = run_rate_study(ExperimentConfig.from_mapping(GPCV_RATE), tool_defaults, 4)
    assert report.slope is not None
    assert -0.75 <= report.slope.slope <= -0.25, " ".join(
        (
            "CV estimator distance to normality decays at the wrong rate",
            "Expected slope in: [-0.75, -0.25]",
            f"Observed: {report.slope.slope}",
        )
    )


@pytest.mark.slow
def test_synthetic_rates(tool_defaults) -> None:
    base: dict = {
        "model": "synthetic",
        "n_grid": [50, 100, 200, 400, 800, 1600],
        "replications": 100_000,
        "seed": 5,
        "wasserstein": {"n_slices": 10},
    }
    null = run_rate_study(ExperimentConfig.from_mapping(base), tool_defaults, 4)
    assert all(row.coordmax_debiased <= 0.005 for row in null.rows)

    planted = run_rate_study(
        ExperimentConfig.from_mapping({**base, "synthetic": {"p": 2, "shift": 1.0}}),
        tool_defaults,
        4,
    )
    assert planted.slope is not None
    assert abs(planted.slope.slope + 0.5) <= 0.1


@pytest.mark.slow
def test_logistic_rate_deterministic(tmp_path) -> None:
    defaults = ToolDefaults(config_file=tmp_path / "config.toml")
    config = ExperimentConfig.from_mapping(LOGISTIC_RATE)
    for workers in (1, 3):
        dump_csv_output(
            run_rate_study(config, defaults, workers).to_mapping(), tmp_path / f"{workers}.csv"
        )
    assert (tmp_path / "1.csv").read_bytes() == (tmp_path / "3.csv").read_bytes()
