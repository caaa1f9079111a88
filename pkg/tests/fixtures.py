import json
from pathlib import Path
from typing import Any, Callable

import numpy as np
import pytest

from qclt.data_structures.config import ExperimentConfig, ToolDefaults


def spd_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    factor: np.ndarray = rng.standard_normal((dim, dim))
    return factor @ factor.T + dim * np.eye(dim)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def tool_defaults(tmp_path) -> ToolDefaults:
    return ToolDefaults(config_file=tmp_path / "config.toml", floor_replicates=10, n_slices=20)


@pytest.fixture
def synthetic_mapping() -> dict[str, Any]:
    return {
        "model": "synthetic",
        "n_grid": [50, 100, 200, 400],
        "replications": 2000,
        "seed": 7,
        "synthetic": {"p": 2, "shift": 0.0},
    }


@pytest.fixture
def logistic_mapping() -> dict[str, Any]:
    return {
        "model": "logistic",
        "n_grid": [50, 100],
        "replications": 100,
        "seed": 11,
        "logistic": {"p": 2, "theta0": [0.5, -0.5]},
    }


@pytest.fixture
def gpcv_mapping() -> dict[str, Any]:
    return {
        "model": "gp-cv",
        "n_grid": [10, 20],
        "replications": 100,
        "seed": 3,
        "gp_cv": {"family": "exponential", "theta0": [1.0], "theta_grid_points": 5},
        "bounds": {"mc_draws": 2000},
    }


@pytest.fixture
def config_writer(tmp_path) -> Callable[[dict[str, Any]], Path]:
    def write(mapping: dict[str, Any]) -> Path:
        path: Path = tmp_path / "experiment.json"
        path.write_text(json.dumps(mapping), encoding="utf-8")
        return path

    return write


def experiment(mapping: dict[str, Any], **overrides: Any) -> ExperimentConfig:
    return ExperimentConfig.from_mapping({**mapping, **overrides})
