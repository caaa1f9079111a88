"""Unit tests for tool defaults and experiment configuration loading"""

import json
from pathlib import Path

import pytest

from qclt.data_structures.config import ExperimentConfig, ToolDefaults
from qclt.data_structures.exceptions import InvalidConfigurationException
from qclt.data_structures.modes import KernelKind, MinimizerMethod, ModelKind
from qclt.data_structures.output_format import OutputFormat

from tests.fixtures import (
    config_writer,
    experiment,
    gpcv_mapping,
    logistic_mapping,
    synthetic_mapping,
    tool_defaults,
)

PACKAGE_DEFAULTS: Path = Path(__file__).parents[2] / "qclt" / "config.toml"


def test_package_defaults() -> None:
    defaults = ToolDefaults.load_toml(PACKAGE_DEFAULTS)
    assert defaults.workers == 1
    assert defaults.output_format == OutputFormat.CSV
    assert defaults.floor_replicates == 50
    assert defaults.n_slices == 50
    assert not defaults.additional_kwargs


def test_defaults_validation(tmp_path) -> None:
    config_file: Path = tmp_path / "config.toml"
    config_file.write_text("[defaults]\nworkers=0\n", encoding="utf-8")
    with pytest.raises(InvalidConfigurationException):
        ToolDefaults.load_toml(config_file)

    config_file.write_text('[defaults]\noutput_format="xml"\n', encoding="utf-8")
    with pytest.raises(InvalidConfigurationException):
        ToolDefaults.load_toml(config_file)

    config_file.write_text("[defaults]\nworkers=2\n[extra]\ncolour=true\n", encoding="utf-8")
    defaults = ToolDefaults.load_toml(config_file)
    assert defaults.workers == 2
    assert defaults.additional_kwargs == {"colour": True}


def test_minimal_configuration(synthetic_mapping, logistic_mapping, gpcv_mapping) -> None:
    config = experiment(synthetic_mapping)
    assert config.model == ModelKind.SYNTHETIC
    assert config.n_grid == (50, 100, 200, 400)
    assert config.minimizer.method == MinimizerMethod.PROJECTED_BFGS
    assert config.stem == "synthetic"

    assert experiment(logistic_mapping).logistic.covariate_bound == pytest.approx(2**0.5)

    gp_config = experiment(gpcv_mapping, name="decay")
    assert gp_config.gp_cv.family == KernelKind.EXPONENTIAL
    assert gp_config.gp_cv.min_distance == pytest.approx(0.6)
    assert gp_config.gp_cv.box_bounds == ((0.2,), (5.0,))
    assert gp_config.stem == "decay"


def test_enum_values_case_insensitive(synthetic_mapping) -> None:
    assert experiment(synthetic_mapping, model="SYNTHETIC").model == ModelKind.SYNTHETIC


def test_unknown_keys_rejected(synthetic_mapping) -> None:
    with pytest.raises(InvalidConfigurationException) as error:
        experiment(synthetic_mapping, colour="blue")
    assert "colour" in error.value.message

    with pytest.raises(InvalidConfigurationException) as error:
        experiment(synthetic_mapping, logistic={"q": 2})
    assert "logistic.q" in error.value.message, " ".join(
        (
            "Nested unknown key not reported with its full path",
            "Expected: logistic.q",
            f"Observed: {error.value.message}",
        )
    )


def test_invalid_values_rejected(synthetic_mapping, logistic_mapping) -> None:
    invalid_overrides: tuple[dict, ...] = (
        {"n_grid": [100]},
        {"n_grid": [100, 50]},
        {"n_grid": [0, 50]},
        {"replications": 99},
        {"replications": True},
        {"replications": 150.5},
        {"seed": -1},
        {"seed": 2**64},
        {"model": "probit"},
        {"minimizer": {"armijo_c": 1.5}},
        {"minimizer": "fast"},
        {"bounds": {"c0": 0.0}},
        {"gp_cv": {"family": "powered-exponential", "theta0": [1.0]}},
        {"gp_cv": {"jitter": 0.5}},
        {"gp_cv": {"lower": [0.0]}},
        {"gp_cv": {"lower": [2.0], "upper": [1.0]}},
        {"gp_cv": {"interior_margin": 0.0}},
        {
            "gp_cv": {
                "family": "powered-exponential",
                "theta0": [1.0, 1.0],
                "lower": [0.2, 0.3],
            }
        },
        {
            "gp_cv": {
                "family": "powered-exponential",
                "theta0": [1.0, 1.0],
                "upper": [5.0, 2.0],
            }
        },
        {"minimizer": {"n_starts": 0}},
    )
    for override in invalid_overrides:
        with pytest.raises(InvalidConfigurationException):
            experiment(synthetic_mapping, **override)

    with pytest.raises(InvalidConfigurationException):
        experiment(logistic_mapping, logistic={"p": 3, "theta0": [0.5, -0.5]})

    missing_seed = {k: v for k, v in synthetic_mapping.items() if k != "seed"}
    with pytest.raises(InvalidConfigurationException):
        ExperimentConfig.from_mapping(missing_seed)


def test_json_loading(config_writer, gpcv_mapping, tmp_path) -> None:
    config = ExperimentConfig.load_json(config_writer(gpcv_mapping))
    assert config.seed == 3
    assert ExperimentConfig.from_mapping(config.to_mapping()) == config
    assert json.loads(json.dumps(config.to_mapping()))["gp_cv"]["family"] == "exponential"

    broken: Path = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(InvalidConfigurationException):
        ExperimentConfig.load_json(broken)

    broken.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(InvalidConfigurationException):
        ExperimentConfig.load_json(broken)


def test_seed_override(synthetic_mapping) -> None:
    config = experiment(synthetic_mapping)
    assert config.with_overrides() is config
    assert config.with_overrides(seed=99).seed == 99
    assert config.with_overrides(seed=99).n_grid == config.n_grid


def test_wasserstein_settings_fall_back_to_defaults(synthetic_mapping, tool_defaults) -> None:
    config = experiment(synthetic_mapping)
    assert config.n_slices(tool_defaults) == tool_defaults.n_slices
    overridden = experiment(synthetic_mapping, wasserstein={"n_slices": 7})
    assert overridden.n_slices(tool_defaults) == 7


def test_start_counts_per_model(synthetic_mapping, logistic_mapping, gpcv_mapping) -> None:
    assert experiment(logistic_mapping).minimizer.n_starts == 1
    assert experiment(synthetic_mapping).minimizer.n_starts == 1
    gp_starts = experiment(gpcv_mapping).minimizer.n_starts
    assert gp_starts is not None and gp_starts >= 5, " ".join(
        (
            "Cross validation minimizes from too few starts by default",
            "Expected at least: 5",
            f"Observed: {gp_starts}",
        )
    )
    assert experiment(gpcv_mapping, minimizer={"n_starts": 2}).minimizer.n_starts == 2

    powered = experiment(
        gpcv_mapping,
        gp_cv={"family": "powered-exponential", "theta0": [1.0, 1.0], "theta_grid_points": 3},
    )
    assert powered.gp_cv.box_bounds == ((0.2, 0.5), (5.0, 1.5))
