"""End-to-end runs of the command line entry point"""

import csv
import json
import sys

import pytest

from qclt import __tool_name__, __version__
from qclt.__main__ import _run_guarded

from tests.fixtures import config_writer, gpcv_mapping, logistic_mapping, synthetic_mapping

RATE_STUDY_HEADER: list[str] = [
    "n",
    "R",
    "failures",
    "w1_coordmax_raw",
    "w1_coordmax_floor",
    "w1_coordmax_debiased",
    "w1_sliced_raw",
    "w1_sliced_floor",
    "w1_sliced_debiased",
]


def _run(monkeypatch, *arguments: str) -> int:
    monkeypatch.setattr(sys, "argv", [__tool_name__, *arguments])
    with pytest.raises(SystemExit) as exit_info:
        _run_guarded()
    return exit_info.value.code


@pytest.fixture
def small_synthetic(synthetic_mapping) -> dict:
    return {
        **synthetic_mapping,
        "n_grid": [50, 100, 200],
        "replications": 200,
        "wasserstein": {"floor_replicates": 5, "n_slices": 10},
    }


def test_rate_study_outputs(monkeypatch, tmp_path, config_writer, small_synthetic) -> None:
    out = tmp_path / "results"
    code: int = _run(
        monkeypatch, "rate-study", "--config", str(config_writer(small_synthetic)),
        "--out", str(out), "--seed", "21",
    )
    assert code == 0, f"Rate study exited with {code}"

    with open(out / "synthetic.csv", newline="", encoding="utf-8") as source:
        rows = list(csv.reader(source))
    assert rows[0] == RATE_STUDY_HEADER, " ".join(
        ("Unexpected CSV header", f"Expected: {RATE_STUDY_HEADER}", f"Observed: {rows[0]}")
    )
    assert [row[0] for row in rows[1:]] == ["50", "100", "200"]

    meta = json.loads((out / "synthetic.meta.json").read_text(encoding="utf-8"))
    assert meta["version"] == __version__
    assert meta["config"]["seed"] == 21
    assert {"slope", "slope_se", "slope_interval", "reference_rate"} <= set(meta)


def test_json_format(monkeypatch, tmp_path, config_writer, small_synthetic) -> None:
    config_file = config_writer({**small_synthetic, "name": "null_run"})
    code: int = _run(
        monkeypatch, "rate-study", "--config", str(config_file),
        "--out", str(tmp_path), "--format", "json", "--workers", "2",
    )
    assert code == 0
    document = json.loads((tmp_path / "null_run.json").read_text(encoding="utf-8"))
    assert document["columns"] == RATE_STUDY_HEADER
    assert len(document["rows"]) == 3
    assert "meta" in document


def test_other_commands(monkeypatch, tmp_path, config_writer, gpcv_mapping) -> None:
    config_file = str(config_writer(gpcv_mapping))
    assert (
        _run(
            monkeypatch,
            "verify-conditions",
            "--config",
            config_file,
            "--out",
            str(tmp_path),
        )
        == 0
    )
    with open(tmp_path / "gp_cv.conditions.csv", newline="", encoding="utf-8") as source:
        assert next(csv.reader(source)) == ["n", "condition", "value", "threshold", "passed"]

    assert _run(monkeypatch, "bound-eval", "--config", config_file, "--out", str(tmp_path)) == 0
    with open(tmp_path / "gp_cv.bounds.csv", newline="", encoding="utf-8") as source:
        rows = list(csv.reader(source))
    assert rows[0][:4] == ["n", "p", "bound_trace", "bound_chaos"]
    assert rows[1][-1] == "N/A"


def test_exit_codes(monkeypatch, tmp_path, config_writer, logistic_mapping, capsys) -> None:
    out: str = str(tmp_path)

    violated = config_writer({**logistic_mapping, "thresholds": {"c_theta0_h": 10.0}})
    assert _run(monkeypatch, "rate-study", "--config", str(violated), "--out", out) == 2
    assert f"{__tool_name__}: Model conditions violated" in capsys.readouterr().err

    unstable = config_writer({**logistic_mapping, "minimizer": {"max_iter": 1}})
    assert _run(monkeypatch, "rate-study", "--config", str(unstable), "--out", out) == 3

    unknown = config_writer({**logistic_mapping, "colour": "blue"})
    assert _run(monkeypatch, "rate-study", "--config", str(unknown), "--out", out) == 4

    assert _run(monkeypatch, "rate-study", "--config", str(tmp_path / "missing.json")) == 4
    assert _run(monkeypatch, "rate-study") == 4


def test_boundary_theta0_exit_codes(monkeypatch, tmp_path, config_writer, gpcv_mapping) -> None:
    out: str = str(tmp_path)
    boundary = config_writer(
        {**gpcv_mapping, "gp_cv": {**gpcv_mapping["gp_cv"], "theta0": [0.2]}}
    )
    assert _run(monkeypatch, "verify-conditions", "--config", str(boundary), "--out", out) == 0
    assert _run(monkeypatch, "rate-study", "--config", str(boundary), "--out", out) == 2

    open_box = config_writer(
        {**gpcv_mapping, "gp_cv": {**gpcv_mapping["gp_cv"], "lower": [0.0]}}
    )
    assert _run(monkeypatch, "rate-study", "--config", str(open_box), "--out", out) == 4


def test_version(monkeypatch, capsys) -> None:
    assert _run(monkeypatch, "--version") == 0
    assert capsys.readouterr().out.strip() == f"{__tool_name__} {__version__}"
