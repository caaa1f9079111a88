"""Unit tests for CLI argument parser"""

import argparse
import logging

import pytest

from qclt.argparser import COMMANDS, initialize_parser, parse_arguments
from qclt.data_structures.output_format import OutputFormat

from tests.fixtures import config_writer, synthetic_mapping, tool_defaults


def test_command_required(tool_defaults) -> None:
    parser: argparse.ArgumentParser = initialize_parser(tool_defaults)
    with pytest.raises(SystemExit) as exit_info:
        parse_arguments([], parser)
    assert exit_info.value.code == 4, " ".join(
        (
            "Missing command rejected with unexpected exit code",
            "Expected: 4",
            f"Observed: {exit_info.value.code}",
        )
    )


def test_version_without_command(tool_defaults) -> None:
    parser: argparse.ArgumentParser = initialize_parser(tool_defaults)
    assert parse_arguments(["--version"], parser).version


def test_illegal_options(tool_defaults, config_writer, synthetic_mapping) -> None:
    parser: argparse.ArgumentParser = initialize_parser(tool_defaults)
    config_file = config_writer(synthetic_mapping)

    illegal_arguments: tuple[str, ...] = (
        "rate-study",
        f"rate-study --config {config_file} --workers 0",
        f"rate-study --config {config_file} --workers many",
        f"rate-study --config {config_file} --seed -1",
        f"rate-study --config {config_file} --seed {2**64}",
        f"rate-study --config {config_file} --format xml",
        f"rate-study --config {config_file} --log-level loud",
        f"sweep --config {config_file}",
    )

    for line in illegal_arguments:
        with pytest.raises(SystemExit) as exit_info:
            parse_arguments(line.split(), parser)
        assert exit_info.value.code == 4, " ".join(
            (
                f"Illegal arguments '{line}' rejected with unexpected exit code",
                "Expected: 4",
                f"Observed: {exit_info.value.code}",
            )
        )


def test_allowed_combinations(tool_defaults, config_writer, synthetic_mapping) -> None:
    parser: argparse.ArgumentParser = initialize_parser(tool_defaults)
    config_file = config_writer(synthetic_mapping)

    for command in COMMANDS:
        for extra in ("", "--seed 5", "--workers 3 --format json", "--log-level debug"):
            line: str = f"{command} --config {config_file} {extra}"
            try:
                args: argparse.Namespace = parse_arguments(line.split(), parser)
            except SystemExit as e:
                e.add_note(f"Original argument: {line}")
                raise e
            assert args.command == command


def test_option_defaults(tool_defaults, config_writer, synthetic_mapping) -> None:
    parser: argparse.ArgumentParser = initialize_parser(tool_defaults)
    config_file = config_writer(synthetic_mapping)

    args: argparse.Namespace = parse_arguments(
        ["verify-conditions", "--config", str(config_file)], parser
    )
    assert args.seed is None
    assert args.workers == tool_defaults.workers
    assert args.format == OutputFormat.CSV
    assert args.out == tool_defaults.output_directory
    assert args.log_level == logging.INFO


def test_config_existence(tool_defaults, tmp_path) -> None:
    parser: argparse.ArgumentParser = initialize_parser(tool_defaults)
    missing = tmp_path / "missing.json"

    with pytest.raises(SystemExit) as exit_info:
        parse_arguments(["bound-eval", "--config", str(missing)], parser)
    assert exit_info.value.code == 4

    missing.write_text("{}", encoding="utf-8")
    parse_arguments(["bound-eval", "--config", str(missing)], parser)
