import argparse
import logging
import os
import sys
from typing import Final, NoReturn, Sequence

from qclt import __tool_name__
from qclt.data_structures.config import MAX_SEED, ToolDefaults
from qclt.data_structures.exceptions import InvalidConfigurationException
from qclt.data_structures.output_format import OutputFormat

__all__ = ("initialize_parser", "parse_arguments", "COMMANDS")

COMMANDS: Final[tuple[str, ...]] = ("rate-study", "bound-eval", "verify-conditions")
LOG_LEVELS: Final[tuple[str, ...]] = ("DEBUG", "INFO", "WARNING", "ERROR")


def _fail(message: str) -> NoReturn:
    sys.stderr.write(f"{message}\n")
    sys.exit(InvalidConfigurationException.exit_code)


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors are configuration errors for this tool"""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        _fail(f"{self.prog}: error: {message}")


def _validate_filepath(arg: str) -> str:
    arg = arg.strip()
    if not os.path.isfile(arg):
        _fail(f"Configuration file {arg} could not be found")
    return arg


def _validate_seed(arg: str) -> int:
    try:
        seed: int = int(arg)
    except ValueError:
        _fail("Seed must be an integer value")
    if not 0 <= seed < MAX_SEED:
        _fail("Seed must be a non-negative integer below 2**64")
    return seed


def _validate_workers(arg: str) -> int:
    try:
        workers: int = int(arg)
    except ValueError:
        _fail("Worker count must be an integer value")
    if workers < 1:
        _fail("Worker count must be at least 1")
    return workers


def _validate_format(arg: str) -> OutputFormat:
    arg = arg.strip().lower()
    try:
        return OutputFormat(arg)
    except ValueError:
        _fail(
            " ".join(
                (
                    f"Invalid output format {arg},",
                    "supported:",
                    ", ".join(k for k in OutputFormat._value2member_map_),
                )
            )
        )


def _validate_log_level(arg: str) -> str:
    arg = arg.strip().upper()
    if arg not in LOG_LEVELS:
        _fail(f"Invalid log level {arg}, supported: {', '.join(LOG_LEVELS)}")
    return arg


def _experiment_options(defaults: ToolDefaults) -> argparse.ArgumentParser:
    options: argparse.ArgumentParser = _ArgumentParser(add_help=False)
    options.add_argument(
        "--config",
        required=True,
        type=_validate_filepath,
        help="JSON experiment configuration",
    )
    options.add_argument(
        "--seed",
        type=_validate_seed,
        help="Override the seed given in the experiment configuration",
    )
    options.add_argument(
        "--out",
        default=defaults.output_directory,
        help=f"Directory to write results into (default: {defaults.output_directory})",
    )
    options.add_argument(
        "--workers",
        type=_validate_workers,
        default=defaults.workers,
        help="Worker processes for replications, results do not depend on it",
    )
    options.add_argument(
        "--format",
        type=_validate_format,
        default=defaults.output_format,
        help=" ".join(
            (
                "Output format.",
                "Available:",
                ", ".join(k for k in OutputFormat._value2member_map_),
            )
        ),
    )
    options.add_argument(
        "--log-level",
        type=_validate_log_level,
        default=defaults.log_level,
        help=f"Logging level, one of {', '.join(LOG_LEVELS)}",
    )
    return options


def initialize_parser(defaults: ToolDefaults) -> argparse.ArgumentParser:
    """Instantiate and return an argument parser

    :param defaults: Tool defaults supplying option defaults
    :type defaults: ToolDefaults

    :return: argparse.ArgumentParser"""

    parser: Final[argparse.ArgumentParser] = _ArgumentParser(
        prog=__tool_name__,
        description="Monte Carlo rates of normal approximation for M-estimators",
    )
    parser.add_argument(
        "-v",
        "--version",
        help=f"Current version of {__tool_name__}",
        action="store_true",
    )

    subparsers = parser.add_subparsers(dest="command", metavar="command")
    options: argparse.ArgumentParser = _experiment_options(defaults)
    subparsers.add_parser(
        "rate-study",
        parents=[options],
        help="Replicate the estimator along the n grid and fit the W1 decay rate",
    )
    subparsers.add_parser(
        "bound-eval",
        parents=[options],
        help="Evaluate explicit W1 bounds next to Monte Carlo estimates",
    )
    subparsers.add_parser(
        "verify-conditions",
        parents=[options],
        help="Report the model condition diagnostics at every n",
    )
    return parser


def parse_arguments(
    line: Sequence[str], parser: argparse.ArgumentParser
) -> argparse.Namespace:
    parsed_arguments: argparse.Namespace = parser.parse_args(line)

    # Additional validation rules not covered in parse_args
    if not (parsed_arguments.version or parsed_arguments.command):
        parser.error(f"a command is required, one of: {', '.join(COMMANDS)}")

    if parsed_arguments.command:
        parsed_arguments.log_level = logging.getLevelName(parsed_arguments.log_level)
    return parsed_arguments
