import argparse
import json
import logging
import sys
from pathlib import Path
from types import MappingProxyType
from typing import Any, Callable, Final, NoReturn

from qclt import __tool_name__, __version__
from qclt.argparser import initialize_parser, parse_arguments
from qclt.data_structures.config import ExperimentConfig, ToolDefaults
from qclt.data_structures.exceptions import ExitException
from qclt.data_structures.output_format import OutputFormat
from qclt.data_structures.output_keys import OutputKeys
from qclt.experiments import run_bound_eval, run_rate_study, verify_conditions
from qclt.utilities.presentation import OUTPUT_MAPPING, dump_json_output

__all__ = ("main",)

LOG_FORMAT: Final[str] = "%(asctime)s %(levelname)s %(name)s: %(message)s"

logger = logging.getLogger(__tool_name__)


def _rate_study(
    config: ExperimentConfig, defaults: ToolDefaults, workers: int
) -> dict[str, Any]:
    return run_rate_study(config, defaults, workers).to_mapping()


def _bound_eval(
    config: ExperimentConfig, defaults: ToolDefaults, workers: int
) -> dict[str, Any]:
    return run_bound_eval(config).to_mapping()


def _verify_conditions(
    config: ExperimentConfig, defaults: ToolDefaults, workers: int
) -> dict[str, Any]:
    return verify_conditions(config).to_mapping()


# Command -> (handler, file name suffix)
COMMAND_MAPPING: Final[
    MappingProxyType[
        str, tuple[Callable[[ExperimentConfig, ToolDefaults, int], dict[str, Any]], str]
    ]
] = MappingProxyType(
    {
        "rate-study": (_rate_study, ""),
        "bound-eval": (_bound_eval, ".bounds"),
        "verify-conditions": (_verify_conditions, ".conditions"),
    }
)


def _emit(
    output_mapping: dict[str, Any],
    directory: Path,
    stem: str,
    output_format: OutputFormat,
) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    meta: Any = output_mapping.get(OutputKeys.META)

    if output_format == OutputFormat.JSON:
        target: Path = directory / f"{stem}.json"
        dump_json_output(output_mapping, target)
        return [target]

    target = directory / f"{stem}.csv"
    OUTPUT_MAPPING[output_format](output_mapping, target)
    written.append(target)
    if meta is not None:
        sidecar: Path = directory / f"{stem}.meta.json"
        dump_json_output(meta, sidecar)
        written.append(sidecar)
    return written


def main() -> int:
    defaults: Final[ToolDefaults] = ToolDefaults.load_toml(
        Path(__file__).parent / "config.toml"
    )
    parser: Final[argparse.ArgumentParser] = initialize_parser(defaults)
    args: argparse.Namespace = parse_arguments(sys.argv[1:], parser)

    if args.version:
        print(f"{__tool_name__} {__version__}")
        return 0

    logging.basicConfig(level=args.log_level, format=LOG_FORMAT, stream=sys.stderr)

    config: ExperimentConfig = ExperimentConfig.load_json(args.config).with_overrides(
        seed=args.seed
    )
    logger.info(
        "Running %s for %s (seed %d, %d workers)",
        args.command,
        config.model,
        config.seed,
        args.workers,
    )
    logger.debug("Experiment configuration: %s", json.dumps(config.to_mapping()))

    handler, suffix = COMMAND_MAPPING[args.command]
    output_mapping: dict[str, Any] = handler(config, defaults, args.workers)

    for path in _emit(output_mapping, Path(args.out), f"{config.stem}{suffix}", args.format):
        logger.info("Wrote %s", path)
    return 0


def _run_guarded() -> NoReturn:
    try:
        sys.exit(main())
    except ExitException as e:
        sys.stderr.write(f"{__tool_name__}: {e.message}\n")
        sys.exit(e.exit_code)
    except KeyboardInterrupt:
        sys.stdout.write(f"{__tool_name__} interrupted\n")
        sys.exit(130)


if __name__ == "__main__":
    _run_guarded()
