import json
import logging
import tomllib
import types
from dataclasses import asdict, dataclass, field, fields, is_dataclass, replace
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Any, Final, Mapping, Optional, Union, get_args, get_origin, get_type_hints

from qclt.data_structures.exceptions import InvalidConfigurationException
from qclt.data_structures.modes import POWER_RANGE, KernelKind, MinimizerMethod, ModelKind
from qclt.data_structures.output_format import OutputFormat

__all__ = (
    "ToolDefaults",
    "LogisticSettings",
    "GPCVSettings",
    "SyntheticSettings",
    "MinimizerSettings",
    "WassersteinSettings",
    "BoundSettings",
    "ThresholdSettings",
    "ExperimentConfig",
)

logger = logging.getLogger(__name__)

MAX_SEED: Final[int] = 2**64
# The logistic criterion is strictly convex; cross validation is not
DEFAULT_N_STARTS: Final[Mapping[ModelKind, int]] = MappingProxyType(
    {ModelKind.LOGISTIC: 1, ModelKind.GP_CV: 5, ModelKind.SYNTHETIC: 1}
)
CONFIGURABLE: Final[frozenset[str]] = frozenset(
    [
        "workers",
        "output_format",
        "output_directory",
        "log_level",
        "floor_replicates",
        "n_slices",
    ]
)


def _coerce(annotation: Any, value: Any, tag: str) -> Any:
    """Cast a raw TOML/JSON value to the annotated type of a settings field"""
    origin = get_origin(annotation)
    if origin in (Union, types.UnionType):
        options = get_args(annotation)
        if value is None and type(None) in options:
            return None
        (inner,) = (option for option in options if option is not type(None))
        return _coerce(inner, value, tag)

    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise InvalidConfigurationException(f"Configuration {tag} must be a list")
        item_type = get_args(annotation)[0]
        return tuple(_coerce(item_type, v, f"{tag}[{i}]") for i, v in enumerate(value))

    if is_dataclass(annotation):
        if not isinstance(value, Mapping):
            raise InvalidConfigurationException(
                f"Configuration block {tag} must be an object"
            )
        return _from_mapping(annotation, value, f"{tag}.")

    if isinstance(annotation, type) and issubclass(annotation, Enum):
        try:
            return annotation(value.lower() if isinstance(value, str) else value)
        except ValueError:
            raise InvalidConfigurationException(
                " ".join(
                    (
                        f"Invalid value {value!r} for configuration {tag},",
                        "supported:",
                        ", ".join(str(member.value) for member in annotation),
                    )
                )
            )

    # bool is an int subclass and never a valid number here
    if annotation is bool:
        valid = isinstance(value, bool)
    elif annotation is int:
        valid = isinstance(value, int) and not isinstance(value, bool)
    elif annotation is float:
        valid = isinstance(value, (int, float)) and not isinstance(value, bool)
        value = float(value) if valid else value
    else:
        valid = isinstance(value, annotation)

    if not valid:
        raise InvalidConfigurationException(
            " ".join(
                (
                    f"Invalid type {type(value).__name__} for configuration {tag},",
                    f"expected {getattr(annotation, '__name__', annotation)}",
                )
            )
        )
    return value


def _from_mapping(cls: type, mapping: Mapping[str, Any], prefix: str = "") -> Any:
    hints: dict[str, Any] = get_type_hints(cls)
    known: frozenset[str] = frozenset(f.name for f in fields(cls) if f.init)
    unknown: list[str] = sorted(set(mapping) - known)
    if unknown:
        raise InvalidConfigurationException(
            " ".join(
                (
                    "Unknown configuration keys:",
                    ", ".join(f"{prefix}{key}" for key in unknown),
                )
            )
        )
    kwargs: dict[str, Any] = {
        key: _coerce(hints[key], value, f"{prefix}{key}")
        for key, value in mapping.items()
    }
    try:
        return cls(**kwargs)
    except TypeError as e:
        raise InvalidConfigurationException(f"Incomplete configuration: {e}")


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise InvalidConfigurationException(message)


@dataclass(frozen=True, slots=True)
class ToolDefaults:
    config_file: Path
    workers: int = 1
    output_format: OutputFormat = OutputFormat.CSV
    output_directory: str = "results"
    log_level: str = "INFO"
    floor_replicates: int = 50
    n_slices: int = 50

    additional_kwargs: dict[str, Any] = field(default_factory=dict)

    @staticmethod
    def flatten_mapping(mapping: Mapping[Any, Any]) -> dict[Any, Any]:
        flattened: dict[Any, Any] = {}
        leftover: list[Mapping[Any, Any]] = [mapping]
        while leftover:
            popped_map: Mapping[Any, Any] = leftover.pop(0)
            for k, v in popped_map.items():
                if isinstance(v, Mapping):
                    leftover.append(popped_map[k])
                    continue
                flattened[k] = v
        return flattened

    @classmethod
    def load_toml(cls, config_file: Path) -> "ToolDefaults":
        with open(config_file, "r", encoding="utf-8") as configurations:
            config_dict: dict[str, Any] = cls.flatten_mapping(
                tomllib.loads(configurations.read())
            )

        hints: dict[str, Any] = get_type_hints(cls)
        kwargs: dict[str, Any] = {}
        additional_kwargs: dict[str, Any] = {}
        for tag, attr in config_dict.items():
            if tag not in CONFIGURABLE:
                additional_kwargs[tag] = attr
                continue
            kwargs[tag] = _coerce(hints[tag], attr, tag)

        if additional_kwargs:
            logger.warning(
                "Ignoring unknown settings in %s: %s",
                config_file,
                ", ".join(sorted(additional_kwargs)),
            )

        instance: ToolDefaults = cls(
            config_file=config_file, additional_kwargs=additional_kwargs, **kwargs
        )
        _require(instance.workers >= 1, "workers must be at least 1")
        _require(instance.floor_replicates >= 2, "floor_replicates must be at least 2")
        _require(instance.n_slices >= 1, "n_slices must be at least 1")
        return instance


@dataclass(frozen=True, slots=True)
class LogisticSettings:
    p: int = 2
    theta0: tuple[float, ...] = (0.5, -0.5)
    # Defaults to sqrt(p), the radius of the [-1, 1]^p covariate cube
    c_x1: Optional[float] = None
    c_x2: float = 0.05
    box_halfwidth: float = 3.0
    interior_margin: float = 0.5
    max_redraws: int = 100

    def __post_init__(self) -> None:
        _require(self.p >= 1, "logistic.p must be positive")
        _require(len(self.theta0) == self.p, "logistic.theta0 must have p entries")
        _require(self.box_halfwidth > 0, "logistic.box_halfwidth must be positive")
        _require(self.interior_margin > 0, "logistic.interior_margin must be positive")
        _require(self.max_redraws >= 1, "logistic.max_redraws must be positive")

    @property
    def covariate_bound(self) -> float:
        return self.c_x1 if self.c_x1 is not None else float(self.p) ** 0.5


@dataclass(frozen=True, slots=True)
class GPCVSettings:
    family: KernelKind = KernelKind.EXPONENTIAL
    theta0: tuple[float, ...] = (1.0,)
    d: int = 1
    spacing: float = 1.0
    jitter: float = 0.2
    lower: Optional[tuple[float, ...]] = None
    upper: Optional[tuple[float, ...]] = None
    interior_margin: float = 0.1
    # Defaults to spacing * (1 - 2 * jitter), the guaranteed grid separation
    c_x: Optional[float] = None
    c_r1: float = 1e-3
    decay_constant: float = 10.0
    decay_exponent: float = 0.5
    identifiability_radius: float = 0.5
    identifiability_threshold: float = 1e-4
    theta_grid_points: int = 21

    def __post_init__(self) -> None:
        n_params: int = 1 if self.family == KernelKind.EXPONENTIAL else 2
        _require(
            len(self.theta0) == n_params,
            f"gp_cv.theta0 must have {n_params} entries for family {self.family}",
        )
        _require(self.d in (1, 2), "gp_cv.d must be 1 or 2")
        _require(self.spacing > 0, "gp_cv.spacing must be positive")
        _require(0 <= self.jitter < 0.5, "gp_cv.jitter must lie in [0, 0.5)")
        for bound in (self.lower, self.upper):
            _require(
                bound is None or len(bound) == n_params,
                f"gp_cv box bounds must have {n_params} entries",
            )
        lower, upper = self.box_bounds
        _require(
            all(a < b for a, b in zip(lower, upper)), "gp_cv.lower must lie below gp_cv.upper"
        )
        _require(lower[0] > 0, "gp_cv rate bounds must be positive")
        _require(
            n_params == 1 or POWER_RANGE[0] <= lower[1] and upper[1] <= POWER_RANGE[1],
            f"gp_cv power bounds must lie within {list(POWER_RANGE)}",
        )
        _require(self.interior_margin > 0, "gp_cv.interior_margin must be positive")
        _require(self.theta_grid_points >= 2, "gp_cv.theta_grid_points must be >= 2")

    @property
    def box_bounds(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        default_lower, default_upper = (0.2, 0.5), (5.0, 1.5)
        n_params: int = len(self.theta0)
        return (
            self.lower or default_lower[:n_params],
            self.upper or default_upper[:n_params],
        )

    @property
    def min_distance(self) -> float:
        return (
            self.c_x if self.c_x is not None else self.spacing * (1 - 2 * self.jitter)
        )


@dataclass(frozen=True, slots=True)
class SyntheticSettings:
    p: int = 2
    shift: float = 0.0

    def __post_init__(self) -> None:
        _require(self.p >= 1, "synthetic.p must be positive")


@dataclass(frozen=True, slots=True)
class MinimizerSettings:
    method: MinimizerMethod = MinimizerMethod.PROJECTED_BFGS
    # Resolved per model when left out, see DEFAULT_N_STARTS
    n_starts: Optional[int] = None
    warm_start: bool = True
    gtol: float = 1e-9
    max_iter: int = 500
    armijo_c: float = 1e-4
    shrink: float = 0.5
    max_backtracks: int = 50
    workers: int = 1

    def __post_init__(self) -> None:
        _require(
            self.n_starts is None or self.n_starts >= 1, "minimizer.n_starts must be positive"
        )
        _require(self.gtol > 0, "minimizer.gtol must be positive")
        _require(self.max_iter >= 1, "minimizer.max_iter must be positive")
        _require(0 < self.armijo_c < 1, "minimizer.armijo_c must lie in (0, 1)")
        _require(0 < self.shrink < 1, "minimizer.shrink must lie in (0, 1)")
        _require(self.max_backtracks >= 1, "minimizer.max_backtracks must be positive")
        _require(self.workers >= 1, "minimizer.workers must be positive")


@dataclass(frozen=True, slots=True)
class WassersteinSettings:
    n_slices: Optional[int] = None
    floor_replicates: Optional[int] = None


@dataclass(frozen=True, slots=True)
class BoundSettings:
    c0: float = 1.0
    log_exponent: float = 1.0
    beta: Optional[float] = None
    mc_draws: int = 10_000

    def __post_init__(self) -> None:
        _require(self.c0 > 0, "bounds.c0 must be positive")
        _require(self.beta is None or self.beta > 0, "bounds.beta must be positive")
        _require(self.mc_draws >= 2, "bounds.mc_draws must be at least 2")


@dataclass(frozen=True, slots=True)
class ThresholdSettings:
    c_theta0_h: float = 1e-6
    c_theta0_grad: float = 1e-6
    max_failure_fraction: float = 0.01


@dataclass(frozen=True, slots=True)
class ExperimentConfig:
    model: ModelKind
    n_grid: tuple[int, ...]
    replications: int
    seed: int
    name: Optional[str] = None
    logistic: LogisticSettings = field(default_factory=LogisticSettings)
    gp_cv: GPCVSettings = field(default_factory=GPCVSettings)
    synthetic: SyntheticSettings = field(default_factory=SyntheticSettings)
    minimizer: MinimizerSettings = field(default_factory=MinimizerSettings)
    wasserstein: WassersteinSettings = field(default_factory=WassersteinSettings)
    bounds: BoundSettings = field(default_factory=BoundSettings)
    thresholds: ThresholdSettings = field(default_factory=ThresholdSettings)

    def __post_init__(self) -> None:
        _require(len(self.n_grid) >= 2, "n_grid must have at least 2 entries")
        _require(
            all(a < b for a, b in zip(self.n_grid, self.n_grid[1:])),
            "n_grid must be strictly increasing",
        )
        _require(self.n_grid[0] >= 1, "n_grid entries must be positive")
        _require(self.replications >= 100, "replications must be at least 100")
        _require(0 <= self.seed < MAX_SEED, "seed must be a 64-bit unsigned integer")
        if self.minimizer.n_starts is None:
            object.__setattr__(
                self,
                "minimizer",
                replace(self.minimizer, n_starts=DEFAULT_N_STARTS[self.model]),
            )

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "ExperimentConfig":
        return _from_mapping(cls, mapping)

    @classmethod
    def load_json(cls, config_file: Union[str, Path]) -> "ExperimentConfig":
        try:
            with open(config_file, "r", encoding="utf-8") as source:
                mapping: Any = json.load(source)
        except json.JSONDecodeError as e:
            raise InvalidConfigurationException(
                f"Configuration file {config_file} is not valid JSON: {e}"
            )
        if not isinstance(mapping, Mapping):
            raise InvalidConfigurationException(
                f"Configuration file {config_file} must hold a JSON object"
            )
        return cls.from_mapping(mapping)

    def with_overrides(self, seed: Optional[int] = None) -> "ExperimentConfig":
        if seed is None:
            return self
        return replace(self, seed=seed)

    @property
    def stem(self) -> str:
        return self.name or str(self.model).replace("-", "_")

    def n_slices(self, defaults: ToolDefaults) -> int:
        return self.wasserstein.n_slices or defaults.n_slices

    def floor_replicates(self, defaults: ToolDefaults) -> int:
        return self.wasserstein.floor_replicates or defaults.floor_replicates

    def to_mapping(self) -> dict[str, Any]:
        """JSON-ready echo of the configuration"""
        return json.loads(json.dumps(asdict(self)))

