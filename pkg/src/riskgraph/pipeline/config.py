"""Run configuration loaded from TOML or JSON.

A configuration names an output directory, the stage parameters shared by all
drivers, and one entry per driver that either points at a recorded CSV log or
asks for a synthetic drive with an explicit seed::

    output_dir = "runs/demo"

    [labels]
    features = "one"
    k_range = [2, 10]

    [[drivers]]
    driver_id = "A"
    synth_seed = 11

Relative paths are resolved against the directory of the configuration file.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, TypeVar

from riskgraph.classify.evaluation import DEFAULT_FRACTIONS
from riskgraph.exceptions import RiskGraphError
from riskgraph.graphs.graph_models import GridSpec
from riskgraph.ingest.log_models import CONTINUOUS_CHANNELS
from riskgraph.ingest.smoothing import DEFAULT_SPAN
from riskgraph.ingest.synthetic import DriverProfile, NoiseSpec, SuiteSpec
from riskgraph.labels.label_models import FeatureSet
from riskgraph.pipeline.exceptions import ConfigError
from riskgraph.scenes.extraction import (
    DEFAULT_HORIZON,
    DEFAULT_PERSISTENCE,
    DEFAULT_STRAIGHT_TOL,
    DEFAULT_WINDOW,
)

logger = logging.getLogger(__name__)

DIGEST_LENGTH = 16

T = TypeVar("T")


def digest_of(data: Mapping[str, Any]) -> str:
    """First 16 hex characters of the SHA-256 of canonical JSON."""
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()[:DIGEST_LENGTH]


@dataclass(frozen=True)
class IngestSettings:
    span: int = DEFAULT_SPAN
    channels: tuple[str, ...] = CONTINUOUS_CHANNELS


@dataclass(frozen=True)
class SceneSettings:
    window: int = DEFAULT_WINDOW
    straight_tol: float = DEFAULT_STRAIGHT_TOL
    persistence: int = DEFAULT_PERSISTENCE
    horizon: float = DEFAULT_HORIZON


@dataclass(frozen=True)
class KernelSettings:
    """Parameters of both graph kernels.

    Attributes:
        h: Neighbourhood-hash iterations
        bits: Neighbourhood-hash label width
        seed: Seed of the initial label hash
        normalize: Unit-diagonal shortest-path kernel
    """

    h: int = 3
    bits: int = 16
    seed: int = 7
    normalize: bool = True


@dataclass(frozen=True)
class LabelSettings:
    """Risk-label generation.

    Attributes:
        features: Operation signals clustered
        k: Fixed cluster count, or None to choose by silhouette
        k_range: Inclusive bounds of the candidate cluster counts
        seed: Clustering seed
        use_kpca: Project Feature Two with kernel PCA first
        components: Kernel PCA components
        gamma: Kernel PCA bandwidth; median heuristic when None
    """

    features: FeatureSet = FeatureSet.ONE
    k: int | None = None
    k_range: tuple[int, int] = (2, 10)
    seed: int = 0
    use_kpca: bool = False
    components: int = 2
    gamma: float | None = None

    def __post_init__(self) -> None:
        low, high = self.k_range
        if not 2 <= low <= high:
            raise ConfigError(
                f"labels.k_range must satisfy 2 <= low <= high, "
                f"got {list(self.k_range)}."
            )
        if self.k is not None and self.k < 1:
            raise ConfigError(f"labels.k must be at least 1, got {self.k}.")

    @property
    def candidates(self) -> range:
        return range(self.k_range[0], self.k_range[1] + 1)


@dataclass(frozen=True)
class ClassifySettings:
    C: float = 1.0
    folds: int = 5
    seed: int = 0
    tol: float = 1e-3
    fractions: tuple[float, ...] = DEFAULT_FRACTIONS

    def __post_init__(self) -> None:
        if self.C <= 0:
            raise ConfigError(f"classify.C must be positive, got {self.C}.")
        if self.folds < 2:
            raise ConfigError(f"classify.folds must be at least 2, got {self.folds}.")


@dataclass(frozen=True)
class DriverRun:
    """One driver's input.

    Attributes:
        driver_id: Driver label; also the name of the driver's output folder
        log: Recorded CSV log, or None for a synthetic drive
        synth_seed: Seed of the synthetic drive
        profile: Response characteristics of the synthetic driver
    """

    driver_id: str
    log: Path | None = None
    synth_seed: int | None = None
    profile: DriverProfile = field(default_factory=DriverProfile)


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a run depends on.

    Attributes:
        output_dir: Folder receiving every artifact
        drivers: Driver inputs, processed in order
        suite: Synthetic drive layout shared by synthetic drivers
        ingest: Smoothing parameters
        scenes: Scene extraction parameters
        grid: Occupancy grid geometry
        kernels: Graph kernel parameters
        labels: Risk-label generation parameters
        classify: SVM and cross-validation parameters
    """

    output_dir: Path
    drivers: tuple[DriverRun, ...]
    suite: SuiteSpec = field(default_factory=lambda: SuiteSpec(episodes=100))
    ingest: IngestSettings = field(default_factory=IngestSettings)
    scenes: SceneSettings = field(default_factory=SceneSettings)
    grid: GridSpec = field(default_factory=GridSpec)
    kernels: KernelSettings = field(default_factory=KernelSettings)
    labels: LabelSettings = field(default_factory=LabelSettings)
    classify: ClassifySettings = field(default_factory=ClassifySettings)

    def __post_init__(self) -> None:
        if not self.drivers:
            raise ConfigError("drivers: at least one driver is required.")
        ids = [d.driver_id for d in self.drivers]
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        if duplicates:
            raise ConfigError(f"drivers: duplicate driver_id {', '.join(duplicates)}.")

    def to_dict(self) -> dict[str, Any]:
        """Resolved configuration as plain JSON-compatible values."""
        return _plain(self)

    def digest(self) -> str:
        """Digest of everything but the output location."""
        settings = self.to_dict()
        del settings["output_dir"]
        return digest_of(settings)

    def driver(self, driver_id: str) -> DriverRun:
        for run in self.drivers:
            if run.driver_id == driver_id:
                return run
        raise ConfigError(
            f"No driver '{driver_id}' in the configuration.\n"
            f"Suggestion: choose one of {', '.join(d.driver_id for d in self.drivers)}"
        )


def _plain(value: Any) -> Any:
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {
            f.name: _plain(getattr(value, f.name)) for f in dataclasses.fields(value)
        }
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, FeatureSet):
        return value.value
    if isinstance(value, (tuple, list)):
        return [_plain(v) for v in value]
    return value


def _required(cls: type[Any]) -> set[str]:
    return {
        f.name
        for f in dataclasses.fields(cls)
        if f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING
    }


def _check_keys(data: Any, cls: type[Any], where: str) -> Mapping[str, Any]:
    if not isinstance(data, Mapping):
        raise ConfigError(f"{where} must be a table, got {type(data).__name__}.")
    allowed = {f.name for f in dataclasses.fields(cls)}
    prefix = f"{where}." if where else ""
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(
            f"Unknown field {prefix}{unknown[0]}.\n"
            f"Suggestion: valid fields are {', '.join(sorted(allowed))}"
        )
    missing = sorted(_required(cls) - set(data))
    if missing:
        raise ConfigError(f"Missing required field {prefix}{missing[0]}.")
    return data


def _section(
    cls: type[T],
    data: Any,
    where: str,
    convert: Mapping[str, Callable[[Any], Any]] | None = None,
) -> T:
    table = _check_keys(data, cls, where)
    prefix = f"{where}." if where else ""
    convert = convert or {}
    kwargs: dict[str, Any] = {}
    for key, value in table.items():
        try:
            kwargs[key] = convert[key](value) if key in convert else value
        except (TypeError, ValueError) as e:
            raise ConfigError(
                f"Invalid value for {prefix}{key}: {value!r} ({e})"
            ) from e
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError, RiskGraphError) as e:
        raise ConfigError(f"Invalid {where or 'configuration'} section: {e}") from e


def _resolve(base: Path) -> Callable[[Any], Path]:
    def convert(value: Any) -> Path:
        path = Path(str(value)).expanduser()
        return path if path.is_absolute() else base / path

    return convert


def _float_tuple(value: Any) -> tuple[float, ...]:
    return tuple(float(v) for v in value)


def _k_range(value: Any) -> tuple[int, int]:
    low, high = (int(v) for v in value)
    return (low, high)


def _optional_int(value: Any) -> int | None:
    return None if value in (None, "auto") else int(value)


def _profile(where: str) -> Callable[[Any], DriverProfile]:
    def convert(value: Any) -> DriverProfile:
        return _section(DriverProfile, value, f"{where}.profile")

    return convert


def _suite(data: Any) -> SuiteSpec:
    convert: dict[str, Callable[[Any], Any]] = {
        "gap_modes": _float_tuple,
        "noise": lambda v: _section(NoiseSpec, v, "suite.noise"),
        "driver": lambda v: _section(DriverProfile, v, "suite.driver"),
    }
    return _section(SuiteSpec, data, "suite", convert)


def config_from_dict(data: Mapping[str, Any], base: Path = Path(".")) -> PipelineConfig:
    """Build and validate a configuration from parsed TOML or JSON.

    Raises:
        ConfigError: On unknown or missing fields and invalid values
    """
    resolve = _resolve(base)
    drivers_data = data.get("drivers")
    if not isinstance(drivers_data, list) or not drivers_data:
        raise ConfigError(
            "Missing required field drivers.\n"
            "Suggestion: add at least one [[drivers]] table with a driver_id"
        )
    drivers = []
    for i, entry in enumerate(drivers_data):
        where = f"drivers[{i}]"
        run = _section(
            DriverRun,
            entry,
            where,
            {
                "log": resolve,
                "synth_seed": int,
                "driver_id": str,
                "profile": _profile(where),
            },
        )
        if run.log is None and run.synth_seed is None:
            raise ConfigError(
                f"Missing required field {where}.synth_seed.\n"
                f"Suggestion: give either a recorded log path or a synthetic seed"
            )
        if run.log is not None and run.synth_seed is not None:
            raise ConfigError(f"{where}: give either log or synth_seed, not both.")
        if run.profile.driver_id != run.driver_id:
            run = dataclasses.replace(
                run, profile=dataclasses.replace(run.profile, driver_id=run.driver_id)
            )
        drivers.append(run)

    return _section(
        PipelineConfig,
        {**data, "drivers": tuple(drivers)},
        "",
        {
            "output_dir": resolve,
            "suite": _suite,
            "ingest": lambda v: _section(
                IngestSettings, v, "ingest", {"channels": lambda c: tuple(map(str, c))}
            ),
            "scenes": lambda v: _section(SceneSettings, v, "scenes"),
            "grid": lambda v: _section(GridSpec, v, "grid"),
            "kernels": lambda v: _section(KernelSettings, v, "kernels"),
            "labels": lambda v: _section(
                LabelSettings,
                v,
                "labels",
                {"features": FeatureSet, "k": _optional_int, "k_range": _k_range},
            ),
            "classify": lambda v: _section(
                ClassifySettings, v, "classify", {"fractions": _float_tuple}
            ),
        },
    )


def load_config(path: Path) -> PipelineConfig:
    """Read a configuration file; the suffix selects TOML or JSON.

    Raises:
        ConfigError: If the file is missing, unparsable or invalid
    """
    if not path.is_file():
        raise ConfigError(
            f"Configuration file not found: {path}\n"
            f"Suggestion: start from resources/demo.toml"
        )
    try:
        if path.suffix == ".toml":
            data = tomllib.loads(path.read_text(encoding="utf-8"))
        elif path.suffix == ".json":
            data = json.loads(path.read_text(encoding="utf-8"))
        else:
            raise ConfigError(
                f"Unsupported configuration format '{path.suffix}'.\n"
                f"Suggestion: use a .toml or .json file"
            )
    except (tomllib.TOMLDecodeError, json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ConfigError(f"Cannot parse {path}: {e}") from e
    config = config_from_dict(data, path.resolve().parent)
    logger.debug("Loaded configuration %s (digest %s)", path, config.digest())
    return config
