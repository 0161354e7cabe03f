"""Run configuration: packaged defaults overlaid with a user JSON document."""

import importlib.resources
import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, List, Optional, Tuple, Type, TypeVar

import aiofiles

from structedge.channels import ChannelParams
from structedge.constants import THREADS_ENV_VAR
from structedge.detector import DetectOptions
from structedge.evaluation.metrics import EvalOptions
from structedge.run_status import RunStatus
from structedge.structforest.params import ForestParams
from structedge.type_definitions import RunConfigDict

# pylint: disable=line-too-long

_LOGGER = logging.getLogger(__name__)

DEFAULTS_FILE = "run_config.json"

_SectionT = TypeVar("_SectionT")


@dataclass(frozen=True)
class PathsConfig:
    """
    Dataset and output locations.

    Attributes:
        train_dir (Optional[str]): Training dataset root.
        test_dir (Optional[str]): Test dataset root.
        model_path (Optional[str]): Model file.
        output_dir (Optional[str]): Directory for detections and reports.
    """
    train_dir: Optional[str] = None
    test_dir: Optional[str] = None
    model_path: Optional[str] = None
    output_dir: Optional[str] = None

    def validate(self) -> None:
        """Paths are free-form; nothing to check."""


_SECTIONS: Dict[str, type] = {
    "channels": ChannelParams,
    "forest": ForestParams,
    "detect": DetectOptions,
    "eval": EvalOptions,
    "paths": PathsConfig,
}
_SCALARS: Dict[str, type] = {"threads": int, "deterministic": bool}
# Runtime-only fields not accepted from JSON
_HIDDEN_FIELDS = {"channel_params"}


class ConfigError(ValueError):
    """Invalid configuration document."""


def _section_keys(cls: type) -> List[str]:
    return [f.name for f in fields(cls) if f.name not in _HIDDEN_FIELDS]


def _check_type(section: str, key: str, value: Any, default: Any) -> None:
    if value is None or default is None:
        return
    if isinstance(default, bool) or isinstance(value, bool):
        ok = isinstance(default, bool) and isinstance(value, bool)
    elif isinstance(default, (int, float)):
        ok = isinstance(value, (int, float)) and (isinstance(default, float) or isinstance(value, int))
    else:
        ok = isinstance(value, type(default))
    if not ok:
        raise ConfigError(f"{section}.{key} must be of type {type(default).__name__}")


def _build_section(cls: Type[_SectionT], name: str, base: _SectionT, overrides: Dict[str, Any]) -> _SectionT:
    if not isinstance(overrides, dict):
        raise ConfigError(f"section '{name}' must be an object")
    unknown = sorted(set(overrides) - set(_section_keys(cls)))
    if unknown:
        raise ConfigError(f"unknown keys in '{name}': {', '.join(unknown)}")
    for key, value in overrides.items():
        _check_type(name, key, value, getattr(base, key))
    values = {k: (float(v) if isinstance(getattr(base, k), float) and isinstance(v, int) and not isinstance(v, bool) else v) for k, v in overrides.items()}
    return replace(base, **values)  # type: ignore[type-var]


@dataclass(frozen=True)
class RunConfig:
    """
    Complete run configuration.

    Attributes:
        channels (ChannelParams): Channel parameters.
        forest (ForestParams): Forest training parameters.
        detect (DetectOptions): Detection options.
        eval (EvalOptions): Benchmark options.
        paths (PathsConfig): Dataset and output paths.
        threads (int): Worker count (0 = one per CPU).
        deterministic (bool): Require bit-identical outputs across runs.
    """
    channels: ChannelParams = field(default_factory=ChannelParams)
    forest: ForestParams = field(default_factory=ForestParams)
    detect: DetectOptions = field(default_factory=DetectOptions)
    eval: EvalOptions = field(default_factory=EvalOptions)
    paths: PathsConfig = field(default_factory=PathsConfig)
    threads: int = 0
    deterministic: bool = False

    @classmethod
    def from_dict(cls, document: Dict[str, Any], base: Optional["RunConfig"] = None) -> "RunConfig":
        """
        Overlay a configuration document on a base configuration, section by section.

        Raises:
            ConfigError: On unknown sections or keys, wrong types or invalid values.
        """
        base = base or cls()
        if not isinstance(document, dict):
            raise ConfigError("configuration must be a JSON object")
        unknown = sorted(set(document) - set(_SECTIONS) - set(_SCALARS))
        if unknown:
            raise ConfigError(f"unknown configuration sections: {', '.join(unknown)}")
        updates: Dict[str, Any] = {}
        for name, section_cls in _SECTIONS.items():
            if name in document:
                updates[name] = _build_section(section_cls, name, getattr(base, name), document[name])
        for name, typ in _SCALARS.items():
            if name in document:
                value = document[name]
                if not isinstance(value, typ) or (typ is int and isinstance(value, bool)):
                    raise ConfigError(f"{name} must be of type {typ.__name__}")
                updates[name] = value
        config = replace(base, **updates)
        config.validate()
        return config

    def validate(self) -> None:
        """
        Validate every section.

        Raises:
            ConfigError: If any value is out of range.
        """
        try:
            for name in _SECTIONS:
                getattr(self, name).validate()
        except (TypeError, ValueError) as err:
            raise ConfigError(str(err)) from err
        if self.threads < 0:
            raise ConfigError("threads must be >= 0")
        if self.detect.n_trees_eval > self.forest.n_trees:
            raise ConfigError("detect.n_trees_eval exceeds forest.n_trees")

    def to_dict(self) -> RunConfigDict:
        """JSON-ready dict of the configuration."""
        out: Dict[str, Any] = {name: {k: v for k, v in asdict(getattr(self, name)).items() if k not in _HIDDEN_FIELDS} for name in _SECTIONS}
        out["threads"] = self.threads
        out["deterministic"] = self.deterministic
        return out  # type: ignore[return-value]

    def to_json(self) -> str:
        """Pretty JSON document."""
        return json.dumps(self.to_dict(), indent=2)

    def detect_options(self) -> DetectOptions:
        """Detection options bound to the configured channel parameters."""
        return replace(self.detect, channel_params=self.channels)

    def resolve_threads(self, cli_threads: Optional[int] = None) -> int:
        """Worker count: CLI flag, else the environment variable, else the config (0 = CPU count)."""
        if cli_threads is not None and cli_threads > 0:
            return cli_threads
        env = os.environ.get(THREADS_ENV_VAR)
        if env:
            try:
                if int(env) > 0:
                    return int(env)
            except ValueError:
                _LOGGER.warning("Ignoring invalid %s=%r", THREADS_ENV_VAR, env)
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)

    @classmethod
    async def load_defaults(cls) -> Tuple[RunStatus, Optional["RunConfig"]]:
        """Load the packaged default configuration."""
        try:
            path = importlib.resources.files("structedge.config").joinpath(DEFAULTS_FILE)
            async with aiofiles.open(str(path), "r", encoding="utf-8") as f:
                document = json.loads(await f.read())
            return RunStatus.SUCCESS, cls.from_dict(document)
        except (OSError, json.JSONDecodeError, ModuleNotFoundError) as err:
            _LOGGER.error("Error loading default configuration: %s", err)
            return RunStatus.IO_ERROR, None
        except ConfigError as err:
            _LOGGER.error("Packaged default configuration is invalid: %s", err)
            return RunStatus.CONFIG_ERROR, None

    @classmethod
    async def load(cls, path: Optional[str] = None) -> Tuple[RunStatus, Optional["RunConfig"]]:
        """
        Load the defaults and overlay the JSON document at path, if given.

        Returns:
            Tuple[RunStatus, Optional[RunConfig]]: IO_ERROR if a file cannot be read,
            CONFIG_ERROR for malformed or invalid documents.
        """
        status, defaults = await cls.load_defaults()
        if status != RunStatus.SUCCESS or path is None:
            return status, defaults
        try:
            async with aiofiles.open(path, "r", encoding="utf-8") as f:
                content = await f.read()
        except OSError as err:
            _LOGGER.error("Cannot read configuration %s: %s", path, err)
            return RunStatus.IO_ERROR, None
        try:
            return RunStatus.SUCCESS, cls.from_dict(json.loads(content), defaults)
        except json.JSONDecodeError as err:
            _LOGGER.error("Configuration %s is not valid JSON: %s", path, err)
            return RunStatus.CONFIG_ERROR, None
        except ConfigError as err:
            _LOGGER.error("Invalid configuration %s: %s", path, err)
            return RunStatus.CONFIG_ERROR, None
