"""Run configuration and its packaged defaults."""

from .run_config import ConfigError, PathsConfig, RunConfig

__all__ = ["ConfigError", "PathsConfig", "RunConfig"]
