"""Command-line pipeline orchestration."""

from .config import ConfigError, PipelineConfig, apply_overrides, parse_config, read_config
from .main import main

__all__ = [
    "ConfigError",
    "PipelineConfig",
    "apply_overrides",
    "main",
    "parse_config",
    "read_config",
]
