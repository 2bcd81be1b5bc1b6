"""
Run-configuration loading for the nested-resonator toolkit.

This package provides:
- Pydantic schema for JSON run configurations
- A loader that merges file, command-line and environment settings
"""

from src.config.run_loader import RunConfig, RunConfigLoader, load_run_config
from src.config.validation import ConfigFileError, RunConfigModel

__all__ = [
    "ConfigFileError",
    "RunConfig",
    "RunConfigLoader",
    "RunConfigModel",
    "load_run_config",
]
