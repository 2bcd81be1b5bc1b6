"""
Environment configuration for the nested-resonator toolkit.

Handles loading environment variables (optionally from a .env file), the
diagnostic log level, and environment-level defaults for the root search.
Run-specific settings (geometry, materials, outputs) live in JSON run configs,
see src.config.
"""

import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

# Configure module logger
logger = logging.getLogger(__name__)

LOG_LEVELS = {
    "error": logging.ERROR,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class ConfigurationError(Exception):
    """Raised when configuration is invalid or missing required values."""

    pass


@dataclass
class EnvironmentSettings:
    """Settings read from the process environment."""

    log_level: str = "error"
    omega_max: Optional[float] = None  # RESONATOR_OMEGA_MAX
    grid_points: Optional[int] = None  # RESONATOR_GRID
    tol_abs: Optional[float] = None  # RESONATOR_TOL

    def __post_init__(self) -> None:
        """Validate environment settings."""
        if self.log_level not in LOG_LEVELS:
            raise ConfigurationError(
                f"RESONATOR_LOG must be one of {sorted(LOG_LEVELS)}, got {self.log_level!r}"
            )
        if self.omega_max is not None and self.omega_max <= 0:
            raise ConfigurationError("RESONATOR_OMEGA_MAX must be positive")
        if self.grid_points is not None and self.grid_points < 64:
            raise ConfigurationError("RESONATOR_GRID must be at least 64")
        if self.tol_abs is not None and self.tol_abs <= 0:
            raise ConfigurationError("RESONATOR_TOL must be positive")


def _read_number(name: str, kind: type) -> Optional[float]:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return None
    try:
        return kind(raw)
    except ValueError as e:
        raise ConfigurationError(f"{name} is not a valid {kind.__name__}: {raw!r}") from e


def load_environment(env_file: Optional[Path] = None) -> EnvironmentSettings:
    """
    Load environment settings, reading a .env file first if present.

    Args:
        env_file: Path to a .env file. If None, uses ./.env when it exists.

    Returns:
        Validated EnvironmentSettings.

    Raises:
        ConfigurationError: If a variable holds an invalid value.
    """
    if env_file is None:
        env_file = Path.cwd() / ".env"

    if env_file.exists():
        load_dotenv(env_file)
        logger.debug("Loaded environment from: %s", env_file)

    settings = EnvironmentSettings(
        log_level=os.getenv("RESONATOR_LOG", "error").strip().lower(),
        omega_max=_read_number("RESONATOR_OMEGA_MAX", float),
        grid_points=_read_number("RESONATOR_GRID", int),
        tol_abs=_read_number("RESONATOR_TOL", float),
    )
    logger.debug("Environment settings: %s", settings)
    return settings


def setup_logging(level: str = "error", debug: bool = False) -> None:
    """
    Configure diagnostics on standard error.

    Args:
        level: One of "error", "info", "debug".
        debug: Force DEBUG regardless of level.
    """
    log_level = logging.DEBUG if debug else LOG_LEVELS.get(level, logging.ERROR)
    root = logging.getLogger()
    root.setLevel(log_level)
    if not any(getattr(h, "_resonator_handler", False) for h in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._resonator_handler = True
        root.addHandler(handler)

    # Reduce noise from libraries
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
