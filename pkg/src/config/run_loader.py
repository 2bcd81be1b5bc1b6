"""
Run configuration loader.

Loads a JSON run configuration, applies command-line overrides and environment
defaults, and resolves it into the domain objects used by the commands.
Precedence: command-line flags > configuration file > environment.
"""

import copy
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from pydantic import ValidationError

from src.config.validation import ConfigFileError, RunConfigModel
from src.resonance.medium import (
    LayeredGeometry,
    MediumSpec,
    geometry_equidistant,
    geometry_from_radii,
    geometry_geometric,
    make_medium,
    medium_from_delta,
)
from src.resonance.rootfind import SearchConfig
from src.utils.config import ConfigurationError, EnvironmentSettings

logger = logging.getLogger(__name__)

COMMAND_LINE = Path("<command line>")

# Four-layer structure at delta = 1/6000, used when no file is given.
DEFAULT_RUN = {"equidistant": 4, "delta": 1.0 / 6000.0}

SEARCH_FIELDS = ("omega_max", "grid_points", "tol_abs", "tol_rel", "max_iter", "imag_seed_offset")


@dataclass(frozen=True)
class RunConfig:
    """Resolved run configuration."""

    geometry: LayeredGeometry
    medium: MediumSpec
    mode_order: int
    search: SearchConfig
    output_dir: Path
    formats: tuple[str, ...]
    radial_points: int = 801
    plane_resolution: int = 201
    extent_factor: float = 1.25
    capacity: Optional[tuple[float, float]] = None
    source: Optional[Path] = None

    def wants(self, fmt: str) -> bool:
        return fmt in self.formats

    def echo(self) -> dict[str, Any]:
        """JSON-serializable summary for output metadata."""
        search = {name: getattr(self.search, name) for name in SEARCH_FIELDS}
        return {
            "source": str(self.source) if self.source else None,
            "radii": list(self.geometry.radii),
            "materials": {
                "rho_r": self.medium.rho_r,
                "kappa_r": self.medium.kappa_r,
                "rho": self.medium.rho,
                "kappa": self.medium.kappa,
            },
            "delta": self.medium.delta,
            "tau": self.medium.tau,
            "mode_order": self.mode_order,
            "search": search,
        }


class RunConfigLoader:
    """Loads and validates a run configuration file."""

    def __init__(self, config_path: Path):
        """
        Initialize run-config loader.

        Args:
            config_path: Path to a JSON run configuration
        """
        self.config_path = config_path
        self.data: Optional[dict[str, Any]] = None

        logger.debug("RunConfigLoader initialized with: %s", config_path)

    def load(self) -> dict[str, Any]:
        """
        Read the raw JSON document.

        Returns:
            Parsed document

        Raises:
            ConfigFileError: If file not found, unreadable or not JSON
        """
        if self.data is not None:
            return self.data

        if not self.config_path.exists():
            raise ConfigFileError(
                file_path=self.config_path,
                message="Run configuration file not found",
                suggestion="Check the --config path, or start from one of config/runs/*.json",
            )

        try:
            content = self.config_path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigFileError(
                file_path=self.config_path,
                message=f"Cannot read file: {e}",
                suggestion="Ensure file exists and is readable",
            ) from e

        try:
            data = json.loads(content)
        except json.JSONDecodeError as e:
            raise ConfigFileError(
                file_path=self.config_path,
                message=f"Invalid JSON syntax: {e.msg}",
                suggestion="Check for trailing commas, unquoted keys or missing braces",
                line_number=e.lineno,
            ) from e

        if not isinstance(data, dict):
            raise ConfigFileError(
                file_path=self.config_path,
                message="Run configuration must be a JSON object",
                suggestion='Wrap the settings in braces, e.g. {"equidistant": 4, "delta": 0.01}',
            )

        self.data = data
        logger.info("Loaded run config: %s", self.config_path)
        return self.data


def _layer_count(data: dict[str, Any]) -> Optional[int]:
    if data.get("radii") is not None:
        return len(data["radii"])
    if data.get("equidistant") is not None:
        return int(data["equidistant"])
    if data.get("geometric") is not None:
        return int(data["geometric"]["layers"])
    return None


def _apply_overrides(data: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    """Merge command-line flags into a raw configuration document."""
    data = copy.deepcopy(data)
    layers, scale, r1 = overrides.get("layers"), overrides.get("scale"), overrides.get("r1")

    if layers is not None or scale is not None or r1 is not None:
        count = layers if layers is not None else _layer_count(data)
        if scale is not None or r1 is not None or data.get("geometric") is not None:
            geometric = dict(data.get("geometric") or {})
            geometric["layers"] = count
            if scale is not None:
                geometric["scale"] = scale
            if r1 is not None:
                geometric["r1"] = r1
            geometric.setdefault("r1", float(count) if count is not None else None)
            data.update(radii=None, equidistant=None, geometric=geometric)
        else:
            data.update(radii=None, equidistant=count, geometric=None)

    if overrides.get("delta") is not None:
        data.update(materials=None, delta=overrides["delta"])

    search = dict(data.get("search") or {})
    for name in SEARCH_FIELDS:
        if overrides.get(name) is not None:
            search[name] = overrides[name]
    data["search"] = search

    output = dict(data.get("output") or {})
    if overrides.get("out") is not None:
        output["directory"] = str(overrides["out"])
    if overrides.get("format") is not None:
        output["formats"] = overrides["format"]
    data["output"] = output
    return data


def _geometry(model: RunConfigModel) -> LayeredGeometry:
    if model.radii is not None:
        return geometry_from_radii(model.radii)
    if model.equidistant is not None:
        return geometry_equidistant(model.equidistant)
    g = model.geometric
    return geometry_geometric(g.layers, g.r1, g.scale)


def _medium(model: RunConfigModel) -> MediumSpec:
    if model.delta is not None:
        return medium_from_delta(model.delta)
    m = model.materials
    return make_medium(m.rho_r, m.kappa_r, m.rho, m.kappa)


def _search(model: RunConfigModel, env: Optional[EnvironmentSettings]) -> SearchConfig:
    values: dict[str, Any] = {}
    if env is not None:
        for name in ("omega_max", "grid_points", "tol_abs"):
            if getattr(env, name) is not None:
                values[name] = getattr(env, name)
    for name in SEARCH_FIELDS:
        if getattr(model.search, name) is not None:
            values[name] = getattr(model.search, name)
    return SearchConfig(**values)


def load_run_config(
    path: Optional[Path] = None,
    overrides: Optional[dict[str, Any]] = None,
    env: Optional[EnvironmentSettings] = None,
) -> RunConfig:
    """
    Resolve a run configuration from file, flags and environment.

    Args:
        path: JSON run configuration; None starts from the four-layer default
        overrides: Command-line values (None entries are ignored)
        env: Environment defaults for the root search

    Returns:
        Resolved RunConfig

    Raises:
        ConfigFileError: If the file or the merged configuration is invalid
    """
    source = path if path is not None else COMMAND_LINE
    raw = RunConfigLoader(path).load() if path is not None else dict(DEFAULT_RUN)
    data = _apply_overrides(raw, overrides or {})

    try:
        model = RunConfigModel(**data)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
            for err in e.errors()
        )
        raise ConfigFileError(
            file_path=source,
            message=f"Invalid run configuration: {problems}",
            suggestion="Give exactly one of radii/equidistant/geometric and one of "
            "materials/delta; radii must be positive and strictly decreasing",
        ) from e

    try:
        geometry, medium = _geometry(model), _medium(model)
        search = _search(model, env)
    except ConfigurationError as e:
        raise ConfigFileError(
            file_path=source,
            message=str(e),
            suggestion="Check the geometry and material values",
        ) from e

    formats = ("csv", "json", "svg") if model.output.formats == "all" else (model.output.formats,)
    config = RunConfig(
        geometry=geometry,
        medium=medium,
        mode_order=model.mode_order,
        search=search,
        output_dir=Path(model.output.directory),
        formats=formats,
        radial_points=model.output.radial_points,
        plane_resolution=model.output.plane_resolution,
        extent_factor=model.output.extent_factor,
        capacity=(model.capacity.cap, model.capacity.vol) if model.capacity else None,
        source=path,
    )
    logger.info(
        "Run config: N=%d, delta=%.6g, n=%d, output=%s",
        geometry.n_layers,
        medium.delta,
        model.mode_order,
        config.output_dir,
    )
    return config
