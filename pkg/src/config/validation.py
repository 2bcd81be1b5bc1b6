"""
Run-configuration validation using Pydantic models.

A run configuration is a single JSON document describing one structure and
what to compute for it:

    {
      "equidistant": 8,                 # or "radii": [...] or "geometric": {...}
      "delta": 1.6666666666666666e-4,   # or "materials": {...}
      "mode_order": 0,
      "search": {"grid_points": 4096},
      "output": {"directory": "results/equidistant_8", "formats": "all"}
    }
"""

import logging
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.utils.config import ConfigurationError

logger = logging.getLogger(__name__)


class ConfigFileError(ConfigurationError):
    """Raised when a run-configuration file is missing, unreadable or invalid."""

    def __init__(
        self,
        file_path: Path,
        message: str,
        suggestion: str,
        line_number: Optional[int] = None,
    ):
        """
        Initialize configuration error with helpful context.

        Args:
            file_path: Path to the configuration file with error
            message: Description of what's wrong
            suggestion: How to fix the error
            line_number: Optional line number where error occurred
        """
        self.file_path = file_path
        self.message = message
        self.suggestion = suggestion
        self.line_number = line_number
        super().__init__(self._format_message())

    def _format_message(self) -> str:
        """Format error message for display."""
        location = str(self.file_path)
        if self.line_number:
            location += f", line {self.line_number}"

        return f"""
Configuration Error in {location}

Problem: {self.message}

How to fix: {self.suggestion}
"""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GeometricModel(_Strict):
    """Radii r_1, s r_1, s^2 r_1, ... for a given layer count."""

    layers: int = Field(..., ge=1, description="Number of layers N")
    r1: float = Field(..., gt=0, description="Outermost radius")
    scale: float = Field(..., gt=0, lt=1, description="Common ratio s of successive radii")


class MaterialsModel(_Strict):
    """Full material quadruple."""

    rho_r: float = Field(..., gt=0, description="Resonator density")
    kappa_r: float = Field(..., gt=0, description="Resonator bulk modulus")
    rho: float = Field(..., gt=0, description="Matrix density")
    kappa: float = Field(..., gt=0, description="Matrix bulk modulus")


class CapacityModel(_Strict):
    """Capacity and volume of a single resonator of arbitrary shape."""

    cap: float = Field(..., gt=0, description="Capacity of the resonator boundary")
    vol: float = Field(..., gt=0, description="Resonator volume")


class SearchModel(_Strict):
    """Root-search overrides; unset values fall back to environment or built-in defaults."""

    omega_max: Optional[float] = Field(default=None, gt=0)
    grid_points: Optional[int] = Field(default=None, ge=64)
    tol_abs: Optional[float] = Field(default=None, gt=0)
    tol_rel: Optional[float] = Field(default=None, gt=0)
    max_iter: Optional[int] = Field(default=None, ge=1)
    imag_seed_offset: Optional[float] = Field(default=None, gt=0)


class OutputModel(_Strict):
    """Where and in which formats results are written."""

    directory: str = Field(default="results", description="Output directory")
    formats: Literal["csv", "json", "svg", "all"] = Field(default="all")
    radial_points: int = Field(default=801, ge=2, description="Samples in radial cuts")
    plane_resolution: int = Field(default=201, ge=16, description="Grid size of plane cuts")
    extent_factor: float = Field(
        default=1.25, gt=0, description="Sampling extent as a multiple of r_1"
    )


class RunConfigModel(_Strict):
    """Complete run configuration."""

    radii: Optional[List[float]] = Field(
        default=None, description="Explicit radii, outermost first"
    )
    equidistant: Optional[int] = Field(default=None, ge=1, description="Radii (N, N-1, ..., 1)")
    geometric: Optional[GeometricModel] = None
    materials: Optional[MaterialsModel] = None
    delta: Optional[float] = Field(default=None, gt=0, description="Contrast with unit resonator")
    capacity: Optional[CapacityModel] = None
    mode_order: int = Field(default=0, ge=0, description="Angular order n")
    search: SearchModel = Field(default_factory=SearchModel)
    output: OutputModel = Field(default_factory=OutputModel)

    @field_validator("radii")
    @classmethod
    def validate_radii(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        """Validate that explicit radii are positive and strictly decreasing."""
        if v is None:
            return v
        if not v:
            raise ValueError("radii must list at least one radius")
        if any(r <= 0 for r in v):
            raise ValueError(f"radii must be positive, got {v}")
        if any(inner >= outer for outer, inner in zip(v, v[1:])):
            raise ValueError(f"radii must be strictly decreasing (outermost first), got {v}")
        return v

    @model_validator(mode="after")
    def validate_exclusive_forms(self) -> "RunConfigModel":
        """Exactly one geometry form and exactly one material form."""
        geometry_forms = [
            name
            for name in ("radii", "equidistant", "geometric")
            if getattr(self, name) is not None
        ]
        if len(geometry_forms) != 1:
            raise ValueError(
                "exactly one of 'radii', 'equidistant', 'geometric' is required, "
                f"got {geometry_forms or 'none'}"
            )
        material_forms = [
            name for name in ("materials", "delta") if getattr(self, name) is not None
        ]
        if len(material_forms) != 1:
            raise ValueError(
                f"exactly one of 'materials', 'delta' is required, got {material_forms or 'none'}"
            )
        return self
