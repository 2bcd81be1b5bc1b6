"""
Material and geometry configuration for nested concentric resonators.

A structure is a ball of radius r_1 split into N layers by the interfaces
|x| = r_1 > r_2 > ... > r_N > 0. Region D_0 is the exterior, D_j (1 <= j < N) the
shell between r_{j+1} and r_j, and D_N the innermost ball. Odd regions carry the
high-contrast resonator material, even regions (the exterior included) the
surrounding matrix material.

All quantities are dimensionless; radii are stored outermost-first.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

from src.utils.config import ConfigurationError

logger = logging.getLogger(__name__)


class MediumError(ConfigurationError):
    """Raised when material parameters or layer radii are invalid."""

    pass


@dataclass(frozen=True)
class MediumSpec:
    """Two-phase material description with derived contrast and wave-speed parameters."""

    rho_r: float  # resonator density
    kappa_r: float  # resonator bulk modulus
    rho: float  # matrix density
    kappa: float  # matrix bulk modulus
    delta: float = field(init=False)
    tau: float = field(init=False)
    v: float = field(init=False)
    v_r: float = field(init=False)

    def __post_init__(self) -> None:
        """Validate inputs and compute the derived parameters."""
        for name in ("rho_r", "kappa_r", "rho", "kappa"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise MediumError(f"{name} must be a positive finite number, got {value!r}")
        object.__setattr__(self, "delta", self.rho_r / self.rho)
        object.__setattr__(
            self, "tau", math.sqrt(self.rho_r * self.kappa / (self.rho * self.kappa_r))
        )
        object.__setattr__(self, "v", math.sqrt(self.kappa / self.rho))
        object.__setattr__(self, "v_r", math.sqrt(self.kappa_r / self.rho_r))
        logger.debug(
            "Medium: delta=%.6g, tau=%.6g, v=%.6g, v_r=%.6g",
            self.delta,
            self.tau,
            self.v,
            self.v_r,
        )


@dataclass(frozen=True)
class LayeredGeometry:
    """Strictly decreasing positive radii r_1 > r_2 > ... > r_N > 0."""

    radii: tuple[float, ...]

    def __post_init__(self) -> None:
        """Validate monotonicity and positivity."""
        radii = tuple(float(r) for r in self.radii)
        if not radii:
            raise MediumError("geometry needs at least one layer")
        if any(not math.isfinite(r) or r <= 0 for r in radii):
            raise MediumError(f"radii must be positive and finite, got {list(radii)}")
        for outer, inner in zip(radii, radii[1:]):
            if inner >= outer:
                raise MediumError(
                    f"radii must be strictly decreasing (outermost first), got {list(radii)}"
                )
        object.__setattr__(self, "radii", radii)

    @property
    def n_layers(self) -> int:
        return len(self.radii)

    @property
    def n_resonators(self) -> int:
        """Number of high-contrast layers, floor((N + 1) / 2)."""
        return (self.n_layers + 1) // 2

    def region_of(self, r: float) -> int:
        """Index j of the region D_j containing radius r."""
        if r > self.radii[0]:
            return 0
        for j in range(1, self.n_layers):
            if r > self.radii[j]:
                return j
        return self.n_layers

    def resonator_regions(self) -> list[int]:
        """Indices of the odd (resonator) regions, outermost first."""
        return list(range(1, self.n_layers + 1, 2))


@dataclass(frozen=True)
class LayerMaterial:
    """Material parameters of one region and whether it uses the resonator wavenumber."""

    density: float
    bulk_modulus: float
    is_resonator: bool


def make_medium(rho_r: float, kappa_r: float, rho: float, kappa: float) -> MediumSpec:
    """Build a validated medium from the four material parameters."""
    return MediumSpec(rho_r=rho_r, kappa_r=kappa_r, rho=rho, kappa=kappa)


def medium_from_delta(delta: float) -> MediumSpec:
    """Unit resonator parameters with rho = kappa = 1/delta (so tau = v = v_r = 1)."""
    if not math.isfinite(delta) or delta <= 0:
        raise MediumError(f"delta must be positive, got {delta!r}")
    return make_medium(1.0, 1.0, 1.0 / delta, 1.0 / delta)


def wavenumbers(medium: MediumSpec, omega: complex) -> tuple[complex, complex]:
    """
    Matrix and resonator wavenumbers at a (complex) frequency.

    Returns:
        Tuple (k, k_r) = (omega / v, omega / v_r).
    """
    omega = complex(omega)
    return omega / medium.v, omega / medium.v_r


def geometry_from_radii(radii: Sequence[float]) -> LayeredGeometry:
    return LayeredGeometry(radii=tuple(radii))


def geometry_equidistant(n_layers: int) -> LayeredGeometry:
    """Radii (N, N-1, ..., 1)."""
    if int(n_layers) != n_layers or n_layers < 1:
        raise MediumError(f"number of layers must be a positive integer, got {n_layers!r}")
    return LayeredGeometry(radii=tuple(float(n_layers - i) for i in range(int(n_layers))))


def geometry_geometric(n_layers: int, r1: float, scale: float) -> LayeredGeometry:
    """Radii decreasing by a common factor: r_{i+1} = scale * r_i."""
    if int(n_layers) != n_layers or n_layers < 1:
        raise MediumError(f"number of layers must be a positive integer, got {n_layers!r}")
    if not r1 > 0:
        raise MediumError(f"r1 must be positive, got {r1!r}")
    if not 0 < scale < 1:
        raise MediumError(f"scale must lie in (0, 1), got {scale!r}")
    radii = [float(r1)]
    for _ in range(int(n_layers) - 1):
        radii.append(radii[-1] * scale)
    return LayeredGeometry(radii=tuple(radii))


def layer_material(j: int, medium: MediumSpec, n_layers: int) -> LayerMaterial:
    """
    Material of region D_j: resonator parameters for odd j, matrix otherwise.

    Args:
        j: Region index, 0 (exterior) through N (innermost ball).
        medium: Material description.
        n_layers: Number of layers N.

    Raises:
        MediumError: If j is outside 0..N.
    """
    if int(j) != j or not 0 <= j <= n_layers:
        raise MediumError(f"layer index must lie in 0..{n_layers}, got {j!r}")
    if j % 2 == 1:
        return LayerMaterial(medium.rho_r, medium.kappa_r, is_resonator=True)
    return LayerMaterial(medium.rho, medium.kappa, is_resonator=False)
