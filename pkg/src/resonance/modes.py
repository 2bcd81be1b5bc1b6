"""
Monopolar eigenmodes at a computed characteristic value.

The kernel of A_N(omega) gives the coefficients (a_1, b_1, ..., a_N, b_N) of the
radial expansion

    D_0:              u = a_1 h_0(k r)
    D_j, 1 <= j < N:  u = b_j j_0(kappa r) + a_{j+1} h_0(kappa r)
    D_N:              u = b_N j_0(kappa r)

with kappa = k_r in odd (resonator) regions and k in even ones. Profiles are
normalized to unit L2 mass over the resonator regions.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np
from numpy.polynomial import legendre

from src.resonance.dispersion import DispersionMatrix, assemble
from src.resonance.medium import LayeredGeometry, MediumSpec, layer_material, wavenumbers
from src.resonance.specfun import (
    sph_bessel_j,
    sph_bessel_j_prime,
    sph_hankel1,
    sph_hankel1_prime,
)

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-6
GAUSS_ORDER = 32
FLATNESS_POINTS = 201


class ModeError(RuntimeError):
    """Raised when a kernel vector fails its residual check or a profile has zero mass."""

    pass


@dataclass(frozen=True, eq=False)
class NullVector:
    """Kernel vector of a dispersion matrix with the full-pivot elimination diagnostics."""

    coeffs: np.ndarray
    pivots: np.ndarray  # |pivot| in elimination order
    residual: float


@dataclass(frozen=True, eq=False)
class ModeProfile:
    """Expansion coefficients of one eigenmode; the field is norm_constant times the raw sum."""

    omega: complex
    coeffs: np.ndarray
    geom: LayeredGeometry
    medium: MediumSpec
    norm_constant: float = 1.0
    residual: float = 0.0
    pivots: np.ndarray = field(default_factory=lambda: np.empty(0))

    def a(self, j: int) -> complex:
        """Outgoing coefficient a_j (1-based); a_{N+1} = 0."""
        if j == self.geom.n_layers + 1:
            return 0j
        return complex(self.coeffs[2 * (j - 1)])

    def b(self, j: int) -> complex:
        """Regular coefficient b_j (1-based); region D_0 has none."""
        if j == 0:
            return 0j
        return complex(self.coeffs[2 * (j - 1) + 1])


@dataclass(frozen=True, eq=False)
class RadialSamples:
    """Radial cut of the normalized field, with the interface radii as markers."""

    r: np.ndarray
    values: np.ndarray
    regions: np.ndarray
    markers: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class PlaneSamples:
    """Re u on the z = 0 plane, row-major over (y, x), with the layer circles."""

    coords: np.ndarray
    values: np.ndarray
    circles: tuple[float, ...]


@dataclass(frozen=True)
class InterfaceJump:
    radius: float
    value_jump: float
    flux_jump: float


@dataclass(frozen=True)
class RegionFlatness:
    region: int
    variation: float


def null_vector(
    matrix: Union[DispersionMatrix, np.ndarray], tolerance: float = RESIDUAL_TOL
) -> NullVector:
    """
    Kernel vector by Gaussian elimination with full pivoting.

    The unknown eliminated last (smallest pivot) is set to 1 and the others
    back-solved from the upper-triangular factor.

    Args:
        matrix: Dispersion matrix evaluated at a characteristic value.
        tolerance: Bound on ||A c|| / (||A|| ||c||).

    Returns:
        The kernel vector with elimination pivots and residual.

    Raises:
        ModeError: If the residual exceeds tolerance, or the kernel is not one-dimensional.
    """
    entries = matrix.entries if isinstance(matrix, DispersionMatrix) else np.asarray(matrix)
    entries = np.asarray(entries, dtype=np.complex128)
    size = entries.shape[0]
    work = entries.copy()
    columns = np.arange(size)

    for k in range(size - 1):
        block = np.abs(work[k:, k:])
        i, j = np.unravel_index(np.argmax(block), block.shape)
        i, j = i + k, j + k
        if block[i - k, j - k] == 0:
            raise ModeError(f"kernel has dimension > 1 (zero pivot at step {k + 1} of {size})")
        work[[k, i], :] = work[[i, k], :]
        work[:, [k, j]] = work[:, [j, k]]
        columns[[k, j]] = columns[[j, k]]
        factors = work[k + 1 :, k] / work[k, k]
        work[k + 1 :, k:] -= np.outer(factors, work[k, k:])
        work[k + 1 :, k] = 0

    pivots = np.abs(np.diag(work))
    permuted = np.zeros(size, dtype=np.complex128)
    permuted[-1] = 1.0
    for i in range(size - 2, -1, -1):
        permuted[i] = -(work[i, i + 1 :] @ permuted[i + 1 :]) / work[i, i]

    coeffs = np.empty(size, dtype=np.complex128)
    coeffs[columns] = permuted

    scale = np.linalg.norm(entries, 2) * np.linalg.norm(coeffs)
    residual = float(np.linalg.norm(entries @ coeffs) / scale) if scale > 0 else np.inf
    logger.debug("Null vector: residual=%.3e, smallest pivots=%s", residual, np.sort(pivots)[:2])
    if not residual <= tolerance:
        raise ModeError(
            f"kernel residual {residual:.3e} exceeds {tolerance:.1e}: "
            "frequency is not a characteristic value or the matrix is ill-conditioned"
        )
    return NullVector(coeffs=coeffs, pivots=pivots, residual=residual)


def build_profile(
    geom: LayeredGeometry,
    medium: MediumSpec,
    omega: complex,
    tolerance: float = RESIDUAL_TOL,
) -> ModeProfile:
    """Unnormalized profile from the kernel of A_N(omega) at order n = 0."""
    kernel = null_vector(assemble(geom, medium, omega, 0), tolerance)
    return ModeProfile(
        omega=complex(omega),
        coeffs=kernel.coeffs,
        geom=geom,
        medium=medium,
        residual=kernel.residual,
        pivots=kernel.pivots,
    )


def _region_wavenumber(profile: ModeProfile, j: int) -> complex:
    k, k_r = wavenumbers(profile.medium, profile.omega)
    return k_r if j % 2 == 1 else k


def _region_terms(profile: ModeProfile, j: int, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Regular and outgoing terms of region D_j at radii r (raw coefficients)."""
    z = _region_wavenumber(profile, j) * np.asarray(r, dtype=np.float64)
    regular = profile.b(j) * sph_bessel_j(0, z) if j > 0 else np.zeros_like(z)
    outgoing_coeff = profile.a(j + 1)
    outgoing = outgoing_coeff * sph_hankel1(0, z) if outgoing_coeff != 0 else np.zeros_like(z)
    return regular, outgoing


def _region_flux_terms(
    profile: ModeProfile, j: int, r: float
) -> tuple[complex, complex]:
    """Terms of (1/rho) du/dr in region D_j at radius r (raw coefficients)."""
    kappa = _region_wavenumber(profile, j)
    rho = layer_material(j, profile.medium, profile.geom.n_layers).density
    z = kappa * r
    regular = profile.b(j) * sph_bessel_j_prime(0, z) if j > 0 else 0j
    outgoing_coeff = profile.a(j + 1)
    outgoing = outgoing_coeff * sph_hankel1_prime(0, z) if outgoing_coeff != 0 else 0j
    return complex(kappa * regular / rho), complex(kappa * outgoing / rho)


def region_index(geom: LayeredGeometry, r: Union[float, np.ndarray]) -> np.ndarray:
    """Region D_j containing each radius; interfaces belong to the inner region."""
    ascending = np.asarray(geom.radii[::-1])
    return geom.n_layers - np.searchsorted(ascending, np.asarray(r, dtype=np.float64), side="left")


def evaluate_field(profile: ModeProfile, r: Union[float, np.ndarray]) -> Union[complex, np.ndarray]:
    """
    Normalized field u(r) at order n = 0.

    Args:
        profile: Eigenmode profile.
        r: Radius or array of radii, all >= 0.

    Returns:
        Complex field values with the shape of r.
    """
    radii = np.asarray(r, dtype=np.float64)
    if np.any(radii < 0):
        raise ValueError("radius must be non-negative")
    flat = np.atleast_1d(radii)
    regions = np.atleast_1d(region_index(profile.geom, flat))
    values = np.zeros(flat.shape, dtype=np.complex128)
    for j in np.unique(regions):
        mask = regions == j
        regular, outgoing = _region_terms(profile, int(j), flat[mask])
        values[mask] = regular + outgoing
    values *= profile.norm_constant
    if radii.ndim == 0:
        return complex(values[0])
    return values.reshape(radii.shape)


def _shell_bounds(geom: LayeredGeometry, j: int) -> tuple[float, float]:
    inner = geom.radii[j] if j < geom.n_layers else 0.0
    return inner, geom.radii[j - 1]


def resonator_mass(profile: ModeProfile, order: int = GAUSS_ORDER) -> float:
    """Sum over resonator regions of 4 pi * integral |u|^2 r^2 dr (Gauss-Legendre per shell)."""
    nodes, weights = legendre.leggauss(order)
    mass = 0.0
    for j in profile.geom.resonator_regions():
        lo, hi = _shell_bounds(profile.geom, j)
        half = 0.5 * (hi - lo)
        r = half * nodes + 0.5 * (hi + lo)
        u = evaluate_field(profile, r)
        mass += 4.0 * np.pi * half * float(np.sum(weights * np.abs(u) ** 2 * r**2))
    return mass


def _innermost_resonator(geom: LayeredGeometry) -> int:
    return geom.n_layers if geom.n_layers % 2 == 1 else geom.n_layers - 1


def normalize(profile: ModeProfile, order: int = GAUSS_ORDER) -> ModeProfile:
    """
    Scale to unit resonator mass and fix the phase.

    The phase is chosen so that b of the innermost resonator region is positive real.

    Raises:
        ModeError: If the profile has zero (or non-finite) resonator mass.
    """
    anchor = profile.b(_innermost_resonator(profile.geom))
    coeffs = profile.coeffs * (np.conj(anchor) / abs(anchor)) if anchor != 0 else profile.coeffs
    rotated = replace(profile, coeffs=coeffs, norm_constant=1.0)
    mass = resonator_mass(rotated, order)
    if not (np.isfinite(mass) and mass > 0):
        raise ModeError(f"profile at omega={profile.omega} has degenerate resonator mass {mass!r}")
    return replace(rotated, norm_constant=1.0 / np.sqrt(mass))


def mode_profile(geom: LayeredGeometry, medium: MediumSpec, omega: complex) -> ModeProfile:
    """Normalized eigenmode at a characteristic value."""
    return normalize(build_profile(geom, medium, omega))


def sample_radial(profile: ModeProfile, r_max: float, npts: int) -> RadialSamples:
    """Uniform samples of u on [0, r_max]."""
    if npts < 2:
        raise ValueError("npts must be at least 2")
    if not r_max > 0:
        raise ValueError("r_max must be positive")
    r = np.linspace(0.0, r_max, npts)
    return RadialSamples(
        r=r,
        values=evaluate_field(profile, r),
        regions=region_index(profile.geom, r),
        markers=profile.geom.radii,
    )


def sample_plane(profile: ModeProfile, half_extent: float, resolution: int) -> PlaneSamples:
    """
    Re u(sqrt(x^2 + y^2)) on a square grid centered at the origin.

    The grid is mirrored about both axes and always contains the center, so
    `resolution` is rounded up to the next odd count.
    """
    if not half_extent > 0:
        raise ValueError("half_extent must be positive")
    if resolution < 16:
        raise ValueError("resolution must be at least 16")
    half = np.linspace(0.0, half_extent, resolution // 2 + 1)
    coords = np.concatenate([-half[::-1], half[1:]])
    x, y = np.meshgrid(coords, coords)
    radius = np.hypot(x, y)
    unique, inverse = np.unique(radius, return_inverse=True)
    values = np.real(evaluate_field(profile, unique))[inverse].reshape(radius.shape)
    return PlaneSamples(coords=coords, values=values, circles=profile.geom.radii)


def flatness(profile: ModeProfile, points: int = FLATNESS_POINTS) -> list[RegionFlatness]:
    """(max|u| - min|u|) / mean|u| over each resonator region."""
    metrics = []
    for j in profile.geom.resonator_regions():
        lo, hi = _shell_bounds(profile.geom, j)
        r = np.linspace(lo, hi, points)
        # interfaces belong to the inner region; evaluate the shell's own expression
        regular, outgoing = _region_terms(profile, j, r)
        magnitude = np.abs(regular + outgoing) * profile.norm_constant
        metrics.append(
            RegionFlatness(
                region=j,
                variation=float((magnitude.max() - magnitude.min()) / magnitude.mean()),
            )
        )
    return metrics


def interface_jumps(profile: ModeProfile) -> list[InterfaceJump]:
    """
    Relative violation of both transmission conditions at every interface.

    Each jump is divided by the summed magnitude of the terms entering that condition.
    """
    jumps = []
    for i, r in enumerate(profile.geom.radii, start=1):
        out_terms = _region_terms(profile, i - 1, np.array([r]))
        in_terms = _region_terms(profile, i, np.array([r]))
        value_terms = [complex(t[0]) for t in (*out_terms, *in_terms)]
        value_jump = (value_terms[2] + value_terms[3]) - (value_terms[0] + value_terms[1])

        flux_out = _region_flux_terms(profile, i - 1, r)
        flux_in = _region_flux_terms(profile, i, r)
        flux_jump = sum(flux_in) - sum(flux_out)

        jumps.append(
            InterfaceJump(
                radius=r,
                value_jump=_relative(value_jump, value_terms),
                flux_jump=_relative(flux_jump, [*flux_out, *flux_in]),
            )
        )
    return jumps


def _relative(jump: complex, terms: Sequence[complex]) -> float:
    scale = sum(abs(t) for t in terms)
    return abs(jump) / scale if scale > 0 else 0.0
