"""
Dispersion matrix A_N(omega, delta) of a nested concentric structure.

The field in region D_j is expanded as b_j j_n(kappa r) + a_{j+1} h_n^(1)(kappa r)
(with a_{N+1} = 0 and no b_0), where kappa is the resonator wavenumber k_r in odd
regions and the matrix wavenumber k in even ones. Imposing continuity of the
field and of (1/rho) times its normal derivative on each interface |x| = r_i gives
two equations per interface, i.e. a 2N x 2N block-tridiagonal system in the
unknowns (a_1, b_1, a_2, b_2, ..., a_N, b_N). The flux equations are scaled by
rho_r / k, which is what makes the factors delta and tau appear.

The common spherical-harmonic factor Y_n is divided out of every equation.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from src.resonance.medium import LayeredGeometry, MediumSpec, wavenumbers
from src.resonance.specfun import (
    sph_bessel_j,
    sph_bessel_j_prime,
    sph_hankel1,
    sph_hankel1_prime,
)

logger = logging.getLogger(__name__)


class PoleError(ValueError):
    """Raised when the dispersion matrix is requested at omega = 0."""

    pass


@dataclass(frozen=True)
class DispersionMatrix:
    """Dense 2N x 2N matrix, rows by interface, columns a_1, b_1, ..., a_N, b_N."""

    order_n: int
    omega: complex
    entries: np.ndarray

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class ScaledDeterminant:
    """
    Determinant stored as mantissa * 2**exponent, with 1 <= |mantissa| < 2.

    Zero is represented by mantissa = 0 (exponent 0).
    """

    mantissa: complex
    exponent: int

    @classmethod
    def from_parts(cls, mantissa: complex, exponent: int = 0) -> "ScaledDeterminant":
        """Normalize an arbitrary (mantissa, exponent) pair."""
        mantissa = complex(mantissa)
        if mantissa == 0:
            return cls(0j, 0)
        _, shift = math.frexp(abs(mantissa))
        shift -= 1
        return cls(_ldexp_complex(mantissa, -shift), int(exponent) + shift)

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0

    @property
    def value(self) -> complex:
        """Plain complex value (may overflow to inf or underflow to 0)."""
        return _ldexp_complex(self.mantissa, self.exponent)

    def log2_abs(self) -> float:
        if self.is_zero:
            return -math.inf
        return math.log2(abs(self.mantissa)) + self.exponent

    def relative_to(self, exponent: int) -> complex:
        """Value divided by 2**exponent."""
        return _ldexp_complex(self.mantissa, self.exponent - exponent)

    def scaled(self, factor: complex) -> "ScaledDeterminant":
        """Product with a finite complex factor."""
        return ScaledDeterminant.from_parts(self.mantissa * complex(factor), self.exponent)

    def conjugate(self) -> "ScaledDeterminant":
        return ScaledDeterminant(self.mantissa.conjugate(), self.exponent)


def _ldexp_complex(z: complex, exponent: int) -> complex:
    return complex(math.ldexp(z.real, exponent), math.ldexp(z.imag, exponent))


def block_sparsity_mask(n_layers: int) -> np.ndarray:
    """
    Boolean mask of the positions the block formulas may fill.

    Row block i couples to a_i, b_i (diagonal block), a_{i+1} (first column of R)
    and b_{i-1} (second column of L).
    """
    size = 2 * n_layers
    mask = np.zeros((size, size), dtype=bool)
    for i in range(n_layers):
        rows = slice(2 * i, 2 * i + 2)
        mask[rows, 2 * i : 2 * i + 2] = True
        if i + 1 < n_layers:
            mask[rows, 2 * (i + 1)] = True
        if i > 0:
            mask[rows, 2 * (i - 1) + 1] = True
    return mask


def assemble(
    geom: LayeredGeometry,
    medium: MediumSpec,
    omega: complex,
    n: int = 0,
) -> DispersionMatrix:
    """
    Assemble A_N(omega, delta) for angular order n.

    Args:
        geom: Layer radii.
        medium: Material description.
        omega: Complex frequency, non-zero.
        n: Angular order.

    Returns:
        The dispersion matrix.

    Raises:
        PoleError: If omega is zero.
    """
    omega = complex(omega)
    if omega == 0:
        raise PoleError("dispersion matrix has a pole at omega = 0")

    k, k_r = wavenumbers(medium, omega)
    delta, tau = medium.delta, medium.tau
    n_layers = geom.n_layers
    entries = np.zeros((2 * n_layers, 2 * n_layers), dtype=np.complex128)

    for i, r in enumerate(geom.radii, start=1):
        row = 2 * (i - 1)
        col = 2 * (i - 1)
        if i % 2 == 1:
            # matrix outside (a_i), resonator inside (b_i, a_{i+1})
            outer, inner = k * r, k_r * r
            outer_factor, inner_factor = delta, tau
        else:
            outer, inner = k_r * r, k * r
            outer_factor, inner_factor = tau, delta

        entries[row, col] = -sph_hankel1(n, outer)
        entries[row, col + 1] = sph_bessel_j(n, inner)
        entries[row + 1, col] = -outer_factor * sph_hankel1_prime(n, outer)
        entries[row + 1, col + 1] = inner_factor * sph_bessel_j_prime(n, inner)

        if i < n_layers:
            entries[row, col + 2] = sph_hankel1(n, inner)
            entries[row + 1, col + 2] = inner_factor * sph_hankel1_prime(n, inner)
        if i > 1:
            entries[row, col - 1] = -sph_bessel_j(n, outer)
            entries[row + 1, col - 1] = -outer_factor * sph_bessel_j_prime(n, outer)

    return DispersionMatrix(order_n=n, omega=omega, entries=entries)


def scaled_det(matrix: DispersionMatrix | np.ndarray) -> ScaledDeterminant:
    """
    Determinant by LU with partial pivoting, accumulated in mantissa/exponent form.

    Args:
        matrix: A DispersionMatrix or any square complex array.

    Returns:
        The determinant; a singular matrix gives a zero mantissa.
    """
    entries = matrix.entries if isinstance(matrix, DispersionMatrix) else np.asarray(matrix)
    entries = np.asarray(entries, dtype=np.complex128)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise ValueError(f"determinant needs a square matrix, got shape {entries.shape}")

    lu, piv = linalg.lu_factor(entries, check_finite=True)
    pivots = np.diag(lu)
    if np.any(pivots == 0):
        return ScaledDeterminant(0j, 0)

    swaps = int(np.count_nonzero(piv != np.arange(piv.size)))
    _, exponents = np.frexp(np.abs(pivots))
    mantissa, exponent = (-1.0 + 0j if swaps % 2 else 1.0 + 0j), 0
    for pivot, shift in zip(pivots, exponents):
        mantissa *= _ldexp_complex(complex(pivot), -int(shift))
        exponent += int(shift)
        # keep the running product near unit modulus
        _, renorm = math.frexp(abs(mantissa))
        mantissa = _ldexp_complex(mantissa, -renorm)
        exponent += renorm
    return ScaledDeterminant.from_parts(mantissa, exponent)


@dataclass(frozen=True)
class DispersionFunction:
    """f(omega) = det A_N(omega, delta) for a fixed structure and angular order."""

    geom: LayeredGeometry
    medium: MediumSpec
    order_n: int = 0

    def __call__(self, omega: complex) -> ScaledDeterminant:
        return scaled_det(assemble(self.geom, self.medium, omega, self.order_n))

    def matrix(self, omega: complex) -> DispersionMatrix:
        return assemble(self.geom, self.medium, omega, self.order_n)


def dispersion_fn(geom: LayeredGeometry, medium: MediumSpec, n: int = 0) -> DispersionFunction:
    """Build the dispersion function of a structure at angular order n."""
    logger.debug(
        "Dispersion function: N=%d, n=%d, delta=%.6g", geom.n_layers, n, medium.delta
    )
    return DispersionFunction(geom=geom, medium=medium, order_n=n)
