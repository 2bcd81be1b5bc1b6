"""
Spherical Bessel and Hankel functions of the first kind for complex arguments.

These are the only transcendental ingredients of the dispersion matrix. All
functions accept a scalar or an array of complex arguments and return values of
the same shape (a numpy complex scalar for scalar input).

Orders 0 and 1 use closed forms, switching to truncated power series below
SERIES_SWITCH_RADIUS where the closed forms lose digits to cancellation. Higher
orders use scipy for j_n and the upward recurrence for h_n^(1), which is stable
in that direction.
"""

import logging
from typing import Union

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import special

logger = logging.getLogger(__name__)

ComplexLike = Union[complex, float, np.ndarray]

# |z| below which the order-0 and order-1 series replace the closed forms.
SERIES_SWITCH_RADIUS = 1e-2

# Coefficients in powers of z**2, truncated at the z**8 term for j0 and z**9 for j1.
_J0_SERIES = np.array([1.0, -1.0 / 6.0, 1.0 / 120.0, -1.0 / 5040.0, 1.0 / 362880.0])
_J1_SERIES = np.array([1.0 / 3.0, -1.0 / 30.0, 1.0 / 840.0, -1.0 / 45360.0, 1.0 / 3991680.0])


class SpecialFunctionDomainError(ValueError):
    """Raised when a function is evaluated at a pole (z = 0)."""

    pass


def _as_complex(z: ComplexLike) -> np.ndarray:
    return np.asarray(z, dtype=np.complex128)


def _unwrap(values: np.ndarray) -> Union[np.complex128, np.ndarray]:
    return values[()] if values.ndim == 0 else values


def _check_order(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise ValueError(f"order must be a non-negative integer, got {n!r}")
    return int(n)


def _check_nonzero(z: np.ndarray, name: str) -> None:
    if np.any(z == 0):
        raise SpecialFunctionDomainError(f"{name} has a pole at z = 0")


def _j0(z: np.ndarray) -> np.ndarray:
    small = np.abs(z) < SERIES_SWITCH_RADIUS
    safe = np.where(small, 1.0, z)
    return np.where(small, P.polyval(z * z, _J0_SERIES), np.sin(safe) / safe)


def _j1(z: np.ndarray) -> np.ndarray:
    small = np.abs(z) < SERIES_SWITCH_RADIUS
    safe = np.where(small, 1.0, z)
    closed = (np.sin(safe) / safe - np.cos(safe)) / safe
    return np.where(small, z * P.polyval(z * z, _J1_SERIES), closed)


def _jn(n: int, z: np.ndarray) -> np.ndarray:
    if n == 0:
        return _j0(z)
    if n == 1:
        return _j1(z)
    origin = z == 0
    values = special.spherical_jn(n, np.where(origin, 1.0, z))
    return np.where(origin, 0.0, values)


def _hankel_ladder(n: int, z: np.ndarray) -> list[np.ndarray]:
    """Return [h_0, ..., h_n] by upward recurrence from the exact order-0/1 forms."""
    phase = np.exp(1j * z)
    ladder = [-1j * phase / z]
    if n >= 1:
        ladder.append(-(z + 1j) / (z * z) * phase)
    for m in range(1, n):
        ladder.append((2 * m + 1) / z * ladder[m] - ladder[m - 1])
    return ladder


def sph_bessel_j(n: int, z: ComplexLike) -> Union[np.complex128, np.ndarray]:
    """
    Spherical Bessel function of the first kind j_n(z).

    Regular at the origin: j_0(0) = 1 and j_n(0) = 0 for n >= 1.

    Args:
        n: Non-negative integer order.
        z: Complex argument(s).

    Returns:
        j_n(z) with the shape of z.
    """
    n = _check_order(n)
    return _unwrap(_jn(n, _as_complex(z)))


def sph_hankel1(n: int, z: ComplexLike) -> Union[np.complex128, np.ndarray]:
    """
    Spherical Hankel function of the first kind h_n^(1)(z).

    For n = 0 this is exactly -i exp(iz) / z.

    Args:
        n: Non-negative integer order.
        z: Complex argument(s), all non-zero.

    Returns:
        h_n^(1)(z) with the shape of z.

    Raises:
        SpecialFunctionDomainError: If any argument is zero.
    """
    n = _check_order(n)
    z = _as_complex(z)
    _check_nonzero(z, "h_n^(1)")
    return _unwrap(_hankel_ladder(n, z)[n])


def sph_bessel_j_prime(n: int, z: ComplexLike) -> Union[np.complex128, np.ndarray]:
    """
    Derivative j_n'(z), from j_0' = -j_1 and j_n' = j_{n-1} - (n+1)/z j_n.

    Raises:
        SpecialFunctionDomainError: For n >= 1 at z = 0, where the identity divides by z.
    """
    n = _check_order(n)
    z = _as_complex(z)
    if n == 0:
        return _unwrap(-_j1(z))
    _check_nonzero(z, "j_n' (n >= 1)")
    return _unwrap(_jn(n - 1, z) - (n + 1) / z * _jn(n, z))


def sph_hankel1_prime(n: int, z: ComplexLike) -> Union[np.complex128, np.ndarray]:
    """
    Derivative h_n^(1)'(z), from h_0' = -h_1 and h_n' = h_{n-1} - (n+1)/z h_n.

    Raises:
        SpecialFunctionDomainError: If any argument is zero.
    """
    n = _check_order(n)
    z = _as_complex(z)
    _check_nonzero(z, "h_n^(1)'")
    ladder = _hankel_ladder(n + 1, z)
    if n == 0:
        return _unwrap(-ladder[1])
    return _unwrap(ladder[n - 1] - (n + 1) / z * ladder[n])
