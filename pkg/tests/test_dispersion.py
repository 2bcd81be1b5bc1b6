"""
Unit tests for the dispersion matrix and the scaled determinant.

Tests the src/resonance/dispersion.py module including:
- Block entries for one and two layers
- Block-tridiagonal sparsity
- ScaledDeterminant arithmetic and LU determinant against a permutation oracle
- Conjugation symmetry and determinism of the dispersion function
"""

import math

import numpy as np
import pytest

from src.cli.selftest import leibniz_det
from src.resonance.dispersion import (
    PoleError,
    ScaledDeterminant,
    assemble,
    block_sparsity_mask,
    dispersion_fn,
    scaled_det,
)
from src.resonance.medium import geometry_equidistant, make_medium, medium_from_delta
from src.resonance.specfun import (
    sph_bessel_j,
    sph_bessel_j_prime,
    sph_hankel1,
    sph_hankel1_prime,
)

# =============================================================================
# ASSEMBLY
# =============================================================================


class TestAssemble:
    """Tests for assemble."""

    def test_single_layer_entries(self):
        """Test A_1 rows (-h(k r), j(k_r r)) and (-delta h'(k r), tau j'(k_r r))."""
        medium = make_medium(2.0, 8.0, 1000.0, 500.0)
        omega = 0.03 - 0.001j
        k, k_r = omega / medium.v, omega / medium.v_r
        matrix = assemble(geometry_equidistant(1), medium, omega).entries
        expected = np.array(
            [
                [-sph_hankel1(0, k), sph_bessel_j(0, k_r)],
                [-medium.delta * sph_hankel1_prime(0, k), medium.tau * sph_bessel_j_prime(0, k_r)],
            ]
        )
        np.testing.assert_array_equal(matrix, expected)

    def test_second_interface_left_block(self):
        """Test L_2 = [[0, -j(k_r r_2)], [0, -tau j'(k_r r_2)]]."""
        medium = make_medium(2.0, 8.0, 1000.0, 500.0)
        omega = 0.05
        k_r = omega / medium.v_r
        matrix = assemble(geometry_equidistant(2), medium, omega).entries
        assert matrix[2, 0] == 0 and matrix[3, 0] == 0
        assert matrix[2, 1] == -sph_bessel_j(0, k_r * 1.0)
        assert matrix[3, 1] == -medium.tau * sph_bessel_j_prime(0, k_r * 1.0)

    def test_second_interface_diagonal_block(self):
        """Test the even-interface M block swaps materials with factors (tau, delta)."""
        medium = make_medium(2.0, 8.0, 1000.0, 500.0)
        omega = 0.05
        k, k_r = omega / medium.v, omega / medium.v_r
        matrix = assemble(geometry_equidistant(2), medium, omega).entries
        assert matrix[2, 2] == -sph_hankel1(0, k_r)
        assert matrix[2, 3] == sph_bessel_j(0, k)
        assert matrix[3, 2] == -medium.tau * sph_hankel1_prime(0, k_r)
        assert matrix[3, 3] == medium.delta * sph_bessel_j_prime(0, k)

    def test_outer_right_block(self):
        """Test R_1 couples interface 1 to a_2 and leaves b_2 at zero."""
        medium = medium_from_delta(1e-3)
        matrix = assemble(geometry_equidistant(3), medium, 0.02).entries
        assert matrix[0, 2] == sph_hankel1(0, 0.02 * 3.0)
        assert matrix[0, 3] == 0
        assert matrix[1, 3] == 0

    @pytest.mark.parametrize("n_layers", [1, 2, 3, 5, 8])
    def test_sparsity(self, n_layers):
        """Test nonzeros occur only inside the block-tridiagonal mask."""
        matrix = assemble(geometry_equidistant(n_layers), medium_from_delta(1e-3), 0.01 - 1e-4j)
        mask = block_sparsity_mask(n_layers)
        assert not np.any(matrix.entries[~mask])
        assert np.all(matrix.entries[mask] != 0)

    def test_higher_order_assembles(self):
        """Test assembly for n = 2 records the order."""
        matrix = assemble(geometry_equidistant(2), medium_from_delta(1e-3), 0.1, n=2)
        assert matrix.order_n == 2
        assert matrix.size == 4

    def test_pole_at_zero(self):
        """Test omega = 0 raises PoleError."""
        with pytest.raises(PoleError):
            assemble(geometry_equidistant(2), medium_from_delta(1e-3), 0.0)


# =============================================================================
# SCALED DETERMINANT
# =============================================================================


class TestScaledDeterminant:
    """Tests for ScaledDeterminant and scaled_det."""

    def test_from_parts_normalizes_mantissa(self):
        """Test the mantissa is brought into [1, 2)."""
        value = ScaledDeterminant.from_parts(12.0 + 0j, 3)
        assert 1 <= abs(value.mantissa) < 2
        assert value.value == pytest.approx(96.0)

    def test_zero(self):
        """Test zero has mantissa 0 and log2 -inf."""
        value = ScaledDeterminant.from_parts(0j, 7)
        assert value.is_zero
        assert value.exponent == 0
        assert value.log2_abs() == -math.inf

    def test_identity(self):
        """Test det(I_4) has mantissa 1 and exponent 0."""
        result = scaled_det(np.eye(4))
        assert result.mantissa == 1
        assert result.exponent == 0

    def test_diagonal(self):
        """Test det(diag(2, 3, 4)) = 24."""
        assert scaled_det(np.diag([2.0, 3.0, 4.0])).value == pytest.approx(24.0, rel=1e-15)

    def test_row_swap_sign(self):
        """Test a permutation matrix with one swap has determinant -1."""
        assert scaled_det(np.array([[0.0, 1.0], [1.0, 0.0]])).value == pytest.approx(-1.0)

    def test_singular(self):
        """Test a singular matrix returns a zero mantissa."""
        assert scaled_det(np.array([[1.0, 2.0], [2.0, 4.0]])).is_zero

    def test_no_underflow(self):
        """Test a determinant far below the double range is represented exactly."""
        result = scaled_det(np.eye(100) * 1e-10)
        assert result.log2_abs() == pytest.approx(100 * math.log2(1e-10), rel=1e-12)
        assert result.value == 0

    def test_relative_to_and_scaled(self):
        """Test relative_to and scaled against plain arithmetic."""
        value = ScaledDeterminant.from_parts(3.0 - 1.0j, 10)
        assert value.relative_to(8) == pytest.approx((3.0 - 1.0j) * 4)
        assert value.scaled(0.5j).value == pytest.approx((3.0 - 1.0j) * 1024 * 0.5j)
        assert value.conjugate().value == pytest.approx(((3.0 - 1.0j) * 1024).conjugate())

    def test_non_square_rejected(self):
        """Test a rectangular matrix raises ValueError."""
        with pytest.raises(ValueError, match="square"):
            scaled_det(np.ones((2, 3)))

    def test_random_against_permutation_oracle(self):
        """Test 6x6 random complex determinants against the permutation sum."""
        rng = np.random.default_rng(7)
        for _ in range(5):
            m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
            exact = leibniz_det(m)
            assert abs(scaled_det(m).value - exact) / abs(exact) <= 1e-12

    def test_dispersion_against_permutation_oracle(self):
        """Test det A_N for N <= 3 over random frequencies against the permutation sum."""
        rng = np.random.default_rng(11)
        medium = medium_from_delta(1e-3)
        for n_layers in (1, 2, 3):
            geom = geometry_equidistant(n_layers)
            for _ in range(10):
                omega = complex(rng.uniform(0.005, 0.2), -rng.uniform(0.0, 0.01))
                matrix = assemble(geom, medium, omega).entries
                exact = leibniz_det(matrix)
                assert abs(scaled_det(matrix).value - exact) / abs(exact) <= 1e-9


# =============================================================================
# DISPERSION FUNCTION
# =============================================================================


class TestDispersionFunction:
    """Tests for dispersion_fn."""

    def test_deterministic(self):
        """Test two evaluations at the same omega are bit-identical."""
        f = dispersion_fn(geometry_equidistant(4), medium_from_delta(1 / 6000))
        a, b = f(0.0067 - 1e-4j), f(0.0067 - 1e-4j)
        assert a.mantissa == b.mantissa and a.exponent == b.exponent

    @pytest.mark.parametrize("n_layers", [1, 2, 3, 4])
    def test_conjugation_symmetry(self, n_layers):
        """Test det A(-conj w) = (-1)^N conj(det A(w)) at order 0."""
        f = dispersion_fn(geometry_equidistant(n_layers), medium_from_delta(1e-3))
        for omega in (0.01 - 0.001j, 0.07 - 1e-5j, 0.15 + 0.0j):
            value = f(omega).value
            mirror = f(-omega.conjugate()).value
            expected = (-1) ** n_layers * value.conjugate()
            assert abs(mirror - expected) / abs(value) <= 1e-10

    def test_single_ball_dip_near_leading_order(self):
        """Test |f| dips near sqrt(3) * 1e-2 on the real axis for N = 1, delta = 1e-4."""
        f = dispersion_fn(geometry_equidistant(1), medium_from_delta(1e-4))
        grid = np.linspace(0.005, 0.05, 901)
        log_abs = np.array([f(w).log2_abs() for w in grid])
        best = grid[int(np.argmin(log_abs))]
        assert best == pytest.approx(math.sqrt(3) * 1e-2, rel=0.02)

    def test_matrix_accessor(self):
        """Test the callable exposes the assembled matrix."""
        f = dispersion_fn(geometry_equidistant(2), medium_from_delta(1e-3), n=1)
        assert f.matrix(0.1).order_n == 1
