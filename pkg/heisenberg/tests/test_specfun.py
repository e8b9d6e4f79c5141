"""
Tests for Hermite, Laguerre and special Hermite functions
"""

import math

import numpy as np
import pytest

from heisenberg.models import MultiIndex
from heisenberg.services.heatkernel import p_twisted
from heisenberg.services.quadrature import uniform_rule
from heisenberg.services.specfun import (
    SpecialFunctionError, dump_nodes, gauss_hermite_nodes, heat_expansion_partial_sum,
    hermite_function, hermite_poly, hermite_poly_table, laguerre_poly, special_hermite,
    special_hermite_analytic, twisted_convolution_constant
)


class TestPolynomials:
    """Test cases for the orthogonal polynomial recurrences"""

    def test_hermite_closed_form(self):
        """Test H_3 = 8x^3 - 12x, also at complex points"""
        x = np.array([-1.5, 0.0, 0.7, 2.0 + 1.0j])
        np.testing.assert_allclose(hermite_poly(3, x), 8 * x ** 3 - 12 * x)

    def test_hermite_table_matches_single(self):
        """Test the stacked table agrees with the single-degree recurrence"""
        x = np.linspace(-3, 3, 11)
        table = hermite_poly_table(6, x)
        for k in range(7):
            np.testing.assert_allclose(table[k], hermite_poly(k, x))

    def test_laguerre_closed_form(self):
        """Test L_2^a = (x^2 - 2(a+2)x + (a+1)(a+2))/2"""
        x = np.array([0.0, 0.5, 3.0])
        a = 1.5
        expected = (x ** 2 - 2 * (a + 2) * x + (a + 1) * (a + 2)) / 2.0
        np.testing.assert_allclose(laguerre_poly(2, a, x), expected)
        np.testing.assert_allclose(laguerre_poly(0, a, x), np.ones(3))
        np.testing.assert_allclose(laguerre_poly(1, a, x), 1 + a - x)

    def test_negative_degree(self):
        """Test negative degrees are rejected"""
        with pytest.raises(SpecialFunctionError):
            hermite_poly(-1, 0.0)
        with pytest.raises(SpecialFunctionError):
            laguerre_poly(-1, 0.0, 0.0)


class TestGaussHermite:
    """Test cases for Gauss-Hermite tables"""

    def test_moments(self):
        """Test the rule integrates 1 and x^2 against e^{-x^2}"""
        nodes, weights = gauss_hermite_nodes(20)
        assert weights.sum() == pytest.approx(math.sqrt(math.pi), rel=1e-13)
        assert np.dot(weights, nodes ** 2) == pytest.approx(math.sqrt(math.pi) / 2.0, rel=1e-12)

    def test_tables_are_read_only(self):
        """Test cached tables cannot be modified"""
        nodes, _ = gauss_hermite_nodes(8)
        with pytest.raises(ValueError):
            nodes[0] = 0.0

    def test_too_few_nodes(self):
        """Test fewer than two nodes are rejected"""
        with pytest.raises(SpecialFunctionError):
            gauss_hermite_nodes(1)

    def test_dump_nodes(self):
        """Test the CSV dump has one row per node"""
        lines = dump_nodes(4).strip().split("\n")
        assert lines[0] == "k,node,weight"
        assert len(lines) == 5
        assert lines[1].startswith("0,")


class TestHermiteFunctions:
    """Test cases for normalized Hermite functions"""

    def setup_method(self):
        """Setup for each test method"""
        self.x, self.w = uniform_rule(12.0, 481)

    def test_orthonormal(self):
        """Test Phi_j are orthonormal on the real line"""
        table = np.array([hermite_function(k, self.x) for k in range(6)])
        gram = (table * self.w) @ table.T
        np.testing.assert_allclose(gram, np.eye(6), atol=1e-10)

    def test_large_degree_is_finite(self):
        """Test high degrees do not overflow"""
        values = hermite_function(150, np.linspace(-20, 20, 41))
        assert np.all(np.isfinite(values))

    def test_product_form(self):
        """Test multi-indices give products of one-dimensional functions"""
        xi = np.array([[0.3, -0.4], [1.0, 0.2]])
        expected = hermite_function(1, xi[:, 0]) * hermite_function(2, xi[:, 1])
        np.testing.assert_allclose(hermite_function(MultiIndex.of(1, 2), xi), expected)

    def test_dimension_mismatch(self):
        """Test the point dimension must match the multi-index"""
        with pytest.raises(SpecialFunctionError):
            hermite_function((1, 2, 3), np.zeros((4, 2)))


class TestSpecialHermite:
    """Test cases for special Hermite functions"""

    def test_ground_state(self):
        """Test Phi_00 at lambda = 1 is (2 pi)^{-1/2} e^{-(x^2+u^2)/4}"""
        x = np.array([0.0, 0.5, -1.2])
        u = np.array([0.0, 0.3, 0.8])
        expected = (2 * math.pi) ** -0.5 * np.exp(-(x ** 2 + u ** 2) / 4.0)
        np.testing.assert_allclose(special_hermite(0, 0, 1.0, x, u), expected, rtol=1e-12)

    def test_lambda_scaling(self):
        """Test Phi^lambda = |lambda|^{n/2} Phi(sqrt|lambda| .), so the origin value doubles at lambda = 4"""
        value = special_hermite(0, 0, 4.0, 0.0, 0.0)
        assert value == pytest.approx(2.0 * (2 * math.pi) ** -0.5, rel=1e-12)

    def test_orthonormal_on_plane(self):
        """Test Phi_{10} and Phi_{01} are orthonormal in L^2(R^2)"""
        nodes, weights = uniform_rule(14.0, 281)
        X, U = np.meshgrid(nodes, nodes, indexing="ij")
        W = np.outer(weights, weights)
        phi_10 = special_hermite(1, 0, 1.0, X, U)
        phi_01 = special_hermite(0, 1, 1.0, X, U)
        assert np.sum(np.abs(phi_10) ** 2 * W) == pytest.approx(1.0, abs=1e-8)
        assert abs(np.sum(phi_10 * np.conj(phi_01) * W)) < 1e-8

    def test_analytic_matches_real(self):
        """Test the holomorphic extension restricts to the real function"""
        x = np.array([0.4, -0.7])
        u = np.array([1.1, 0.2])
        np.testing.assert_allclose(special_hermite_analytic(2, 1, -1.5, x + 0j, u + 0j),
                                   special_hermite(2, 1, -1.5, x, u))

    def test_invalid_arguments(self):
        """Test lambda = 0 and mismatched indices are rejected"""
        with pytest.raises(SpecialFunctionError):
            special_hermite(0, 0, 0.0, 0.0, 0.0)
        with pytest.raises(SpecialFunctionError):
            special_hermite((0, 1), (0,), 1.0, np.zeros((1, 2)), np.zeros((1, 2)))

    def test_heat_expansion_converges_to_kernel(self):
        """Test the special Hermite expansion sums to p_t^lambda"""
        x = np.array([0.0, 0.5, 1.0])
        u = np.array([0.0, -0.3, 0.4])
        partial = heat_expansion_partial_sum(30, 1.0, 1.0, x, u)
        np.testing.assert_allclose(partial.real, p_twisted(1.0, 1.0, x, u, n=1), rtol=1e-10, atol=1e-14)
        assert np.max(np.abs(partial.imag)) < 1e-12

    def test_twisted_convolution_constant(self):
        """Test c = (2 pi / |lambda|)^{n/2}"""
        assert twisted_convolution_constant(2 * math.pi) == pytest.approx(1.0)
        assert twisted_convolution_constant(-1.0, n=2) == pytest.approx(2 * math.pi)
