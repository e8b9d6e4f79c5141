"""
Tests for the group law, polar coordinates and group convolution
"""

import math

import numpy as np
import pytest

from heisenberg.models import ComplexGroupPoint, GroupPoint, Lattice, QuadratureSpec, SampledField
from heisenberg.services.hgroup import (
    DimensionMismatchError, IncompatibleLatticeError, central_slice, coarse_mask, complex_inverse,
    complex_multiply, convolve, convolve_at, inverse, multiply, polar_decompose, polar_recompose,
    slice_twist, translate
)
from heisenberg.services.quadrature import TruncationError
from heisenberg.tests.fixtures import TestDataFactory


class TestGroupLaw:
    """Test cases for the real and complex group law"""

    def test_central_term(self):
        """Test (1,0,0)(0,1,0) = (1,1,1/2)"""
        p = multiply(GroupPoint(x=[1.0], u=[0.0]), GroupPoint(x=[0.0], u=[1.0]))
        assert p == GroupPoint(x=[1.0], u=[1.0], xi=0.5)

    def test_associativity(self):
        """Test (pq)r = p(qr) on random points, n = 2"""
        rng = np.random.default_rng(7)
        p, q, r = (GroupPoint.from_arrays(rng.normal(size=2), rng.normal(size=2), rng.normal()) for _ in range(3))
        left = multiply(multiply(p, q), r)
        right = multiply(p, multiply(q, r))
        np.testing.assert_allclose(left.x + left.u + [left.xi], right.x + right.u + [right.xi], atol=1e-14)

    def test_inverse(self):
        """Test p p^{-1} = e"""
        p = TestDataFactory.create_group_point()
        assert multiply(p, inverse(p)) == GroupPoint.identity(1)

    def test_dimension_mismatch(self):
        """Test points of different dimensions cannot be multiplied"""
        with pytest.raises(DimensionMismatchError):
            multiply(GroupPoint.identity(1), GroupPoint.identity(2))

    def test_complex_law_restricts_to_real(self):
        """Test the holomorphic law agrees with the real one on real points"""
        p = TestDataFactory.create_group_point()
        q = TestDataFactory.create_group_point(x=(-1.0,), u=(0.5,), xi=2.0)
        product = complex_multiply(ComplexGroupPoint.from_real(p), ComplexGroupPoint.from_real(q))
        assert product.real_part() == multiply(p, q)

    def test_complex_inverse(self):
        """Test c c^{-1} = e on the complexification"""
        c = TestDataFactory.create_complex_point()
        product = complex_multiply(c, complex_inverse(c))
        assert product.z == [0j]
        assert product.zeta == 0j


class TestPolarDecomposition:
    """Test cases for c = h exp(iX)"""

    def test_round_trip(self):
        """Test decompose then recompose gives back c"""
        c = TestDataFactory.create_complex_point()
        h, X = polar_decompose(c)
        back = polar_recompose(h, X)
        np.testing.assert_allclose(back.z, c.z)
        np.testing.assert_allclose(back.w, c.w)
        assert back.zeta == pytest.approx(c.zeta, abs=1e-15)

    def test_real_point(self):
        """Test a real point has X = 0"""
        p = TestDataFactory.create_group_point()
        h, X = polar_decompose(ComplexGroupPoint.from_real(p))
        assert h == p
        assert X == GroupPoint.identity(1)

    def test_mismatched_factors(self):
        """Test the factors must share a dimension"""
        with pytest.raises(DimensionMismatchError):
            polar_recompose(GroupPoint.identity(1), GroupPoint.identity(2))


class TestConvolution:
    """Test cases for group convolution"""

    def setup_method(self):
        """Setup for each test method"""
        self.a = 0.5
        self.f = TestDataFactory.create_gaussian_field(a=self.a, radius=6.0, count=25, group=True)
        self.quad = QuadratureSpec(tol=1e-3)

    def test_inversion_symmetry(self):
        """Test (f * f)(p^{-1}) = (f * f)(p) for an inversion-invariant f"""
        points = np.array([[0.5, -0.3, 0.7], [-0.5, 0.3, -0.7]])
        values = convolve_at(self.f, self.f, self.quad, points)
        assert values[0] == pytest.approx(values[1], rel=1e-8)

    def test_xi_marginal(self):
        """Test int (f * f) dxi = (pi/a)(pi/2a) e^{-a r^2/2} for Gaussian f"""
        x, u = 0.4, -0.2
        xi = np.linspace(-10.0, 10.0, 41)
        points = np.stack([np.full_like(xi, x), np.full_like(xi, u), xi], axis=-1)
        values = convolve_at(self.f, self.f, self.quad, points)
        marginal = np.sum(values.real) * (xi[1] - xi[0])
        expected = (math.pi / self.a) * (math.pi / (2 * self.a)) * math.exp(-self.a * (x * x + u * u) / 2)
        assert marginal == pytest.approx(expected, rel=1e-6)

    def test_convolve_on_output_lattice(self):
        """Test convolve samples onto the requested lattice"""
        output = Lattice.symmetric([1.0, 1.0, 1.0], [3, 3, 3])
        result = convolve(self.f, self.f, self.quad, output)
        assert result.lattice == output
        expected = convolve_at(self.f, self.f, self.quad, output.points())
        np.testing.assert_allclose(result.values.ravel(), expected)

    def test_requires_group_fields(self):
        """Test convolution needs fields on R^{2n+1}"""
        planar = TestDataFactory.create_gaussian_field(count=9)
        with pytest.raises(IncompatibleLatticeError):
            convolve_at(planar, planar, self.quad, [[0.0, 0.0, 0.0]])

    def test_undecayed_factor(self):
        """Test a field that has not decayed at its faces is rejected"""
        wide = TestDataFactory.create_gaussian_field(a=0.01, radius=2.0, count=9, group=True)
        with pytest.raises(TruncationError):
            convolve_at(wide, wide, self.quad, [[0.0, 0.0, 0.0]])

    def test_coarse_mask(self):
        """Test the doubled-spacing sub-lattice keeps even indices"""
        mask = coarse_mask(Lattice.symmetric([1.0, 1.0], [3, 3]))
        assert mask.tolist() == [True, False, True, False, False, False, True, False, True]


class TestCentralSlice:
    """Test cases for the xi-Fourier transform"""

    def setup_method(self):
        """Setup for each test method"""
        def gaussian(x, u, xi):
            return np.exp(-(x ** 2 + u ** 2)) * np.exp(-xi ** 2)

        self.gaussian = gaussian
        lattice = Lattice.symmetric([2.0, 2.0, 6.0], [5, 5, 49])
        self.F = SampledField.from_function(gaussian, lattice, 1)

    def test_gaussian_slice(self):
        """Test F^lam = sqrt(pi) e^{-lam^2/4} G"""
        lam = 1.3
        sliced = central_slice(self.F, lam)
        X, U = sliced.lattice.mesh()
        expected = math.sqrt(math.pi) * math.exp(-lam * lam / 4) * np.exp(-(X ** 2 + U ** 2))
        np.testing.assert_allclose(sliced.values, expected, rtol=1e-10, atol=1e-14)
        assert sliced.lam == lam
        assert not sliced.is_group_field

    def test_short_xi_domain(self):
        """Test a truncated xi-axis raises TruncationError"""
        F = SampledField.from_function(self.gaussian, Lattice.symmetric([2.0, 2.0, 1.0], [5, 5, 9]), 1)
        with pytest.raises(TruncationError):
            central_slice(F, 1.0)

    def test_planar_field(self):
        """Test a planar field has no central axis"""
        with pytest.raises(IncompatibleLatticeError):
            central_slice(TestDataFactory.create_gaussian_field(count=9), 1.0)

    def test_slice_twist(self):
        """Test the twisted convolution parameter flips sign"""
        assert slice_twist(2.0) == -2.0


class TestTranslate:
    """Test cases for left translation"""

    def test_translate_moves_peak(self):
        """Test (tau(h) F)(h) = F(e)"""
        F = TestDataFactory.create_gaussian_field(count=9, group=True)
        h = TestDataFactory.create_group_point()
        moved = translate(F, h)
        value = moved.evaluator(np.array([0.3]), np.array([-0.2]), np.array([0.1]))
        assert value[0] == pytest.approx(1.0)

    def test_needs_evaluator(self):
        """Test translation needs an off-lattice evaluator"""
        F = TestDataFactory.create_gaussian_field(count=9, group=True)
        bare = SampledField(lattice=F.lattice, values=F.values, n=1)
        with pytest.raises(IncompatibleLatticeError):
            translate(bare, GroupPoint.identity(1))
