"""
Tests for twisted convolution, H_t^lambda and the twisted Bergman space
"""

import math

import numpy as np
import pytest
from scipy import integrate

from heisenberg.models import Lattice, QuadratureSpec, SampledField, SeparableField
from heisenberg.services.heatkernel import p_twisted
from heisenberg.services.hgroup import IncompatibleLatticeError
from heisenberg.services.specfun import special_hermite, twisted_convolution_constant
from heisenberg.services.twisted import (
    SeparableHeatTransform, TwistedTransformError, bergman_gram, bergman_pairing, fock_weight,
    gaussian_transform, heat_gaussian_transform, heat_transform_lambda, invert, lemma_chain_check,
    monomial, reproducing_kernel, sample_weight, special_hermite_transform, twisted_convolve_at,
    twisted_kernel_field, twisted_translate, weight_gaussian_factor, weight_lambda
)
from heisenberg.tests.fixtures import TestDataFactory


Z_POINTS = np.array([0.3 + 0.2j, -0.5 + 0.4j, 0.1 - 0.6j])
W_POINTS = np.array([0.1 - 0.3j, 0.4 + 0.1j, -0.2 + 0.5j])


class TestTwistedConvolution:
    """Test cases for the lambda-twisted convolution"""

    def setup_method(self):
        """Setup for each test method"""
        self.lam = 1.0
        lattice = Lattice.symmetric([9.0, 9.0], [81, 81])
        self.fields = {
            (a, b): SampledField.from_function(
                lambda x, u, a=a, b=b: special_hermite(a, b, self.lam, x, u), lattice, 1, lam=self.lam)
            for a in range(2) for b in range(2)
        }
        self.points = np.array([[0.0, 0.0], [0.5, -0.3]])
        self.quad = QuadratureSpec(tol=1e-6)

    def test_matching_indices(self):
        """Test Phi_{a,b} *_lam Phi_{b,n} = (2 pi/|lam|)^{1/2} Phi_{a,n}"""
        values = twisted_convolve_at(self.fields[(1, 0)], self.fields[(0, 1)], self.lam, self.quad, self.points)
        expected = twisted_convolution_constant(self.lam) * special_hermite(1, 1, self.lam,
                                                                             self.points[:, 0], self.points[:, 1])
        np.testing.assert_allclose(values, expected, atol=1e-6)

    def test_mismatched_indices(self):
        """Test Phi_{a,b} *_lam Phi_{m,n} vanishes for b != m"""
        values = twisted_convolve_at(self.fields[(0, 1)], self.fields[(0, 0)], self.lam, self.quad, self.points)
        assert np.max(np.abs(values)) < 1e-6

    def test_kernel_semigroup(self):
        """Test p_s *_lam p_t = p_{s+t} on sampled kernels"""
        lattice = Lattice.symmetric([8.0, 8.0], [65, 65])
        ps = twisted_kernel_field(lattice, 0.4, self.lam)
        pt = twisted_kernel_field(lattice, 0.6, self.lam)
        values = twisted_convolve_at(ps, pt, self.lam, self.quad, self.points)
        expected = p_twisted(self.lam, 1.0, self.points[:, 0], self.points[:, 1])
        np.testing.assert_allclose(values, expected, rtol=1e-6)

    def test_group_field_rejected(self):
        """Test fields on R^{2n+1} are rejected"""
        group_field = TestDataFactory.create_gaussian_field(count=9, group=True)
        with pytest.raises(IncompatibleLatticeError):
            twisted_convolve_at(group_field, group_field, 1.0, self.quad, [[0.0, 0.0]])


class TestHeatTransform:
    """Test cases for H_t^lambda and its closed forms"""

    def setup_method(self):
        """Setup for each test method"""
        self.t = 0.5
        self.lam = 1.0
        self.field = TestDataFactory.create_gaussian_field(a=1.0, radius=6.0, count=49)

    def test_gaussian_closed_form(self):
        """Test the quadrature transform of a Gaussian against its closed form"""
        numeric = heat_transform_lambda(self.field, self.t, self.lam).evaluate(Z_POINTS, W_POINTS)
        closed = gaussian_transform(1.0, self.t, self.lam).evaluate(Z_POINTS, W_POINTS)
        np.testing.assert_allclose(numeric, closed, rtol=1e-6)

    def test_product_evaluator(self):
        """Test product evaluation agrees with pointwise evaluation"""
        F = heat_transform_lambda(self.field, self.t, self.lam)
        matrix = F.evaluate_product(Z_POINTS, W_POINTS)
        pointwise = F.evaluate(Z_POINTS[:, None, None], W_POINTS[None, :, None])
        np.testing.assert_allclose(matrix, pointwise, rtol=1e-10)

    def test_equivariance(self):
        """Test H_t^lam commutes with twisted translations"""
        a, b = 0.4, -0.3
        lhs = heat_transform_lambda(twisted_translate(self.field, a, b, self.lam), self.t, self.lam)
        rhs = twisted_translate(heat_transform_lambda(self.field, self.t, self.lam), a, b, self.lam)
        np.testing.assert_allclose(lhs.evaluate(Z_POINTS, W_POINTS), rhs.evaluate(Z_POINTS, W_POINTS), rtol=1e-6)

    def test_heat_kernel_semigroup(self):
        """Test H_t^lam(tau(a, b) p_s) = tau(a, b) p_{s+t}"""
        s, a, b = 0.3, 0.2, -0.1
        lattice = Lattice.symmetric([8.0, 8.0], [65, 65])
        kernel = twisted_translate(twisted_kernel_field(lattice, s, self.lam), a, b, self.lam)
        numeric = heat_transform_lambda(kernel, self.t, self.lam).evaluate(Z_POINTS, W_POINTS)
        closed = heat_gaussian_transform(s, self.t, self.lam, a=a, b=b).evaluate(Z_POINTS, W_POINTS)
        np.testing.assert_allclose(numeric, closed, rtol=1e-6)

    def test_semigroup_at_origin(self):
        """Test the untranslated closed form at the origin is p_{s+t}(0)"""
        value = heat_gaussian_transform(0.25, self.t, self.lam).evaluate(0.0, 0.0)
        assert complex(value) == pytest.approx(p_twisted(self.lam, 0.75, 0.0, 0.0))

    def test_eigenfunction(self):
        """Test H_t^lam Phi_{a,b} = e^{-(2b+1)|lam| t} Phi_{a,b}"""
        lattice = Lattice.symmetric([9.0, 9.0], [81, 81])
        field = SampledField.from_function(lambda x, u: special_hermite(1, 2, self.lam, x, u), lattice, 1)
        numeric = heat_transform_lambda(field, self.t, self.lam).evaluate(Z_POINTS, W_POINTS)
        closed = special_hermite_transform(1, 2, self.t, self.lam).evaluate(Z_POINTS, W_POINTS)
        np.testing.assert_allclose(numeric, closed, rtol=1e-5)

    def test_invalid_parameters(self):
        """Test lambda = 0, t <= 0 and group fields are rejected"""
        with pytest.raises(TwistedTransformError):
            heat_transform_lambda(self.field, self.t, 0.0)
        with pytest.raises(TwistedTransformError):
            heat_transform_lambda(self.field, -1.0, self.lam)
        with pytest.raises(TwistedTransformError):
            heat_transform_lambda(TestDataFactory.create_gaussian_field(count=9, group=True), self.t, self.lam)
        with pytest.raises(TwistedTransformError):
            gaussian_transform(0.0, self.t, self.lam)


class TestWeights:
    """Test cases for W_t^lambda and the Fock weight"""

    def test_weight_at_origin(self):
        """Test W_t^lam(0) = 4 (4 pi)^{-1} lam / sinh(2 t lam)"""
        t, lam = 0.5, 1.0
        expected = 4.0 / (4 * math.pi) * lam / math.sinh(2 * t * lam)
        assert float(np.squeeze(weight_lambda(t, lam, 0.0, 0.0))) == pytest.approx(expected, rel=1e-14)

    def test_symplectic_factor(self):
        """Test W_t^lam = e^{lam(u.y - v.x)} 4 p_2t^lam(2y, 2v)"""
        t, lam, x, u, y, v = 0.5, 0.7, 0.3, -0.4, 0.5, 0.2
        gaussian = 4.0 * p_twisted(lam, 2 * t, 2 * y, 2 * v)
        value = float(np.squeeze(weight_lambda(t, lam, y, v, x, u)))
        assert value == pytest.approx(gaussian * math.exp(lam * (u * y - v * x)), rel=1e-13)

    def test_sample_weight(self):
        """Test the packed weight keeps both factors"""
        sample = sample_weight(0.5, 1.0, [0.1, 0.2], [0.0, 0.3], [0.5, 0.5], [0.0, 0.0])
        np.testing.assert_allclose(sample.gaussian, weight_gaussian_factor(0.5, 1.0, [0.1, 0.2], [0.0, 0.3]))
        assert sample.values.shape == (2,)

    def test_fock_weight(self):
        """Test |F e^{kappa(z^2 + w^2)}|^2 times the Fock weight is |F|^2 W_t^lam"""
        t, lam, x, u, y, v = 0.5, 1.0, 0.3, -0.4, 0.5, 0.2
        kappa2 = 0.5 * lam / math.tanh(2 * t * lam)
        fock = float(np.squeeze(fock_weight(t, lam, x, u, y, v)))
        bergman = float(np.squeeze(weight_lambda(t, lam, y, v, x, u)))
        assert fock * math.exp(kappa2 * (x * x - y * y + u * u - v * v)) == pytest.approx(bergman, rel=1e-12)

    def test_weight_needs_lambda(self):
        """Test W_t^0 is undefined"""
        with pytest.raises(TwistedTransformError):
            weight_lambda(0.5, 0.0, 0.0, 0.0)


class TestBergmanSpace:
    """Test cases for pairings, reproducing kernels and inversion"""

    def test_orthonormal_pair(self):
        """Test Phi~_00 and Phi~_10 are orthonormal in the twisted Bergman space"""
        functions = [special_hermite_transform(0, 0, 0.5, 1.0), special_hermite_transform(1, 0, 0.5, 1.0)]
        gram = bergman_gram(functions)
        np.testing.assert_allclose(gram, np.eye(2), atol=1e-3)

    def test_reproducing_kernel_on_diagonal(self):
        """Test K_(a,b)(a, b) = p_2t(0)"""
        kernel = reproducing_kernel(0.4, -0.2, 0.5, 1.0)
        value = complex(kernel.evaluate(0.4, -0.2))
        assert value == pytest.approx(p_twisted(1.0, 1.0, 0.0, 0.0), rel=1e-14)

    def test_lemma_chain(self):
        """Test every step of the closed-form reproducing identity"""
        residuals = lemma_chain_check(0.5)
        assert set(residuals) >= {"coth_plus_tanh", "completed_square", "assembly"}
        assert max(residuals.values()) < 1e-8

    def test_mismatched_spaces(self):
        """Test pairing functions of different spaces raises"""
        F = special_hermite_transform(0, 0, 0.5, 1.0)
        G = special_hermite_transform(0, 0, 1.0, 1.0)
        with pytest.raises(TwistedTransformError):
            bergman_pairing(F, G)

    def test_two_dimensional_pairing(self):
        """Test pairings are limited to n = 1"""
        F = special_hermite_transform((0, 0), (0, 0), 0.5, 1.0)
        with pytest.raises(TwistedTransformError):
            bergman_pairing(F, F)

    def test_monomial(self):
        """Test z^a w^b evaluation"""
        F = monomial(2, 1, 0.5, 1.0)
        np.testing.assert_allclose(F.evaluate(Z_POINTS, W_POINTS), Z_POINTS ** 2 * W_POINTS)

    def test_invert_needs_positive_time(self):
        """Test the regularization time must be positive"""
        F = gaussian_transform(0.5, 0.5, 1.0)
        with pytest.raises(TwistedTransformError):
            invert(F, 0.0, Lattice.symmetric([1.0, 1.0], [3, 3]))


class TestSeparableTransform:
    """Test cases for H_t f assembled from central slices"""

    def test_against_scipy(self):
        """Test the lambda midpoint rule against adaptive quadrature"""
        t, a = 0.5, 1.0
        f = SeparableField(spatial=TestDataFactory.create_gaussian_field(a=a, count=9),
                           spectrum=lambda lam: math.sqrt(math.pi) * np.exp(-np.asarray(lam) ** 2 / 4.0),
                           gaussian_width=a)
        transform = SeparableHeatTransform(f, t)
        z, w, zeta = 0.3 + 0.1j, -0.2 + 0.2j, 0.4 - 0.1j

        def integrand(lam):
            return (math.sqrt(math.pi) * math.exp(-lam * lam / 4.0 - t * lam * lam) * np.exp(-1j * lam * zeta)
                    * complex(gaussian_transform(a, t, -lam).evaluate(z, w))) / (2 * math.pi)

        # split at 0: the closed form needs lambda != 0
        halves = ((-12.0, 0.0), (0.0, 12.0))
        real = sum(integrate.quad(lambda lam: integrand(lam).real, lo, hi, epsabs=1e-13)[0] for lo, hi in halves)
        imag = sum(integrate.quad(lambda lam: integrand(lam).imag, lo, hi, epsabs=1e-13)[0] for lo, hi in halves)
        value = complex(transform.evaluate(z, w, zeta))
        assert value == pytest.approx(complex(real, imag), rel=1e-6)

    def test_slice(self):
        """Test the slice identity uses the reflected spectral parameter"""
        f = TestDataFactory.create_separable_field(support=(0.5, 1.5))
        transform = SeparableHeatTransform(f, 0.5)
        value = transform.slice(1.0, 0.2 + 0.1j, -0.1j, eta=0.3)
        expected = math.exp(0.3 - 0.5) * gaussian_transform(1.0, 0.5, -1.0).evaluate(0.2 + 0.1j, -0.1j)
        assert complex(value) == pytest.approx(complex(expected))
