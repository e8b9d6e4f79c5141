"""
Tests for the signed partial weights, their series and the one-dimensional layer
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from heisenberg.models import PartialWeightParams
from heisenberg.services.partialweights import (
    SERIES_CONSTANT, PartialWeightError, calibrate_series_constant, imaginary_residual,
    line_scale_constant, measure_line_scale, one_dim_transform, origin_profile,
    origin_tail_amplitude, oscillation_scan, pde_residual, reconstruct_weight, signed_disk_demo,
    vt_plus_pairing, w_minus, w_plus_contour, w_plus_series, w_plus_tail_bound
)
from heisenberg.services.twisted import SeparableHeatTransform, weight_gaussian_factor
from heisenberg.tests.fixtures import TestDataFactory


def _grid():
    axis = np.array([-0.5, 0.0, 0.7])
    return np.meshgrid(axis, axis, axis, indexing="ij")


class TestContourWeight:
    """Test cases for W_t^+ by contour quadrature"""

    def test_abscissa_independence(self):
        """Test the value does not depend on the contour abscissa"""
        Y, V, E = _grid()
        reference = w_plus_contour(Y, V, E, 1.0, params=PartialWeightParams(t=1.0, lam=1.0))
        moved = w_plus_contour(Y, V, E, 1.0, params=PartialWeightParams(t=1.0, lam=0.5))
        np.testing.assert_allclose(moved, reference, rtol=1e-6, atol=1e-6 * np.max(np.abs(reference)))

    def test_xi_independence(self):
        """Test the real central coordinate does not enter"""
        assert w_plus_contour(0.3, -0.2, 0.1, 1.0, xi=5.0) == w_plus_contour(0.3, -0.2, 0.1, 1.0)

    def test_realness(self):
        """Test the contour integral is real"""
        Y, V, E = _grid()
        assert imaginary_residual(Y, V, E, 1.0) < 1e-8

    def test_scalar_input(self):
        """Test scalar arguments give a float"""
        assert isinstance(w_plus_contour(0.0, 0.0, 0.0, 1.0), float)

    def test_positive_near_origin(self):
        """Test W_t^+ is positive on a small ball"""
        ball = np.array([-0.3, 0.0, 0.3])
        Y, V, E = np.meshgrid(ball, ball, ball, indexing="ij")
        assert np.all(w_plus_contour(Y, V, E, 1.0) > 0)

    def test_tail_bound(self):
        """Test the contour bound dominates |W_t^+|"""
        beta, eta = 0.5, 0.3
        value = w_plus_contour(math.sqrt(beta), 0.0, eta, 1.0)
        assert abs(value) <= w_plus_tail_bound(eta, 1.0, 1.0, beta)
        with pytest.raises(PartialWeightError):
            w_plus_tail_bound(eta, 1.0, 0.0, beta)


class TestNegativeWeight:
    """Test cases for W_t^- and its two evaluation paths"""

    def setup_method(self):
        """Setup for each test method"""
        rng = np.random.default_rng(41)
        self.x, self.u, self.y, self.v, self.eta = rng.uniform(-1.0, 1.0, size=(5, 6))

    def test_paths_agree(self):
        """Test the lambda < 0 contour matches the reflection of W_t^+"""
        contour = w_minus(self.y, self.v, self.eta, 1.0, x=self.x, u=self.u, path="contour")
        reflected = w_minus(self.y, self.v, self.eta, 1.0, x=self.x, u=self.u, path="reflection")
        np.testing.assert_allclose(reflected, contour, rtol=1e-6, atol=1e-6 * np.max(np.abs(contour)))

    def test_both_paths(self):
        """Test path="both" returns the contour value"""
        both = w_minus(self.y, self.v, self.eta, 1.0, x=self.x, u=self.u, tol=1e-6)
        contour = w_minus(self.y, self.v, self.eta, 1.0, x=self.x, u=self.u, path="contour")
        np.testing.assert_allclose(both, contour)

    def test_unknown_path(self):
        """Test unknown paths are rejected"""
        with pytest.raises(PartialWeightError):
            w_minus(0.0, 0.0, 0.0, 1.0, path="sideways")

    def test_wrong_branch_parameters(self):
        """Test W+ parameters cannot drive W-"""
        with pytest.raises(PartialWeightError):
            w_minus(0.0, 0.0, 0.0, 1.0, params=PartialWeightParams(t=1.0, lam=1.0))
        with pytest.raises(PartialWeightError):
            w_plus_contour(0.0, 0.0, 0.0, 1.0, params=PartialWeightParams(t=0.5))


class TestReconstruction:
    """Test cases for recovering W_t^lambda from the partial weights"""

    def test_positive_lambda(self):
        """Test e^{-2t lam^2} int e^{2 eta lam} W_t^+ d eta = 4 p_2t^lam(2y, 2v)"""
        y = np.array([0.0, 0.5])
        v = np.array([0.0, -0.3])
        values = reconstruct_weight(y, v, 1.0, 1.0)
        np.testing.assert_allclose(values, weight_gaussian_factor(1.0, 1.0, y, v), rtol=1e-4)

    def test_negative_lambda(self):
        """Test lambda < 0 integrates W_t^-"""
        value = reconstruct_weight(0.4, 0.2, 1.0, -1.0)
        assert value == pytest.approx(float(np.squeeze(weight_gaussian_factor(1.0, -1.0, 0.4, 0.2))), rel=1e-4)

    def test_zero_lambda(self):
        """Test lambda = 0 has no reconstruction"""
        with pytest.raises(PartialWeightError):
            reconstruct_weight(0.0, 0.0, 1.0, 0.0)

    def test_pde(self):
        """Test W_t^+ solves the degenerate heat equation"""
        assert pde_residual(0.3, -0.2, 0.1, 1.0, h=1e-2) < 1e-3
        with pytest.raises(PartialWeightError):
            pde_residual(0.3, -0.2, 0.1, 1.0, h=0.0)


class TestHermiteSeries:
    """Test cases for the n = 1 Hermite series"""

    def setup_method(self):
        """Setup for each test method"""
        rng = np.random.default_rng(51)
        beta = rng.uniform(0.0, 4.0, size=8)
        theta = rng.uniform(0.0, 2.0 * math.pi, size=8)
        self.eta = rng.uniform(-1.0, 1.0, size=8)
        self.y, self.v = np.sqrt(beta) * np.cos(theta), np.sqrt(beta) * np.sin(theta)

    def test_constant(self):
        """Test the calibrated constant is 2 / pi^2"""
        assert calibrate_series_constant() == pytest.approx(SERIES_CONSTANT, rel=1e-6)

    def test_half_convention(self):
        """Test the series at t is the contour weight at t/2"""
        series = w_plus_series(self.y, self.v, self.eta, 1.0)
        contour = w_plus_contour(self.y, self.v, self.eta, 0.5)
        np.testing.assert_allclose(series, contour, rtol=1e-4, atol=1e-4 * np.max(np.abs(contour)))

    def test_direct_convention(self):
        """Test the direct reading at t is the half reading at 2t"""
        direct = w_plus_series(self.y, self.v, self.eta, 0.5, convention="direct")
        half = w_plus_series(self.y, self.v, self.eta, 1.0)
        np.testing.assert_allclose(direct, half, rtol=1e-14)

    def test_unknown_convention(self):
        """Test unknown conventions are rejected"""
        with pytest.raises(PartialWeightError):
            w_plus_series(0.0, 0.0, 0.0, 1.0, convention="quarter")

    def test_origin_profile(self):
        """Test the beta = 0 sum matches the full series"""
        eta = np.array([-0.5, 0.0, 0.8])
        np.testing.assert_allclose(origin_profile(eta, 1.0), w_plus_series(0.0, 0.0, eta, 1.0), rtol=1e-12)
        assert np.all(origin_profile(np.linspace(0.0, 5.0, 11), 1.0) > 0)

    def test_tail_amplitude(self):
        """Test the eta -> -infinity amplitude is small but positive"""
        amplitude = origin_tail_amplitude(1.0)
        assert 0 < amplitude < 1e-3
        assert origin_tail_amplitude(0.5) < amplitude

    def test_origin_profile_negative_eta(self):
        """Test positivity for eta >= 0 and the tail bound for eta < 0 on [-10t, 10t]"""
        for t in (0.5, 1.0, 2.0):
            eta = np.linspace(-10.0 * t, 10.0 * t, 401)
            profile = origin_profile(eta, t)
            assert np.all(profile[eta >= 0] > 0)
            assert np.min(profile) >= -origin_tail_amplitude(t) - 1e-15
        assert np.min(origin_profile(np.linspace(-10.0, 0.0, 201), 1.0)) < 0

    def test_oscillation_scan(self):
        """Test the plotted series oscillates with growing amplitude along 2 eta = -beta"""
        scans = oscillation_scan(1.0, 8.0, 400, both_conventions=True)
        assert [scan.convention for scan in scans] == ["half", "direct"]
        scan = scans[0]
        assert scan.factor == "stated"
        assert len(scan.sign_changes) >= 2
        assert 0.3 < scan.sign_changes[0] < 0.6
        assert min(scan.values) < 0

        beta = np.array(scan.beta)
        normalized = np.abs(np.array(scan.normalized))
        assert normalized[beta > 7.0].max() > normalized[(beta > 0.5) & (beta < 1.0)].max()
        expected = (np.array(scan.values) / (calibrate_series_constant() * math.sqrt(math.pi))
                    / np.log(2.0 + beta ** 2))
        np.testing.assert_allclose(scan.normalized, expected)

    def test_weight_along_ray(self):
        """Test the weight itself turns negative once below beta = 8 and again near 8.6"""
        scan = oscillation_scan(1.0, 10.0, 500, factor="heat")[0]
        assert scan.factor == "heat"
        assert len(scan.sign_changes) == 2
        assert 1.55 < scan.sign_changes[0] < 1.75
        assert 8.4 < scan.sign_changes[1] < 8.8

    def test_unknown_factor(self):
        """Test unknown series factors are rejected"""
        with pytest.raises(PartialWeightError):
            w_plus_series(0.0, 0.0, 0.0, 1.0, factor="quarter")
        with pytest.raises(PartialWeightError):
            oscillation_scan(1.0, 8.0, 10, factor="quarter")

    def test_scan_arguments(self):
        """Test a scan needs two steps and a positive range"""
        with pytest.raises(PartialWeightError):
            oscillation_scan(1.0, 8.0, 1)
        with pytest.raises(PartialWeightError):
            oscillation_scan(1.0, 0.0, 10)


class TestSignedDisk:
    """Test cases for the signed-weight toy model"""

    def test_gram(self):
        """Test the monomial Gram matrix is diagonal and positive"""
        demo = signed_disk_demo(8)
        assert demo["diagonal_residual"] < 1e-10
        assert demo["off_diagonal"] < 1e-12
        assert demo["positive"]
        assert demo["diagonal"][0] == pytest.approx(math.pi / 2)


class TestOneDimensional:
    """Test cases for h_t on the line"""

    def setup_method(self):
        """Setup for each test method"""
        self.x = np.linspace(-10.0, 10.0, 401)

    def test_gaussian_at_origin(self):
        """Test (e^{-x^2} * q_1)(0) = 1 / (2 sqrt(5/4))"""
        G = one_dim_transform(self.x, np.exp(-self.x ** 2), 1.0)
        assert complex(G.evaluate(0.0)) == pytest.approx(1.0 / (2.0 * math.sqrt(1.25)), rel=1e-10)
        assert G.branch == "mixed"

    def test_branches(self):
        """Test the branch follows the Fourier support"""
        g = np.exp(-self.x ** 2) * np.exp(-10j * self.x)
        assert one_dim_transform(self.x, g, 0.5).branch == "+"
        assert one_dim_transform(self.x, np.conj(g), 0.5).branch == "-"

    def test_scale(self):
        """Test ||h_t g||^2 = sqrt(2 pi t) ||g||^2"""
        ratios = measure_line_scale([(self.x, np.exp(-self.x ** 2))], 0.5)
        assert ratios[0] == pytest.approx(line_scale_constant(0.5), rel=1e-6)
        assert line_scale_constant(0.5) == pytest.approx(math.sqrt(math.pi))

    def test_invalid_grid(self):
        """Test non-uniform grids and non-positive times are rejected"""
        with pytest.raises(PartialWeightError):
            one_dim_transform(self.x ** 3, np.exp(-self.x ** 2), 1.0)
        with pytest.raises(PartialWeightError):
            one_dim_transform(self.x, np.exp(-self.x ** 2), 0.0)


class TestBracket:
    """Test cases for the bracket on V_t^+"""

    def test_disjoint_spectra(self):
        """Test transforms with disjoint spectral supports pair to zero"""
        F = SeparableHeatTransform(TestDataFactory.create_separable_field(support=(0.5, 1.0), a=0.5), 0.5)
        G = SeparableHeatTransform(TestDataFactory.create_separable_field(support=(1.5, 2.0), a=0.5), 0.5)
        value, trace = vt_plus_pairing(F, G)
        assert value == 0j
        assert trace.values == [0j] * len(trace.radii)

    def test_needs_positive_family(self):
        """Test spectra reaching lambda <= 0 are rejected"""
        F = SeparableHeatTransform(TestDataFactory.create_separable_field(support=(-1.0, 1.0)), 0.5)
        with pytest.raises(PartialWeightError):
            vt_plus_pairing(F, F)

    def test_different_times(self):
        """Test transforms must share t"""
        f = TestDataFactory.create_separable_field()
        with pytest.raises(PartialWeightError):
            vt_plus_pairing(SeparableHeatTransform(f, 0.5), SeparableHeatTransform(f, 1.0))


class TestPartialWeightParams:
    """Test cases for PartialWeightParams validation"""

    def test_defaults(self):
        """Test the default abscissa is on the + side"""
        params = PartialWeightParams(t=1.0)
        assert params.lam == 1.0
        assert params.branch == "+"
        assert params.K == 60

    def test_invalid(self):
        """Test sign, zero abscissa and t are validated"""
        with pytest.raises(ValidationError):
            PartialWeightParams(t=1.0, lam=-1.0)
        with pytest.raises(ValidationError):
            PartialWeightParams(t=1.0, lam=0.0)
        with pytest.raises(ValidationError):
            PartialWeightParams(t=0.0)
        with pytest.raises(ValidationError):
            PartialWeightParams(t=1.0, K=0)
