"""
Test fixtures and data for the heat kernel toolkit tests
"""

import math
from typing import Callable, List, Optional, Sequence

import numpy as np

from heisenberg.models.field import Lattice, SampledField, SeparableField
from heisenberg.models.group import ComplexGroupPoint, GroupPoint
from heisenberg.models.params import HeatParams, QuadratureSpec
from heisenberg.models.report import SuiteReport, ToleranceConfig, VerificationReport


class TestDataFactory:
    """Factory for creating test data"""

    @staticmethod
    def create_group_point(x: Sequence[float] = (0.3,), u: Sequence[float] = (-0.2,),
                           xi: float = 0.1) -> GroupPoint:
        """Create a real group point"""
        return GroupPoint(x=list(x), u=list(u), xi=xi)

    @staticmethod
    def create_complex_point(z: Sequence[complex] = (0.3 + 0.4j,), w: Sequence[complex] = (-0.2 + 0.1j,),
                             zeta: complex = 0.1 - 0.2j) -> ComplexGroupPoint:
        """Create a point of the complexified group"""
        return ComplexGroupPoint(z=list(z), w=list(w), zeta=zeta)

    @staticmethod
    def create_lattice(radius: float = 6.0, count: int = 49, ndim: int = 2) -> Lattice:
        """Create a symmetric lattice with equal axes"""
        return Lattice.symmetric([radius] * ndim, [count] * ndim)

    @staticmethod
    def create_gaussian_field(a: float = 1.0, radius: float = 6.0, count: int = 49,
                              n: int = 1, group: bool = False) -> SampledField:
        """exp(-a |p|^2) sampled on R^{2n} (or R^{2n+1} with group=True), with its evaluator"""
        ndim = 2 * n + 1 if group else 2 * n

        def evaluate(*coords):
            return np.exp(-a * sum(np.asarray(c, dtype=float) ** 2 for c in coords))

        lattice = TestDataFactory.create_lattice(radius, count, ndim)
        return SampledField.from_function(evaluate, lattice, n)

    @staticmethod
    def create_bump_spectrum(low: float, high: float) -> Callable:
        """Smooth bump supported on (low, high) with peak 1"""
        center, half = 0.5 * (low + high), 0.5 * (high - low)

        def spectrum(lam):
            lam = np.asarray(lam, dtype=float)
            d = half ** 2 - (lam - center) ** 2
            inside = d > 0
            return np.where(inside, np.exp(1.0 / half ** 2 - 1.0 / np.where(inside, d, 1.0)), 0.0)

        return spectrum

    @staticmethod
    def create_separable_field(support: Sequence[float] = (0.5, 1.5), a: float = 1.0) -> SeparableField:
        """Gaussian spatial factor times a phi with compactly supported spectrum"""
        spatial = TestDataFactory.create_gaussian_field(a=a, radius=6.0, count=49)
        return SeparableField(spatial=spatial,
                              spectrum=TestDataFactory.create_bump_spectrum(*support),
                              spectral_support=list(support), gaussian_width=a)

    @staticmethod
    def create_heat_params(t: float = 1.0, n: int = 1) -> HeatParams:
        """Create heat parameters"""
        return HeatParams(n=n, t=t)

    @staticmethod
    def create_quadrature_spec(nodes: int = 64, tol: float = 1e-10,
                               radius: Optional[float] = None) -> QuadratureSpec:
        """Create a uniform quadrature spec"""
        return QuadratureSpec(nodes=nodes, tol=tol, radius=radius)

    @staticmethod
    def create_report(identity_name: str = "group.associativity", residual: float = 1e-14,
                      tolerance: float = 1e-12, wall_time: float = 0.0) -> VerificationReport:
        """Create a verification report; the pass flag follows from residual and tolerance"""
        return VerificationReport(identity_name=identity_name, anchor="associativity of the group law",
                                  params={"n": 1}, residual=residual, tolerance=tolerance,
                                  wall_time=wall_time)

    @staticmethod
    def create_suite_report(suite: str = "group", residuals: Optional[List[float]] = None) -> SuiteReport:
        """Create a suite report with one identity per residual, all at tolerance 1e-6"""
        residuals = residuals if residuals is not None else [1e-9, 1e-8]
        reports = [TestDataFactory.create_report(f"{suite}.identity_{k}", r, 1e-6)
                   for k, r in enumerate(residuals)]
        return SuiteReport(suite=suite, reports=reports)

    @staticmethod
    def create_tolerance_config(overrides: Optional[dict] = None) -> ToleranceConfig:
        """Create a small tolerance configuration"""
        return ToleranceConfig(
            defaults={"group.associativity": 1e-12, "kernels.k_semigroup": 1e-4},
            overrides=overrides or {},
        )

    @staticmethod
    def gaussian_mass(a: float, dims: int) -> float:
        """int exp(-a |p|^2) over R^dims"""
        return (math.pi / a) ** (dims / 2.0)
