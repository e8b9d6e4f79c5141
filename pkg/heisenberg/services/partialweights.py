"""
Partial Weight Service - the signed weights W_t^+ and W_t^- on the complexified group

W_t^+ is the contour integral over Lambda = lam + i s/2, lam > 0,

    W_t^+(z, w, zeta) = (1/2 pi) int e^{2t Lambda^2} e^{-Lambda(2 eta + gamma)} 4^n p_2t^Lambda(2y, 2v) ds,

with eta = Im zeta and gamma = u.y - v.x. The value does not depend on lam or on
Re zeta; the integrand satisfies g(-s) = conj(g(s)), so the value is real. W_t^- is the
same integral on lam < 0 and equals W_t^+ at (-x, -u, -eta). Integrating e^{2 lam eta}
W_t^+ over eta returns the weight of the slice space, which is how the bracket on
V_t^+ is evaluated.

For n = 1 the contour integral has a Hermite series (c = 2 / pi^2 in closed form);
the constant is measured once against the contour and then frozen.
"""

import logging
import math
import threading
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq
from scipy.special import comb, gammaln

from heisenberg.models.params import PartialWeightParams, QuadratureSpec
from heisenberg.models.transform import LineTransform, OscillationScan, PairingTrace
from heisenberg.services.heatkernel import hyperbolic_factors, q_heat_analytic
from heisenberg.services.quadrature import (
    ConvergenceError, TruncationError, check_boundary_decay, check_refinement, chunk_size,
    odd_count, parallel_map, reduce_sum, uniform_rule
)
from heisenberg.services.specfun import hermite_poly_table
from heisenberg.services.twisted import SeparableHeatTransform, weight_gaussian_factor

logger = logging.getLogger(__name__)

REALNESS_TOL = 1e-8
SERIES_CONSTANT = 2.0 / math.pi ** 2
DEFAULT_R_SCHEDULE = (2.0, 3.0, 4.0, 6.0, 8.0)
# Gaussian factor of the Hermite series: e^{-t mu^2} is the weight itself, e^{-mu^2/4} is
# the factor as printed with the series, which is the reading the oscillation plot uses
SERIES_FACTORS = ("heat", "stated")

_calibration_lock = threading.Lock()
_calibrated_constant: Optional[float] = None


class PartialWeightError(Exception):
    """Base exception for partial weight evaluation errors"""
    pass


class ImaginaryResidualError(PartialWeightError):
    """Raised when the contour integral of a real weight has an imaginary part above tolerance"""
    pass


class PathDisagreementError(PartialWeightError):
    """Raised when the contour and reflection evaluations of W_t^- disagree"""
    pass


class SeriesTruncationError(PartialWeightError):
    """Raised when the last retained series term is above tolerance"""
    pass


class BracketConvergenceError(PartialWeightError):
    """Raised when the K_R exhaustion of the bracket does not settle"""
    pass


def _block(a, n: int) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if n == 1 and (a.ndim == 0 or a.shape[-1] != 1):
        return a[..., None]
    if a.shape[-1] != n:
        raise PartialWeightError(f"coordinate block has trailing dimension {a.shape[-1]}, expected {n}")
    return a


def _invariants(y, v, x, u, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """beta = |y|^2 + |v|^2 and gamma = u.y - v.x, broadcast together"""
    y, v, x, u = (_block(a, n) for a in (y, v, x, u))
    beta = np.sum(y * y, axis=-1) + np.sum(v * v, axis=-1)
    gamma = np.sum(u * y, axis=-1) - np.sum(v * x, axis=-1)
    return np.broadcast_arrays(beta, gamma)


def _contour_rule(t: float, lam: float, beta_max: float, quad: QuadratureSpec, n: int) -> Tuple[float, int]:
    """
    Truncation radius and node count of the s-integral

    |integrand| <= e^{2t lam^2 - t s^2/2} (lam + |s|/2)^n e^{(lam + |s|/2) coth(2t lam) beta} / sinh(2t lam)^n,
    so the radius comes from the e^{-t s^2/2} envelope against that linear growth. Poles of
    1/sinh(2t Lambda) sit at Im s = 2 lam, which bounds the spacing.
    """
    a = abs(lam)
    log_term = math.log(10.0 / quad.tol)
    growth = 0.5 * beta_max / math.tanh(2.0 * t * a) + 0.5 * n
    q = 0.5 * t
    radius = quad.radius or (growth + math.sqrt(growth * growth + 4.0 * q * (log_term + growth * growth / (4.0 * q)))) / (2.0 * q)
    spacing = 2.0 * math.pi * a / log_term
    count = odd_count(max(quad.nodes, int(math.ceil(2.0 * radius / spacing)) + 1))
    return radius, count


def _contour_values(beta, shift, t: float, lam: float, quad: QuadratureSpec, n: int = 1,
                    realness_tol: float = REALNESS_TOL) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    (1/2 pi) int e^{2t Lambda^2} e^{-Lambda shift} 4^n p_2t^Lambda(2y, 2v) ds at abscissa lam

    shift is 2 eta + gamma. Returns the real values, the absolute masses
    (1/2 pi) int |integrand| ds that tolerances are measured against and the largest
    imaginary part relative to its mass.

    Raises:
        ConvergenceError: If the every-other-node subsum still disagrees after quad.max_refinements doublings
        ImaginaryResidualError: If the imaginary part exceeds realness_tol times the mass
    """
    beta, shift = np.broadcast_arrays(np.asarray(beta, dtype=float), np.asarray(shift, dtype=float))
    shape = beta.shape
    beta, shift = beta.ravel(), shift.ravel()
    if beta.size == 0:
        return np.zeros(shape), np.zeros(shape), 0.0
    radius, count = _contour_rule(t, lam, float(beta.max()), quad, n)
    scale = 4.0 ** n * (4.0 * math.pi) ** (-n) / (2.0 * math.pi)

    for level in range(quad.max_refinements + 1):
        nodes, weights = uniform_rule(radius, count)
        _, coarse_weights = uniform_rule(radius, (count + 1) // 2)
        Lam = lam + 0.5j * nodes
        sinhc, lcoth = hyperbolic_factors(Lam, 2.0 * t)
        base = np.exp(2.0 * t * Lam * Lam) * sinhc ** n

        fine = np.empty(beta.size, dtype=complex)
        coarse = np.empty(beta.size, dtype=complex)
        mass = np.empty(beta.size)
        block = chunk_size(count)
        for start in range(0, beta.size, block):
            stop = start + block
            integrand = base[None, :] * np.exp(-Lam[None, :] * shift[start:stop, None]
                                               - lcoth[None, :] * beta[start:stop, None])
            fine[start:stop] = reduce_sum(integrand * weights[None, :], axis=1)
            coarse[start:stop] = reduce_sum(integrand[:, ::2] * coarse_weights[None, :], axis=1)
            mass[start:stop] = reduce_sum(np.abs(integrand) * weights[None, :], axis=1)

        mass = np.maximum(mass, 1e-300)
        disagreement = float(np.max(np.abs(fine - coarse) / mass))
        if disagreement <= quad.tol:
            imaginary = float(np.max(np.abs(fine.imag) / mass))
            if imaginary > realness_tol:
                raise ImaginaryResidualError(
                    f"contour integral at lambda={lam} has imaginary residual {imaginary:.3e} "
                    f"(tol {realness_tol:.1e})"
                )
            logger.debug(f"W+ contour: {count} s-nodes on [-{radius:.3g}, {radius:.3g}], gap {disagreement:.2e}")
            return (scale * fine.real).reshape(shape), (scale * mass).reshape(shape), imaginary
        logger.debug(f"W+ contour: refining s-grid, {count} nodes left a gap of {disagreement:.2e}")
        count = 2 * count - 1

    raise ConvergenceError(
        f"W+ contour: s-quadrature did not reach tol {quad.tol:.1e} after {quad.max_refinements} refinements"
    )


def _resolve(t: float, params: Optional[PartialWeightParams], quad: Optional[QuadratureSpec],
             branch: str) -> Tuple[float, QuadratureSpec]:
    if params is None:
        params = PartialWeightParams(t=t, lam=1.0 if branch == "+" else -1.0, branch=branch)
    if params.branch != branch:
        raise PartialWeightError(f"parameters for W{params.branch} passed to W{branch}")
    if not math.isclose(params.t, t):
        raise PartialWeightError(f"parameters carry t={params.t}, evaluation asked for t={t}")
    return params.lam, quad or params.quad


def w_plus_contour(y, v, eta, t: float, params: Optional[PartialWeightParams] = None,
                   quad: Optional[QuadratureSpec] = None, x=0.0, u=0.0, xi=0.0, n: int = 1,
                   realness_tol: float = REALNESS_TOL):
    """
    W_t^+ at (x + iy, u + iv, xi + i eta) by contour quadrature

    xi does not enter the integrand; it is accepted so callers can pass full points.

    Args:
        y, v: Imaginary parts of z and w; trailing axis n (bare arrays for n = 1)
        eta: Imaginary part of the central coordinate
        t: Heat time
        params: Contour abscissa (lam > 0) and s-quadrature
        x, u: Real parts of z and w, entering through u.y - v.x

    Returns:
        Real value, or an array broadcast over the inputs

    Raises:
        ImaginaryResidualError: If the integral is not real within realness_tol
        ConvergenceError: If the s-quadrature does not settle
    """
    lam, quad = _resolve(t, params, quad, "+")
    beta, gamma = _invariants(y, v, x, u, n)
    beta, shift = np.broadcast_arrays(beta, 2.0 * np.asarray(eta, dtype=float) + gamma)
    values, _, _ = _contour_values(beta, shift, t, lam, quad, n, realness_tol)
    return float(values) if values.ndim == 0 else values


def imaginary_residual(y, v, eta, t: float, params: Optional[PartialWeightParams] = None,
                       quad: Optional[QuadratureSpec] = None, x=0.0, u=0.0, n: int = 1) -> float:
    """Largest |Im| of the W_t^+ contour integral relative to its mass, over the inputs"""
    lam, quad = _resolve(t, params, quad, "+")
    beta, gamma = _invariants(y, v, x, u, n)
    beta, shift = np.broadcast_arrays(beta, 2.0 * np.asarray(eta, dtype=float) + gamma)
    _, _, imaginary = _contour_values(beta, shift, t, lam, quad, n, realness_tol=math.inf)
    return imaginary


def _w_minus_contour(y, v, eta, t, lam, quad, x, u, n, realness_tol):
    beta, gamma = _invariants(y, v, x, u, n)
    beta, shift = np.broadcast_arrays(beta, 2.0 * np.asarray(eta, dtype=float) + gamma)
    return _contour_values(beta, shift, t, lam, quad, n, realness_tol)


def w_minus(y, v, eta, t: float, params: Optional[PartialWeightParams] = None,
            quad: Optional[QuadratureSpec] = None, x=0.0, u=0.0, xi=0.0, n: int = 1,
            path: str = "both", tol: float = 1e-8, realness_tol: float = REALNESS_TOL):
    """
    W_t^- by the contour on lam < 0, by reflection W_t^+(-x, -u, -eta), or both

    With path="both" the two evaluations must agree within tol relative to the larger
    contour mass; the contour value is returned.

    Raises:
        PathDisagreementError: If the two paths disagree beyond tol
    """
    if path not in ("both", "contour", "reflection"):
        raise PartialWeightError(f"unknown path {path!r}")
    lam, quad = _resolve(t, params, quad, "-")
    x_arr, u_arr = np.asarray(x, dtype=float), np.asarray(u, dtype=float)
    eta_arr = np.asarray(eta, dtype=float)

    if path == "reflection":
        values = w_plus_contour(y, v, -eta_arr, t, quad=quad, x=-x_arr, u=-u_arr, n=n,
                                params=PartialWeightParams(t=t, lam=-lam, quad=quad),
                                realness_tol=realness_tol)
        return values

    contour, contour_mass, _ = _w_minus_contour(y, v, eta_arr, t, lam, quad, x_arr, u_arr, n, realness_tol)
    if path == "both":
        beta, gamma = _invariants(y, v, -x_arr, -u_arr, n)
        beta, shift = np.broadcast_arrays(beta, -2.0 * eta_arr + gamma)
        reflected, reflected_mass, _ = _contour_values(beta, shift, t, -lam, quad, n, realness_tol)
        scale = np.maximum(contour_mass, reflected_mass)
        disagreement = float(np.max(np.abs(contour - reflected) / scale))
        if disagreement > tol:
            raise PathDisagreementError(
                f"W-: contour and reflection paths disagree by {disagreement:.3e} (tol {tol:.1e})"
            )
    return float(contour) if contour.ndim == 0 else contour


def _tail_constant(abscissa: float, t: float, beta: float, n: int = 1, tol: float = 1e-8) -> float:
    """(1/2 pi) int e^{-t s^2/2} 4^n c_n ((a + |s|/2) / sinh 2ta)^n e^{(a + |s|/2) coth(2ta) beta} ds"""
    coth = 1.0 / math.tanh(2.0 * t * abscissa)
    growth = 0.5 * coth * beta + 0.5 * n
    q = 0.5 * t
    radius = (growth + math.sqrt(growth * growth + 4.0 * q * (math.log(10.0 / tol) + growth * growth / (4.0 * q)))) / (2.0 * q)
    nodes, weights = uniform_rule(radius, 801)
    grow = abscissa + 0.5 * np.abs(nodes)
    log_integrand = (-q * nodes * nodes + n * np.log(grow / math.sinh(2.0 * t * abscissa))
                     + grow * coth * beta)
    scale = 4.0 ** n * (4.0 * math.pi) ** (-n) / (2.0 * math.pi)
    return float(scale * reduce_sum(np.exp(log_integrand) * weights))


def w_plus_tail_bound(eta: float, t: float, lam: float, beta: float, n: int = 1) -> float:
    """
    Upper bound of |W_t^+| at (beta, eta), x = u = 0, from the contour at abscissa lam > 0

    e^{2t lam^2 - 2 eta lam} (1/2 pi) int e^{-t s^2/2} 4^n c_n ((lam + |s|/2) / sinh 2t lam)^n
    e^{(lam + |s|/2) coth(2t lam) beta} ds
    """
    if not lam > 0:
        raise PartialWeightError("the tail bound needs a positive abscissa")
    return math.exp(2.0 * t * lam * lam - 2.0 * eta * lam) * _tail_constant(lam, t, beta, n)


def _evaluation_abscissa(eta: float, t: float, a: float) -> float:
    """Contour abscissa for W_t^+ at eta: a/2 below eta = 0, growing like eta/2t above"""
    return 0.5 * a + max(eta, 0.0) / (2.0 * t)


def _upper_tail(hi: float, t: float, a: float, beta: float, n: int) -> float:
    """Bound of int_hi^inf e^{2a eta} |W_t^+(beta, eta)| d eta from the tail bound"""
    width = 6.0 * math.sqrt(t) + 2.0 * t * a
    etas, weights = uniform_rule(width, 121, center=hi + width)
    bound = [math.exp(2.0 * a * e) * w_plus_tail_bound(e, t, _evaluation_abscissa(e, t, a), beta, n)
             for e in etas]
    return float(reduce_sum(np.array(bound) * weights))


def _reconstruct(beta: np.ndarray, t: float, lam: float, quad: QuadratureSpec, n: int,
                 tol: float, realness_tol: float) -> np.ndarray:
    """e^{-2t lam^2} int e^{2 lam eta} W(beta, eta) d eta for lam > 0 (W+) or lam < 0 (W-)"""
    a = abs(lam)
    sign = 1.0 if lam > 0 else -1.0
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    spacing = min(0.25, 0.25 * math.sqrt(t))
    # domain of the mirrored W+ integrand; W- at eta is W+ at -eta
    lo, hi = -4.0 * max(1.0, t), 4.0 * max(1.0, t)

    for expansion in range(8):
        count = odd_count(int(math.ceil((hi - lo) / spacing)) + 1)
        etas, weights = uniform_rule(0.5 * (hi - lo), count, center=0.5 * (hi + lo))
        _, coarse_weights = uniform_rule(0.5 * (hi - lo), (count + 1) // 2, center=0.5 * (hi + lo))
        samples = np.empty((beta.size, count))
        for j, eta in enumerate(etas):
            abscissa = _evaluation_abscissa(eta, t, a)
            if sign > 0:
                values, _, _ = _contour_values(beta, 2.0 * eta, t, abscissa, quad, n, realness_tol)
            else:
                values, _, _ = _contour_values(beta, -2.0 * eta, t, -abscissa, quad, n, realness_tol)
            samples[:, j] = values
        integrand = samples * np.exp(2.0 * a * etas)[None, :]
        fine = reduce_sum(integrand * weights[None, :], axis=1)
        coarse = reduce_sum(integrand[:, ::2] * coarse_weights[None, :], axis=1)

        # below lo the tilted integrand decays like e^{a eta}
        peak = np.max(np.abs(integrand), axis=1)
        lower = np.abs(integrand[:, 0]) / a
        lower_ok = bool(np.all(np.abs(integrand[:, 0]) <= 0.1 * tol * peak)
                        and np.all(lower <= 0.1 * tol * np.abs(fine)))
        upper = np.array([_upper_tail(hi, t, a, float(b), n) for b in beta])
        upper_ok = bool(np.all(upper <= 0.1 * tol * np.abs(fine)))
        if lower_ok and upper_ok:
            check_refinement(coarse, fine, tol, "reconstruct_weight", scale=np.abs(fine))
            logger.debug(f"reconstruct: eta in [{lo:.3g}, {hi:.3g}], {count} nodes, "
                         f"tails {float(np.max((lower + upper) / np.abs(fine))):.2e} relative")
            return math.exp(-2.0 * t * lam * lam) * fine
        if not lower_ok:
            lo *= 2.0
        if not upper_ok:
            hi *= 2.0
        logger.debug(f"reconstruct: widening eta-domain to [{lo:.3g}, {hi:.3g}]")

    raise TruncationError(f"reconstruct_weight: eta tails still above tol after widening to [{lo:.3g}, {hi:.3g}]")


def reconstruct_weight(y, v, t: float, lam: float, quad: Optional[QuadratureSpec] = None,
                       n: int = 1, tol: float = 1e-6, realness_tol: float = REALNESS_TOL):
    """
    e^{-2t lam^2} int e^{2 eta lam} W_t^{sign lam}(iy, iv, i eta) d eta

    Returns W_t^lam(iy, iv) = 4^n p_2t^lam(2y, 2v). lam > 0 integrates W_t^+, lam < 0
    integrates W_t^-. The eta-domain is widened until the tail bounds, from the contour
    moved to abscissa lam/2 below and lam + eta/2t above, fall below tol/10 of the value.

    Raises:
        TruncationError: If the eta tails do not fall below tolerance
    """
    if lam == 0:
        raise PartialWeightError("reconstruction needs lambda != 0")
    quad = quad or QuadratureSpec(nodes=257, tol=1e-12)
    beta, _ = _invariants(y, v, 0.0, 0.0, n)
    values = _reconstruct(beta.ravel(), t, lam, quad, n, tol, realness_tol).reshape(beta.shape)
    return float(values) if values.ndim == 0 else values


# ---------------------------------------------------------------------------------------
# Hermite series (n = 1)


def _series_terms(beta, eta, t: float, K: int, factor: str = "heat") -> np.ndarray:
    """Terms k = 0..K of the series without the constant c sqrt(pi/t); shape (..., K+1)"""
    beta, eta = np.broadcast_arrays(np.asarray(beta, dtype=float), np.asarray(eta, dtype=float))
    k = np.arange(K + 1)
    mu = (2 * k + 1 + ((2.0 * eta + beta) / t)[..., None]) / 2.0
    root = math.sqrt(t)
    hermite = np.moveaxis(hermite_poly_table(K, -mu * root), 0, -1)  # (..., k, j)
    j = np.arange(K + 1)
    log_ratio = np.log(np.where(beta > 0, beta, 1.0) / root)
    coefficients = np.exp(j * log_ratio[..., None] - gammaln(j + 1))
    coefficients = np.where((beta[..., None] > 0) | (j == 0), coefficients, 0.0)  # (..., j)
    binom = comb(k[:, None], j[None, :])
    shifted = np.zeros_like(binom)
    shifted[:, :-1] = binom[:, 1:]
    products = hermite * coefficients[..., None, :]
    first = np.sum(products * binom, axis=-1)
    second = np.sum(products * shifted, axis=-1)
    decay = t if factor == "heat" else 0.25
    return np.exp(-decay * mu * mu) * (mu * first + (beta / t)[..., None] * second)


def _series(beta, eta, t: float, K: int, tol: float, factor: str = "heat") -> np.ndarray:
    terms = _series_terms(beta, eta, t, K, factor)
    magnitude = reduce_sum(np.abs(terms), axis=-1)
    last = np.abs(terms[..., -1])
    ratio = np.where(magnitude > 0, last / np.where(magnitude > 0, magnitude, 1.0), 0.0)
    if np.any(ratio > tol):
        raise SeriesTruncationError(
            f"Hermite series: last of {K + 1} terms is {float(np.max(ratio)):.2e} of the total (tol {tol:.1e}); raise K"
        )
    return math.sqrt(math.pi / t) * reduce_sum(terms, axis=-1)


def calibrate_series_constant(quad: Optional[QuadratureSpec] = None, force: bool = False) -> float:
    """
    Constant c of the Hermite series, measured once at beta = eta = 0, t = 1

    The series at t = 1 gives W_{1/2}^+, which is compared with the contour at t = 1/2. The
    first call computes and freezes c; later calls read it.
    """
    global _calibrated_constant
    with _calibration_lock:
        if _calibrated_constant is None or force:
            contour = w_plus_contour(0.0, 0.0, 0.0, 0.5, quad=quad or QuadratureSpec(nodes=513, tol=1e-13))
            unit = float(_series(0.0, 0.0, 1.0, 60, 1e-14))
            _calibrated_constant = contour / unit
            logger.info(f"Hermite series constant calibrated: c = {_calibrated_constant:.15g} "
                        f"(closed form {SERIES_CONSTANT:.15g})")
        return _calibrated_constant


def w_plus_series(y, v, eta, t: float, K: int = 60, convention: str = "half",
                  constant: Optional[float] = None, tol: float = 1e-10, factor: str = "heat"):
    """
    Hermite series of the partial weight for n = 1

        c sqrt(pi/t) sum_k e^{-t mu_k^2} [mu_k sum_{j<=k} (beta/sqrt t)^j / j! H_j(-mu_k sqrt t) C(k, j)
                                    + (beta/t) sum_{j<=k-1} (beta/sqrt t)^j / j! H_j(-mu_k sqrt t) C(k, j+1)]

    with mu_k = (2k + 1 + (2 eta + beta)/t)/2. As written the series is W_{t/2}^+
    (convention="half"); convention="direct" evaluates it at 2t and returns W_t^+.
    factor="stated" replaces e^{-t mu_k^2} by the printed e^{-mu_k^2/4}; that variant is
    not the weight and only feeds the oscillation plot.

    Raises:
        SeriesTruncationError: If the k = K term exceeds tol relative to the sum of magnitudes
    """
    if convention not in ("half", "direct"):
        raise PartialWeightError(f"unknown convention {convention!r}")
    if factor not in SERIES_FACTORS:
        raise PartialWeightError(f"unknown series factor {factor!r}")
    beta, _ = _invariants(y, v, 0.0, 0.0, 1)
    series_t = t if convention == "half" else 2.0 * t
    c = calibrate_series_constant() if constant is None else constant
    values = c * _series(beta, eta, series_t, K, tol, factor)
    return float(values) if np.ndim(values) == 0 else values


def _origin_terms_count(eta, t: float, tol: float) -> int:
    lowest = float(np.min(np.asarray(eta, dtype=float)))
    return max(60, int(math.ceil(max(0.0, -lowest / t) + math.sqrt(math.log(10.0 / tol) / t))) + 2)


def origin_profile(eta, t: float, constant: Optional[float] = None, tol: float = 1e-14):
    """
    W_{t/2}^+(0, 0, i eta) from the beta = 0 series, c sqrt(pi/t) sum_k e^{-t mu_k^2} mu_k

    Every term is positive for eta >= 0. For eta << 0 the sum approaches a periodic function
    of eta/t whose amplitude is bounded by origin_tail_amplitude(t).
    """
    eta = np.asarray(eta, dtype=float)
    K = _origin_terms_count(eta, t, tol)
    k = np.arange(K + 1)
    mu = (2 * k + 1 + 2.0 * eta[..., None] / t) / 2.0
    c = calibrate_series_constant() if constant is None else constant
    values = c * math.sqrt(math.pi / t) * reduce_sum(np.exp(-t * mu * mu) * mu, axis=-1)
    return float(values) if values.ndim == 0 else values


def origin_tail_amplitude(t: float, constant: Optional[float] = None, samples: int = 257) -> float:
    """
    max over a of c sqrt(pi/t) |sum_{k in Z} e^{-t (k + 1/2 + a)^2} (k + 1/2 + a)|

    This periodic sum is what origin_profile tends to as eta -> -infinity; it vanishes at
    a = 0 and is of order e^{-pi^2/t}. origin_profile never drops below minus this value.
    The extremum found on the sample grid is polished with brentq on the derivative.
    """
    M = int(math.ceil(math.sqrt(math.log(1e20) / t))) + 2
    k = np.arange(-M, M + 1)

    def periodic(a):
        mu = k + 0.5 + a
        return float(reduce_sum(np.exp(-t * mu * mu) * mu))

    def slope(a):
        mu = k + 0.5 + a
        return float(reduce_sum(np.exp(-t * mu * mu) * (1.0 - 2.0 * t * mu * mu)))

    step = 1.0 / samples
    a = step * np.arange(samples)
    sums = np.array([periodic(x) for x in a])
    best = float(a[int(np.argmax(np.abs(sums)))])
    peak = abs(periodic(best))
    lo, hi = best - step, best + step
    if slope(lo) * slope(hi) < 0:
        peak = max(peak, abs(periodic(brentq(slope, lo, hi, xtol=1e-14))))
    c = calibrate_series_constant() if constant is None else constant
    return float(c * math.sqrt(math.pi / t) * peak)


def _sign_changes(beta: np.ndarray, values: np.ndarray) -> List[float]:
    crossings = []
    for i in range(len(values) - 1):
        a, b = values[i], values[i + 1]
        if a == 0.0 and i > 0:
            crossings.append(float(beta[i]))
        elif a * b < 0:
            crossings.append(float(beta[i] + (beta[i + 1] - beta[i]) * a / (a - b)))
    return crossings


def oscillation_scan(t: float, beta_max: float, steps: int, K: int = 60,
                     both_conventions: bool = False, factor: str = "stated") -> List[OscillationScan]:
    """
    Hermite series along the ray 2 eta = -beta for beta in [0, beta_max]

    The normalized column drops the factor c sqrt(pi) and divides by log(2 + beta^2).
    Returns one scan for the W_{t/2}^+ reading of the series and, with both_conventions,
    a second one for W_t^+.

    The default factor="stated" samples the series with its printed Gaussian e^{-mu_k^2/4},
    which oscillates with growing period and amplitude (crossings near beta = 0.45, 0.95,
    2.75, 4.0, 6.3 at t = 1). With factor="heat" the scan follows the weight itself, whose
    only crossings below beta = 10 at t = 1 are near 1.63 and 8.6.
    """
    if steps < 2:
        raise PartialWeightError("a scan needs at least two steps")
    if not beta_max > 0:
        raise PartialWeightError("beta_max must be positive")
    if factor not in SERIES_FACTORS:
        raise PartialWeightError(f"unknown series factor {factor!r}")
    beta = np.linspace(0.0, beta_max, steps)
    c = calibrate_series_constant()
    conventions = ["half", "direct"] if both_conventions else ["half"]

    def scan(convention: str) -> OscillationScan:
        values = w_plus_series(np.sqrt(beta), 0.0, -0.5 * beta, t, K, convention, constant=c, factor=factor)
        normalized = values / (c * math.sqrt(math.pi)) / np.log(2.0 + beta * beta)
        crossings = _sign_changes(beta, normalized)
        logger.info(f"oscillation scan ({convention}, {factor}, t={t}): {len(crossings)} sign changes in [0, {beta_max}]")
        return OscillationScan(t=t, convention=convention, factor=factor, beta=beta.tolist(), values=values.tolist(),
                               normalized=normalized.tolist(), sign_changes=crossings)

    return parallel_map(scan, conventions)


def pde_residual(y, v, eta, t: float, h: float = 1e-3, params: Optional[PartialWeightParams] = None) -> float:
    """
    Central-difference residual of 2 dU/dt = (Laplacian_{(y,v)} + (1 - beta) d^2/d eta^2) U

    U = W_t^+(iy, iv, i eta), n = 1. Every stencil point uses the same s-grid; the residual
    is relative to the sum of the magnitudes of the three terms.
    """
    if not h > 0:
        raise PartialWeightError("step h must be positive")
    params = params or PartialWeightParams(t=t, quad=QuadratureSpec(nodes=513, tol=1e-13))
    lam = params.lam
    beta = float(y * y + v * v)
    radius, count = _contour_rule(t - h, lam, (abs(y) + h) ** 2 + (abs(v) + h) ** 2, params.quad, 1)
    quad = params.quad.model_copy(update={"radius": radius, "nodes": count})

    def U(yy, vv, ee, tt):
        values, _, _ = _contour_values(yy * yy + vv * vv, 2.0 * ee, tt, lam, quad, 1)
        return float(values)

    center = U(y, v, eta, t)
    time_term = 2.0 * (U(y, v, eta, t + h) - U(y, v, eta, t - h)) / (2.0 * h)
    laplacian = ((U(y + h, v, eta, t) - 2.0 * center + U(y - h, v, eta, t))
                 + (U(y, v + h, eta, t) - 2.0 * center + U(y, v - h, eta, t))) / (h * h)
    central = (1.0 - beta) * (U(y, v, eta + h, t) - 2.0 * center + U(y, v, eta - h, t)) / (h * h)
    scale = abs(time_term) + abs(laplacian) + abs(central)
    return abs(time_term - laplacian - central) / max(scale, 1e-300)


def signed_disk_demo(max_degree: int = 8) -> Dict[str, object]:
    """
    Monomials on the unit disk against W = 1 on 1/2 <= |z| < 1 and -1 on |z| < 1/2

    <z^m, z^n> = 2 pi delta_{mn} int_0^1 r^{2n+1} W dr = delta_{mn} (pi/(n+1)) (1 - (1/2)^{2n+1}).
    Radial integrals use Gauss-Legendre on each piece, exact for these polynomials; the
    angular trapezoid is exact for the frequencies involved.
    """
    nodes, weights = np.polynomial.legendre.leggauss(max_degree + 2)
    inner_r, inner_w = 0.25 * (nodes + 1.0), 0.25 * weights
    outer_r, outer_w = 0.5 + 0.25 * (nodes + 1.0), 0.25 * weights
    radii = np.concatenate([inner_r, outer_r])
    radial_weights = np.concatenate([-inner_w, outer_w])
    angles = 2 * max_degree + 2
    theta = 2.0 * math.pi * np.arange(angles) / angles

    degrees = np.arange(max_degree + 1)
    gram = np.empty((max_degree + 1, max_degree + 1), dtype=complex)
    for m in degrees:
        for k in degrees:
            radial = reduce_sum(radii ** (m + k + 1) * radial_weights)
            angular = reduce_sum(np.exp(1j * (m - k) * theta)) * 2.0 * math.pi / angles
            gram[m, k] = radial * angular

    expected = math.pi / (degrees + 1) * (1.0 - 0.5 ** (2 * degrees + 1))
    diagonal = np.diag(gram).real
    off = np.abs(gram - np.diag(np.diag(gram)))
    return {
        "gram": gram,
        "diagonal": diagonal,
        "expected": expected,
        "diagonal_residual": float(np.max(np.abs(diagonal - expected) / expected)),
        "off_diagonal": float(off.max()),
        "constants": diagonal / (math.pi / (degrees + 1)),
        "positive": bool(np.all(diagonal > 0)),
    }


# ---------------------------------------------------------------------------------------
# One-dimensional layer


def _branch(x: np.ndarray, values: np.ndarray, h: float, threshold: float = 1e-8) -> str:
    """Half-line carrying int e^{i lam x} g(x) dx, by spectral mass on each side"""
    lam = np.linspace(-math.pi / h, math.pi / h, 401)
    spectrum = np.exp(1j * lam[:, None] * x[None, :]) @ values * h
    power = np.abs(spectrum) ** 2
    negative = float(reduce_sum(power[lam < 0]))
    positive = float(reduce_sum(power[lam > 0]))
    total = negative + positive
    if total == 0 or negative <= threshold * total:
        return "+"
    if positive <= threshold * total:
        return "-"
    return "mixed"


def one_dim_transform(x, values, t: float, tol: float = 1e-8) -> LineTransform:
    """
    h_t(g) = (g * q_t) continued to C, for g sampled on a uniform grid x

    The grid sum is checked against its doubled-spacing subsum at check points placed
    symmetrically about the real axis, relative to sum_j |w_j q_t(z - x_j)|: a branch that
    is exponentially small on one side of the axis can only be resolved to that scale.

    Raises:
        TruncationError: If g has not decayed at the ends of the grid
        ConvergenceError: If the refinement check fails
    """
    if not t > 0:
        raise PartialWeightError("t must be positive")
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=complex)
    if x.ndim != 1 or x.shape != values.shape or x.size < 3:
        raise PartialWeightError("g must be sampled on a one-dimensional grid of at least 3 nodes")
    h = float(x[1] - x[0])
    if not np.allclose(np.diff(x), h, rtol=1e-9, atol=0.0):
        raise PartialWeightError("g must be sampled on a uniform grid")
    check_boundary_decay(values, "one_dim_transform")
    weights = values * h
    coarse_weights = np.where(np.arange(x.size) % 2 == 0, 2.0 * weights, 0.0)

    def evaluate(z, _weights=weights):
        z = np.asarray(z, dtype=complex)
        kernel = q_heat_analytic(z[..., None] - x, t)
        return kernel @ _weights

    offsets = np.array([0.0, 0.5 + 0.5j, 0.5 - 0.5j, -0.7 + 0.3j, -0.7 - 0.3j])
    points = offsets + 0.5 * (x[0] + x[-1])
    fine = evaluate(points)
    coarse = evaluate(points, coarse_weights)
    magnitude = np.abs(q_heat_analytic(points[:, None] - x, t)) @ np.abs(weights)
    check_refinement(coarse, fine, tol, "one_dim_transform", scale=float(np.max(magnitude)) or 1.0)
    norm_squared = float(reduce_sum(np.abs(values) ** 2) * h)
    return LineTransform(t=t, branch=_branch(x, values, h), source_norm_squared=norm_squared,
                         evaluator=evaluate)


def one_dim_bergman_norm(G: LineTransform, quad: Optional[QuadratureSpec] = None) -> float:
    """
    int |G(x + iy)|^2 e^{-y^2/2t} dx dy over a box

    Raises:
        TruncationError: If the density has not decayed on the box faces
        ConvergenceError: If the doubled-spacing sub-box disagrees beyond quad.tol
    """
    quad = quad or QuadratureSpec(nodes=241, radius=12.0, tol=1e-8)
    radius = quad.radius or 12.0
    axis, weights = uniform_rule(radius, odd_count(quad.nodes))
    _, coarse_weights = uniform_rule(radius, (odd_count(quad.nodes) + 1) // 2)
    X, Y = np.meshgrid(axis, axis, indexing='ij')
    density = np.abs(G.evaluate(X + 1j * Y)) ** 2 * np.exp(-Y * Y / (2.0 * G.t))
    check_boundary_decay(density, "one_dim_bergman_norm")
    fine = float(reduce_sum(density * np.outer(weights, weights)))
    coarse = float(reduce_sum(density[::2, ::2] * np.outer(coarse_weights, coarse_weights)))
    check_refinement(coarse, fine, quad.tol, "one_dim_bergman_norm", scale=fine)
    return fine


def line_scale_constant(t: float) -> float:
    """||h_t g||^2 / ||g||^2 = sqrt(2 pi t) for every g"""
    return math.sqrt(2.0 * math.pi * t)


def measure_line_scale(samples: Sequence[Tuple[np.ndarray, np.ndarray]], t: float,
                       quad: Optional[QuadratureSpec] = None) -> List[float]:
    """Measured ||h_t g||^2 / ||g||^2 for each (x, values) sample"""
    def ratio(sample):
        G = one_dim_transform(sample[0], sample[1], t)
        return one_dim_bergman_norm(G, quad) / G.source_norm_squared

    return parallel_map(ratio, list(samples))


# ---------------------------------------------------------------------------------------
# The bracket on V_t^+


def _weight_table(lams: np.ndarray, beta_cut: float, table_nodes: int, t: float, quad: QuadratureSpec, tol: float) -> List[CubicSpline]:
    """Splines of log reconstruct_weight in beta on [0, beta_cut], one per lambda node"""
    betas = np.linspace(0.0, beta_cut, table_nodes)

    def table(lam):
        values = _reconstruct(betas, t, float(lam), quad, 1, tol, REALNESS_TOL)
        if np.any(values <= 0):
            raise PartialWeightError(f"reconstructed weight is not positive at lambda={lam}")
        return CubicSpline(betas, np.log(values))

    return parallel_map(table, list(lams))


def vt_plus_pairing(F: SeparableHeatTransform, G: SeparableHeatTransform,
                    R_schedule: Sequence[float] = DEFAULT_R_SCHEDULE,
                    quad: Optional[QuadratureSpec] = None, tol: float = 1e-3,
                    spectral_nodes: int = 16, table_nodes: int = 25) -> Tuple[complex, PairingTrace]:
    """
    <F, G>_+ = lim_R int_{K_R} F conj(G) W_t^+ over K_R = B_R x B_R x C, n = 1

    Both transforms come from separable f = G (x) phi with phi_hat supported in (0, inf).
    The xi-integral is taken by Plancherel, which leaves for each lambda

        |phi_hat(lam)|^2 e^{-2t lam^2} int e^{2 lam eta} W_t^+(z, w, i eta) d eta,

    and the eta-integral is computed from W_t^+ itself on a beta-table. The remaining
    integral over B_R x B_R is a trapezoid sum over a box of radius max(R_schedule).

    Returns:
        Tuple of (value on the largest R, PairingTrace over R_schedule)

    Raises:
        PartialWeightError: If F or G is not in the positive family or n != 1
        BracketConvergenceError: If the trace has not settled within tol
    """
    if F.f.n != 1 or G.f.n != 1:
        raise PartialWeightError("the bracket is implemented for n = 1")
    if not math.isclose(F.t, G.t):
        raise PartialWeightError(f"transforms of different times {F.t} and {G.t}")
    if not (F.f.in_positive_family and G.f.in_positive_family):
        raise PartialWeightError("the bracket on V_t^+ needs phi_hat supported in (0, inf)")
    radii = sorted(float(r) for r in R_schedule)
    t = F.t
    box = radii[-1]
    quad = quad or QuadratureSpec(nodes=49, radius=box, tol=tol)

    low = min(F.f.spectral_support[0], G.f.spectral_support[0])
    high = max(F.f.spectral_support[1], G.f.spectral_support[1])
    step = (high - low) / spectral_nodes
    lams = low + step * (np.arange(spectral_nodes) + 0.5)
    products = F.f.phi_hat(lams) * np.conj(G.f.phi_hat(lams)) * step / (2.0 * math.pi)
    active = np.nonzero(products != 0)[0]
    if active.size == 0:
        trace = PairingTrace(radii=radii, values=[0j] * len(radii), tol=tol)
        return 0j, trace
    lams, products = lams[active], products[active]
    F_spatial = [F.spatial(float(lam)) for lam in lams]
    G_spatial = F_spatial if G is F else [G.spatial(float(lam)) for lam in lams]

    axis = np.linspace(-box, box, odd_count(quad.nodes))
    h = axis[1] - axis[0]
    m = len(axis)
    uu, vv = np.meshgrid(axis, axis, indexing='ij')
    u_flat, v_flat = uu.ravel(), vv.ravel()
    ws = u_flat + 1j * v_flat
    w_norm2 = u_flat ** 2 + v_flat ** 2

    def densities(j, weight_of):
        y = axis[j]
        zs = axis + 1j * y
        beta = y * y + v_flat * v_flat
        out = []
        for k, lam in enumerate(lams):
            left = F_spatial[k].evaluate_product(zs, ws)
            right = left if G is F else G_spatial[k].evaluate_product(zs, ws)
            tilt = np.exp(-lam * (u_flat[None, :] * y - v_flat[None, :] * axis[:, None]))
            out.append(products[k] * left * np.conj(right) * tilt * weight_of(k, lam, beta)[None, :])
        return reduce_sum(np.stack(out), axis=0)

    # size the beta-table where the density is still visible, using the closed-form weight
    def profile(j):
        density = np.abs(densities(j, lambda k, lam, beta: weight_gaussian_factor(t, lam, np.sqrt(beta), 0.0)))
        beta = axis[j] ** 2 + v_flat ** 2
        return beta, density.max(axis=0)

    profiles = parallel_map(profile, range(m))
    peak = max(float(p[1].max()) for p in profiles)
    visible = [float(p[0][p[1] >= 1e-3 * tol * peak].max(initial=0.0)) for p in profiles]
    beta_cut = min(2.0 * box * box, 1.25 * max(visible) + 1.0)
    splines = _weight_table(lams, beta_cut, table_nodes, t,
                            QuadratureSpec(nodes=257, tol=1e-12), 1e-6)

    def table_weight(k, lam, beta):
        inside = beta <= beta_cut
        return np.where(inside, np.exp(splines[k](np.minimum(beta, beta_cut))), 0.0)

    def tile(j):
        density = densities(j, table_weight)
        z_norm2 = axis ** 2 + axis[j] ** 2
        partial = []
        for R in radii:
            mask = (z_norm2[:, None] < R * R) & (w_norm2[None, :] < R * R)
            partial.append(reduce_sum(np.where(mask, density, 0.0)))
        even = np.arange(m) % 2 == 0
        coarse = reduce_sum(density[::2][:, (even[:, None] & even[None, :]).ravel()]) if j % 2 == 0 else 0j
        return np.array(partial), reduce_sum(density), coarse

    results = parallel_map(tile, range(m))
    values = reduce_sum(np.stack([r[0] for r in results]), axis=0) * h ** 4
    full = complex(reduce_sum(np.array([r[1] for r in results])) * h ** 4)
    coarse = complex(reduce_sum(np.array([r[2] for r in results])) * (2.0 * h) ** 4)
    check_refinement(coarse, full, tol, "vt_plus_pairing", scale=abs(full) or 1.0)

    trace = PairingTrace(radii=radii, values=[complex(v) for v in values], tol=tol)
    gaps = trace.gaps()
    tail = [g for g in gaps[-3:] if g > 1e-3 * tol]
    if not trace.converged or any(b > a for a, b in zip(tail, tail[1:])):
        raise BracketConvergenceError(
            f"K_R trace has not settled: gaps {', '.join(f'{g:.2e}' for g in gaps)} (tol {tol:.1e})"
        )
    logger.info(f"vt_plus_pairing: value {trace.value:.6g} over R in {radii}")
    return trace.value, trace
