"""
Heat Kernel Service - heat kernels of the Heisenberg group and their continuations

k_t on the group is the spectral integral

    k_t(z, w, zeta) = (c_n / 2 pi) int e^{-i lam zeta} e^{-t lam^2} (lam / sinh lam t)^n
                      e^{-(lam / 4) coth(lam t) (z.z + w.w)} d lam,

which is entire in (z, w, zeta); the same routine evaluates real points and the holomorphic
continuation. The twisted kernel p_t^lam and the line kernel q_t have closed forms.
"""

import logging
import math
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from heisenberg.models.field import Lattice, SampledField
from heisenberg.models.group import ComplexGroupPoint, GroupPoint
from heisenberg.models.params import HeatParams, QuadratureSpec, SpectralParam
from heisenberg.services.quadrature import (
    ConvergenceError, check_boundary_decay, chunk_size, odd_count, reduce_sum, uniform_rule
)
from heisenberg.services.specfun import laguerre_poly

logger = logging.getLogger(__name__)

# |lam t| below this switches to the Taylor branch of lam/sinh and lam coth
SERIES_THRESHOLD = 1e-4
# lam t closer than this to i pi Z \ {0} is a pole of 1/sinh
POLE_DISTANCE = 1e-8

LambdaLike = Union[float, complex, SpectralParam]


class HeatKernelError(Exception):
    """Base exception for heat kernel evaluation errors"""
    pass


class SingularityError(HeatKernelError):
    """Raised when an evaluation point sits on a pole of the closed form"""
    pass


def _lambda_value(lam: LambdaLike):
    if isinstance(lam, SpectralParam):
        return lam.value if not lam.is_real else lam.lam
    return lam


def _check_poles(arg: np.ndarray) -> None:
    if not np.iscomplexobj(arg):
        return
    k = np.rint(arg.imag / math.pi)
    distance = np.abs(arg - 1j * math.pi * k)
    hit = (k != 0) & (distance < POLE_DISTANCE)
    if np.any(hit):
        bad = complex(np.asarray(arg)[hit].ravel()[0])
        raise SingularityError(f"lambda*t = {bad} is a pole of 1/sinh (distance {float(distance[hit].min()):.1e})")


def hyperbolic_factors(lam, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    (lam / sinh(lam t), lam coth(lam t)) for real or complex lam, elementwise

    Both are even in lam and regular at lam = 0, where a Taylor branch takes over.
    Large |Re(lam t)| is handled through e^{-2a} so nothing overflows.

    Raises:
        SingularityError: If lam t lies on i pi Z \\ {0}
    """
    lam = np.asarray(lam)
    dtype = complex if np.iscomplexobj(lam) else float
    lam = lam.astype(dtype)
    arg = lam * t
    _check_poles(arg)

    small = np.abs(arg) < SERIES_THRESHOLD
    sign = np.where(np.real(arg) < 0, -1.0, 1.0)
    folded = np.where(small, 1.0, arg * sign)
    decay = np.exp(-2.0 * folded)
    denominator = 1.0 - decay
    lam_safe = np.where(small, 1.0, lam)
    sinhc = sign * 2.0 * lam_safe * np.exp(-folded) / denominator
    lcoth = sign * lam_safe * (1.0 + decay) / denominator

    if np.any(small):
        a2 = arg * arg
        sinhc = np.where(small, (1.0 - a2 / 6.0 + 7.0 * a2 * a2 / 360.0) / t, sinhc)
        lcoth = np.where(small, (1.0 + a2 / 3.0 - a2 * a2 / 45.0) / t, lcoth)
    return sinhc, lcoth


def _squared_norm(a, n: int):
    """a.a without conjugation; trailing axis n, bare arrays accepted for n = 1"""
    a = np.asarray(a)
    if n == 1 and (a.ndim == 0 or a.shape[-1] != 1):
        return a * a
    if a.shape[-1] != n:
        raise HeatKernelError(f"coordinate block has trailing dimension {a.shape[-1]}, expected {n}")
    return np.sum(a * a, axis=-1)


def _lambda_radius(t: float, growth: float, tol: float) -> float:
    """R with e^{-t R^2 + growth R} below tol/10 of the envelope peak e^{growth^2/4t}"""
    log_term = math.log(10.0 / tol) + growth * growth / (4.0 * t)
    return (growth + math.sqrt(growth * growth + 4.0 * t * log_term)) / (2.0 * t)


def lambda_rule(t: float, growth: float, quad: QuadratureSpec) -> Tuple[float, int]:
    """
    Truncation radius and starting node count of the lambda-integral

    The radius comes from the e^{-t lam^2} envelope against the linear growth `growth`;
    the spacing from the distance pi/t of the nearest pole of 1/sinh(lam t).
    """
    radius = quad.radius or _lambda_radius(t, growth, quad.tol)
    strip = 0.5 * math.pi / t
    spacing = 2.0 * math.pi * strip / math.log(10.0 / quad.tol)
    count = odd_count(max(quad.nodes, int(math.ceil(2.0 * radius / spacing)) + 1))
    return radius, count


def heat_kernel_values(r2, zeta, t: float, n: int = 1,
                       quad: Optional[QuadratureSpec] = None) -> np.ndarray:
    """
    k_t at many points given r2 = z.z + w.w and zeta (real or complex, broadcastable)

    The trapezoid sum is compared with its every-other-node subsum; the node count is
    doubled until they agree within quad.tol relative to the largest value.

    Raises:
        ConvergenceError: If quad.max_refinements doublings do not reach quad.tol
    """
    quad = quad or QuadratureSpec()
    r2, zeta = np.broadcast_arrays(np.asarray(r2), np.asarray(zeta))
    shape = r2.shape
    r2 = r2.astype(complex).ravel()
    zeta = zeta.astype(complex).ravel()
    if r2.size == 0:
        return np.zeros(shape, dtype=complex)

    growth = float(np.max(np.abs(zeta.imag))) + max(0.0, -float(np.min(r2.real))) / 4.0
    radius, count = lambda_rule(t, growth, quad)
    prefactor = (4.0 * math.pi) ** (-n) / (2.0 * math.pi)

    for level in range(quad.max_refinements + 1):
        nodes, weights = uniform_rule(radius, count)
        _, coarse_weights = uniform_rule(radius, (count + 1) // 2)
        sinhc, lcoth = hyperbolic_factors(nodes, t)
        base = np.exp(-t * nodes * nodes) * sinhc ** n

        fine = np.empty(r2.size, dtype=complex)
        coarse = np.empty(r2.size, dtype=complex)
        block = chunk_size(count)
        for start in range(0, r2.size, block):
            stop = start + block
            exponent = -1j * zeta[start:stop, None] * nodes[None, :] - 0.25 * r2[start:stop, None] * lcoth[None, :]
            integrand = base[None, :] * np.exp(exponent)
            fine[start:stop] = reduce_sum(integrand * weights[None, :], axis=1)
            coarse[start:stop] = reduce_sum(integrand[:, ::2] * coarse_weights[None, :], axis=1)

        scale = float(np.max(np.abs(fine))) or 1.0
        disagreement = float(np.max(np.abs(fine - coarse))) / scale
        if disagreement <= quad.tol:
            logger.debug(f"k_t: {count} lambda nodes on [-{radius:.3g}, {radius:.3g}], "
                         f"refinement gap {disagreement:.2e}")
            return (prefactor * fine).reshape(shape)
        logger.debug(f"k_t: refining lambda grid, {count} nodes left a gap of {disagreement:.2e}")
        count = 2 * count - 1

    raise ConvergenceError(
        f"k_t: lambda quadrature did not reach tol {quad.tol:.1e} after {quad.max_refinements} refinements"
    )


def k_heat(p: GroupPoint, params: HeatParams, quad: Optional[QuadratureSpec] = None) -> float:
    """Heat kernel k_t at a real group point; real and positive"""
    x, u, xi = p.arrays()
    if len(x) != params.n:
        raise HeatKernelError(f"point of dimension {len(x)} for kernel of dimension {params.n}")
    r2 = float(np.dot(x, x) + np.dot(u, u))
    return float(heat_kernel_values(r2, xi, params.t, params.n, quad).real)


def k_heat_analytic(c: ComplexGroupPoint, params: HeatParams, quad: Optional[QuadratureSpec] = None) -> complex:
    """Holomorphic continuation of k_t to the complexified group"""
    z, w, zeta = c.arrays()
    if len(z) != params.n:
        raise HeatKernelError(f"point of dimension {len(z)} for kernel of dimension {params.n}")
    r2 = complex(np.sum(z * z) + np.sum(w * w))
    return complex(heat_kernel_values(r2, zeta, params.t, params.n, quad))


def heat_kernel_field(lattice: Lattice, params: HeatParams,
                      quad: Optional[QuadratureSpec] = None) -> SampledField:
    """k_t sampled on a (2n+1)-axis lattice, keeping the exact evaluator for convolutions"""
    n, t = params.n, params.t

    def evaluate(*coords):
        r2 = sum(np.asarray(c) ** 2 for c in coords[:2 * n])
        return heat_kernel_values(r2, coords[-1], t, n, quad)

    return SampledField.from_function(evaluate, lattice, n, t=t)


def p_twisted(lam: LambdaLike, t: float, y, v, n: int = 1):
    """
    Twisted heat kernel c_n (lam / sinh t lam)^n e^{-(lam/4) coth(lam t)(|y|^2 + |v|^2)}

    lam = 0 evaluates the Gaussian limit (4 pi t)^{-n} e^{-(|y|^2+|v|^2)/4t}. A SpectralParam
    with s != 0 evaluates at lam + i s/2 and gives complex values.
    """
    if t <= 0:
        raise HeatKernelError("t must be positive")
    value = _lambda_value(lam)
    if value == 0:
        logger.debug("p_t^lambda at lambda = 0: removable singularity, Gaussian limit")
    r2 = _squared_norm(y, n) + _squared_norm(v, n)
    sinhc, lcoth = hyperbolic_factors(value, t)
    result = (4.0 * math.pi) ** (-n) * sinhc ** n * np.exp(-0.25 * lcoth * r2)
    if np.ndim(result) == 0:
        return complex(result) if np.iscomplexobj(result) else float(result)
    return result


def p_twisted_complex(lam_c: complex, t: float, z, w, n: int = 1):
    """
    Continuation of p_t^lam in both lam and the arguments: r^2 = z.z + w.w (no conjugation)

    Raises:
        SingularityError: If t lam_c lies on a pole of 1/sinh
    """
    r2 = _squared_norm(np.asarray(z, dtype=complex), n) + _squared_norm(np.asarray(w, dtype=complex), n)
    sinhc, lcoth = hyperbolic_factors(np.asarray(lam_c, dtype=complex), t)
    return (4.0 * math.pi) ** (-n) * sinhc ** n * np.exp(-0.25 * lcoth * r2)


def p_twisted_laguerre(lam: float, t: float, y, v, n: int = 1, K: Optional[int] = None,
                       tol: float = 1e-14):
    """
    Laguerre expansion (2 pi)^{-n} |lam|^n sum_k e^{-(2k+n)|lam| t} L_k^{n-1}(|lam| R^2/2) e^{-|lam| R^2/4}

    Without K the sum runs until binom(k+n-1, k) e^{-(2k+n)|lam| t}, which bounds the k-th
    term, falls below tol.
    """
    if lam == 0:
        raise HeatKernelError("the Laguerre expansion needs lambda != 0")
    a = abs(lam)
    r2 = _squared_norm(y, n) + _squared_norm(v, n)
    x = a * np.asarray(r2, dtype=float) / 2.0
    if K is None:
        K = 0
        while math.comb(K + n - 1, K) * math.exp(-(2 * K + n) * a * t) > tol:
            K += 1
    total = np.zeros_like(x)
    for k in range(K + 1):
        total = total + math.exp(-(2 * k + n) * a * t) * laguerre_poly(k, n - 1, x)
    return (2.0 * math.pi) ** (-n) * a ** n * total * np.exp(-x / 2.0)


def singular_set(t: float, s_max: float) -> np.ndarray:
    """Positive s <= s_max with sin(2 s t) = 0, where the imaginary-lambda profile blows up"""
    k_max = int(math.floor(2.0 * t * s_max / math.pi))
    return np.array([k * math.pi / (2.0 * t) for k in range(1, k_max + 1)])


def imaginary_profile(s, t: float, y, v, n: int = 1):
    """
    p_{2t}^{is}(2y, 2v) = c_n (s / sin 2st)^n e^{-s cot(2st)(|y|^2 + |v|^2)}

    Real valued; at s = 0 the Gaussian limit. Blows up as s approaches the singular set.

    Raises:
        SingularityError: If sin(2st) vanishes for some s != 0
    """
    s = np.asarray(s, dtype=float)
    beta = _squared_norm(y, n) + _squared_norm(v, n)
    arg = 2.0 * s * t
    small = np.abs(arg) < SERIES_THRESHOLD
    sine = np.sin(np.where(small, 1.0, arg))
    if np.any(~small & (np.abs(sine) < POLE_DISTANCE)):
        raise SingularityError(f"sin(2st) = 0 within {POLE_DISTANCE:.0e} for t={t}")
    s_safe = np.where(small, 1.0, s)
    ratio = np.where(small, (1.0 + arg * arg / 6.0) / (2.0 * t), s_safe / sine)
    cot_term = np.where(small, (1.0 - arg * arg / 3.0) / (2.0 * t), s_safe * np.cos(np.where(small, 1.0, arg)) / sine)
    return (4.0 * math.pi) ** (-n) * ratio ** n * np.exp(-cot_term * beta)


def contour_bound(lam: float, R: float, t: float, beta) -> np.ndarray:
    """((lam + R) / sinh(lam t)) e^{(lam + R) coth(lam t) beta}, bounding |p_{2t}^{lam +- iR}(2y, 2v)| for lam > 0"""
    if lam <= 0:
        raise HeatKernelError("the contour bound needs lambda > 0")
    return (lam + R) / math.sinh(lam * t) * np.exp((lam + R) / math.tanh(lam * t) * np.asarray(beta, dtype=float))


def q_heat(x, t: float):
    """Heat kernel of the line, (4 pi t)^{-1/2} e^{-x^2/4t}"""
    if t <= 0:
        raise HeatKernelError("t must be positive")
    x = np.asarray(x, dtype=float)
    return (4.0 * math.pi * t) ** -0.5 * np.exp(-x * x / (4.0 * t))


def q_heat_analytic(z, t: float):
    """Entire extension of q_t"""
    if t <= 0:
        raise HeatKernelError("t must be positive")
    z = np.asarray(z, dtype=complex)
    return (4.0 * math.pi * t) ** -0.5 * np.exp(-z * z / (4.0 * t))


def generator_residual(lam: float, t: float, y, v, h: float = 1e-3, n: int = 1) -> float:
    """
    Central-difference residual of d/dt p_t^lam = (Laplacian - (lam^2/4)(|y|^2 + |v|^2)) p_t^lam

    y, v are single points of dimension n; the residual is relative to |p_t^lam|.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    point = np.concatenate([y, v])

    def p_at(q, time):
        return p_twisted(lam, time, q[:n], q[n:], n)

    center = p_at(point, t)
    time_derivative = (p_at(point, t + h) - p_at(point, t - h)) / (2.0 * h)
    laplacian = 0.0
    for j in range(2 * n):
        step = np.zeros(2 * n)
        step[j] = h
        laplacian += (p_at(point + step, t) - 2.0 * center + p_at(point - step, t)) / (h * h)
    rhs = laplacian - 0.25 * lam * lam * float(point @ point) * center
    return abs(time_derivative - rhs) / abs(center)


def global_norm_spot_check(t: float, X_points: Iterable[GroupPoint], lattice: Lattice,
                           quad: Optional[QuadratureSpec] = None) -> Dict[str, object]:
    """
    int |k_t(h exp(iX))|^2 dh for X in a finite set; the sup over the set is reported

    By left invariance of dh the integral over h of |k_t(h^{-1} c)|^2 only depends on the
    imaginary part X of c = h0 exp(iX). Each integrand must have decayed at the faces of
    the lattice, so a finite value is an actual bound on the box.
    """
    axes = lattice.mesh()
    values: List[float] = []
    for X in X_points:
        n = X.n
        if lattice.ndim != 2 * n + 1:
            raise HeatKernelError("the spot check needs a (2n+1)-axis lattice")
        y, v, eta = X.arrays()
        x = np.stack(axes[:n], axis=-1)
        u = np.stack(axes[n:2 * n], axis=-1)
        z = x + 1j * y
        w = u + 1j * v
        zeta = axes[-1] + 1j * eta + 0.5j * (np.sum(x * v, axis=-1) - np.sum(u * y, axis=-1))
        r2 = np.sum(z * z, axis=-1) + np.sum(w * w, axis=-1)
        density = np.abs(heat_kernel_values(r2, zeta, t, n, quad)) ** 2
        check_boundary_decay(density, f"global norm spot check at X={X.x + X.u + [X.xi]}")
        values.append(float(reduce_sum(density) * lattice.cell_volume))
    logger.info(f"global norm spot check: sup {max(values):.6g} over {len(values)} imaginary parts")
    return {"values": values, "sup": max(values)}
