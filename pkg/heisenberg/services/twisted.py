"""
Twisted Transform Service - the lambda-twisted layer of the heat kernel transform

Twisted convolution on R^{2n},

    (f *_lam g)(x, u) = int f(x', u') g(x - x', u - u') e^{-i(lam/2)(x'.u - x.u')} dx' du',

the transform H_t^lam f = f *_lam p_t^lam continued to an entire function on C^{2n}, and
its Bergman weight

    W_t^lam(x + iy, u + iv) = 4^n e^{lam(u.y - v.x)} p_2t^lam(2y, 2v).

Transforms are evaluator objects and are only sampled when a pairing integrates them.
Pairings on C^2 (n = 1) are trapezoid sums over a box, one tile per y node, reduced in
tile order. Product evaluations of quadrature transforms use matrix products, which are
reproducible for fixed shapes and thread settings.
"""

import logging
import math
import threading
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from heisenberg.config import settings
from heisenberg.models.field import Lattice, SampledField, SeparableField
from heisenberg.models.group import ComplexGroupPoint
from heisenberg.models.params import HeatParams, QuadratureSpec
from heisenberg.models.transform import TwistedTransformResult, WeightLambda
from heisenberg.services.heatkernel import (
    heat_kernel_values, hyperbolic_factors, k_heat_analytic, p_twisted, p_twisted_complex
)
from heisenberg.services.hgroup import (
    IncompatibleLatticeError, coarse_mask, complex_inverse, complex_multiply,
    field_evaluator, slice_twist
)
from heisenberg.services.quadrature import (
    TruncationError, check_boundary_decay, check_refinement, chunk_size, odd_count,
    parallel_map, reduce_sum, uniform_rule
)
from heisenberg.services.specfun import IndexLike, _entries, special_hermite_analytic

logger = logging.getLogger(__name__)

# Radius 13 keeps |Phi~_{2,2}|^2 W below 1e-3 of its peak on the faces at t = 1/2, lambda = 1
BERGMAN_QUAD = QuadratureSpec(rule="uniform_truncated", nodes=53, radius=13.0, tol=1e-3)

Translatable = Union[SampledField, TwistedTransformResult, Callable]


class TwistedTransformError(Exception):
    """Raised for invalid inputs to the twisted transform layer"""
    pass


def _require_lambda(lam: float) -> None:
    if not math.isfinite(lam) or lam == 0:
        raise TwistedTransformError("lambda must be finite and non-zero")


def _require_time(t: float) -> None:
    if not (math.isfinite(t) and t > 0):
        raise TwistedTransformError("t must be positive")


def _as_block(a, n: int) -> np.ndarray:
    """Coordinates with a trailing axis of length n; bare arrays are accepted for n = 1"""
    a = np.asarray(a)
    if n == 1 and (a.ndim == 0 or a.shape[-1] != 1):
        return a[..., None]
    if a.shape[-1] != n:
        raise TwistedTransformError(f"coordinate block has trailing dimension {a.shape[-1]}, expected {n}")
    return a


def _vector(a, n: int) -> np.ndarray:
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if a.shape == (1,) and n > 1:
        a = np.repeat(a, n)
    if a.shape != (n,):
        raise TwistedTransformError(f"expected a real {n}-vector, got shape {a.shape}")
    return a


def _source_nodes(f: SampledField) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Non-zero lattice nodes with their trapezoid weights and doubled-spacing weights"""
    points = f.lattice.points()
    weights = f.values.ravel() * f.lattice.cell_volume
    coarse = np.where(coarse_mask(f.lattice), weights * 2 ** f.lattice.ndim, 0.0)
    keep = np.abs(weights) > 0.0
    return points[keep], weights[keep], coarse[keep]


def _relative_scale(values: np.ndarray) -> float:
    return float(np.max(np.abs(values))) if values.size else 1.0


# ---------------------------------------------------------------------------------------
# Twisted convolution


def _twisted_values(f: SampledField, g: SampledField, lam: float, quad: QuadratureSpec,
                    targets: np.ndarray) -> np.ndarray:
    if f.is_group_field or g.is_group_field:
        raise IncompatibleLatticeError("twisted convolution needs fields on R^{2n}")
    if f.n != g.n:
        raise TwistedTransformError(f"fields of dimension {f.n} and {g.n}")
    if not f.lattice.compatible_with(g.lattice):
        raise IncompatibleLatticeError("f and g must share lattice spacings")
    check_boundary_decay(f.values, "twisted_convolve: first factor")
    check_boundary_decay(g.values, "twisted_convolve: second factor")

    n = f.n
    evaluate_g = field_evaluator(g)
    source, weights, coarse_weights = _source_nodes(f)
    sx, su = source[:, :n], source[:, n:]

    block = chunk_size(len(source))
    fine = np.empty(len(targets), dtype=complex)
    coarse = np.empty(len(targets), dtype=complex)
    mass = np.empty(len(targets))
    for start in range(0, len(targets), block):
        batch = targets[start:start + block]
        px, pu = batch[:, :n], batch[:, n:]
        dx = px[:, None, :] - sx[None, :, :]
        du = pu[:, None, :] - su[None, :, :]
        values = evaluate_g(*[dx[..., j] for j in range(n)], *[du[..., j] for j in range(n)])
        symplectic = np.sum(sx[None, :, :] * pu[:, None, :], axis=-1) - np.sum(px[:, None, :] * su[None, :, :], axis=-1)
        integrand = values * np.exp(-0.5j * lam * symplectic)
        fine[start:start + block] = reduce_sum(integrand * weights[None, :], axis=1)
        coarse[start:start + block] = reduce_sum(integrand * coarse_weights[None, :], axis=1)
        mass[start:start + block] = reduce_sum(np.abs(integrand * weights[None, :]), axis=1)

    # gap relative to int |f| |g|, not to the value
    check_refinement(coarse, fine, quad.tol, "twisted_convolve", scale=max(float(mass.max()), 1e-300))
    logger.debug(f"twisted_convolve: {len(targets)} targets against {len(source)} source nodes, lambda={lam}")
    return fine


def twisted_convolve(f: SampledField, g: SampledField, lam: float, quad: QuadratureSpec,
                     output: Optional[Lattice] = None) -> SampledField:
    """
    lam-twisted convolution of two fields on R^{2n} by direct quadrature.

    f supplies the quadrature samples; g is evaluated off-lattice through its evaluator
    (or a cubic interpolant). The doubled-spacing sub-lattice must agree with the full
    sum within quad.tol relative to the largest value.

    Raises:
        IncompatibleLatticeError: If the fields are not on compatible R^{2n} lattices
        TruncationError: If either field has not decayed at its lattice faces
        ConvergenceError: If the sub-lattice check fails
    """
    out_lattice = output or f.lattice
    values = _twisted_values(f, g, lam, quad, out_lattice.points())
    return SampledField(lattice=out_lattice, values=values.reshape(out_lattice.shape), n=f.n, lam=lam)


def twisted_convolve_at(f: SampledField, g: SampledField, lam: float, quad: QuadratureSpec,
                        points) -> np.ndarray:
    """(f *_lam g) at scattered points of shape (N, 2n)"""
    return _twisted_values(f, g, lam, quad, np.atleast_2d(np.asarray(points, dtype=float)))


def twisted_kernel_field(lattice: Lattice, t: float, lam: float, n: int = 1) -> SampledField:
    """p_t^lam sampled on a 2n-axis lattice with its closed form as evaluator"""

    def evaluate(*coords):
        x = np.stack([np.asarray(c, dtype=float) for c in coords[:n]], axis=-1)
        u = np.stack([np.asarray(c, dtype=float) for c in coords[n:2 * n]], axis=-1)
        return np.asarray(p_twisted(lam, t, x, u, n))

    return SampledField.from_function(evaluate, lattice, n, t=t, lam=lam)


# ---------------------------------------------------------------------------------------
# H_t^lambda and its closed forms


def _check_points(lattice: Lattice, n: int) -> Tuple[np.ndarray, np.ndarray]:
    center = np.array([o + 0.5 * h * (m - 1) for o, h, m in zip(lattice.origin, lattice.spacing, lattice.counts)])
    offsets_z = np.array([0.0, 0.5 + 0.5j, -0.5 + 0.25j])
    offsets_w = np.array([0.0, -0.25 + 0.5j, 0.5 - 0.5j])
    z = center[None, :n] + offsets_z[:, None]
    w = center[None, n:2 * n] + offsets_w[:, None]
    return z, w


def heat_transform_lambda(f: SampledField, t: float, lam: float,
                          quad: Optional[QuadratureSpec] = None) -> TwistedTransformResult:
    """
    H_t^lam f(z, w) = int f(x', u') p_t^lam(z - x', w - u') e^{-(i/2) lam (x'.w - u'.z)} dx' du'

    The sum over f's lattice is compared with its doubled-spacing subsum at three check
    points near the lattice center when the transform is built; evaluations afterwards
    use the full sum only.

    Args:
        f: Field on R^{2n}, decayed at the lattice faces
        t: Heat time
        lam: Non-zero spectral parameter
        quad: Tolerance of the refinement check

    Returns:
        TwistedTransformResult; for n = 1 it also carries a product evaluator

    Raises:
        TwistedTransformError: If t <= 0, lambda = 0 or f lives on the group
        TruncationError: If f has not decayed at the lattice faces
        ConvergenceError: If the refinement check fails
    """
    quad = quad or QuadratureSpec(tol=1e-6)
    _require_time(t)
    _require_lambda(lam)
    if f.is_group_field:
        raise TwistedTransformError("H_t^lambda acts on fields over R^{2n}")
    check_boundary_decay(f.values, "heat_transform_lambda")

    n = f.n
    source, weights, coarse_weights = _source_nodes(f)
    sx, su = source[:, :n], source[:, n:]
    sinhc, lcoth = hyperbolic_factors(lam, t)
    prefactor = (4.0 * math.pi) ** (-n) * float(sinhc) ** n
    kappa = 0.25 * float(lcoth)

    def sums(z, w, weight_sets):
        z, w = np.broadcast_arrays(_as_block(np.asarray(z, dtype=complex), n),
                                   _as_block(np.asarray(w, dtype=complex), n))
        shape = z.shape[:-1]
        zf = z.reshape(-1, n)
        wf = w.reshape(-1, n)
        outs = [np.empty(len(zf), dtype=complex) for _ in weight_sets]
        block = chunk_size(len(sx))
        for start in range(0, len(zf), block):
            zb, wb = zf[start:start + block], wf[start:start + block]
            dz = zb[:, None, :] - sx[None, :, :]
            dw = wb[:, None, :] - su[None, :, :]
            symplectic = np.sum(sx[None, :, :] * wb[:, None, :], axis=-1) - np.sum(su[None, :, :] * zb[:, None, :], axis=-1)
            kernel = np.exp(-kappa * (np.sum(dz * dz, axis=-1) + np.sum(dw * dw, axis=-1)) - 0.5j * lam * symplectic)
            for out, wts in zip(outs, weight_sets):
                out[start:start + block] = reduce_sum(kernel * wts[None, :], axis=1)
        return [prefactor * out.reshape(shape) for out in outs]

    check_z, check_w = _check_points(f.lattice, n)
    fine, coarse = sums(check_z, check_w, [weights, coarse_weights])
    check_refinement(coarse, fine, quad.tol, "heat_transform_lambda", scale=_relative_scale(fine))

    def evaluator(z, w):
        return sums(z, w, [weights])[0]

    product_evaluator = None
    if n == 1:
        xa, ua = f.lattice.axes()
        samples = (f.values * f.lattice.cell_volume).ravel()

        def product_evaluator(zs, ws):
            A = np.exp(-kappa * (zs[:, None] - xa[None, :]) ** 2)
            P = np.exp(0.5j * lam * zs[:, None] * ua[None, :])
            left = (A[:, :, None] * P[:, None, :]).reshape(len(zs), -1) * samples[None, :]
            out = np.empty((len(zs), len(ws)), dtype=complex)
            block = chunk_size(len(samples))
            for start in range(0, len(ws), block):
                wb = ws[start:start + block]
                B = np.exp(-kappa * (wb[:, None] - ua[None, :]) ** 2)
                Q = np.exp(-0.5j * lam * wb[:, None] * xa[None, :])
                right = (Q[:, :, None] * B[:, None, :]).reshape(len(wb), -1)
                out[:, start:start + block] = left @ right.T
            return prefactor * out

    logger.debug(f"H_t^lambda: t={t}, lambda={lam}, {len(source)} source nodes")
    return TwistedTransformResult(n=n, t=t, lam=lam,
                                  source={**f.descriptor(), "kind": "quadrature"},
                                  evaluator=evaluator, product_evaluator=product_evaluator)


def gaussian_transform(a: float, t: float, lam: float, n: int = 1) -> TwistedTransformResult:
    """
    Closed form of H_t^lam for G(x, u) = exp(-a(|x|^2 + |u|^2)).

    Each coordinate pair contributes two Gaussian integrals; with kappa = (lam/4) coth(lam t)
    and A = a + kappa,

        (pi / A) exp((2 kappa z - (i/2) lam w)^2 / 4A - kappa z^2 + (2 kappa w + (i/2) lam z)^2 / 4A - kappa w^2).
    """
    if not a > 0:
        raise TwistedTransformError("gaussian width must be positive")
    _require_time(t)
    _require_lambda(lam)
    sinhc, lcoth = hyperbolic_factors(lam, t)
    kappa = 0.25 * float(lcoth)
    A = a + kappa
    prefactor = (4.0 * math.pi) ** (-n) * float(sinhc) ** n * (math.pi / A) ** n

    def evaluator(z, w):
        z, w = np.broadcast_arrays(_as_block(np.asarray(z, dtype=complex), n),
                                   _as_block(np.asarray(w, dtype=complex), n))
        bz = 2.0 * kappa * z - 0.5j * lam * w
        bw = 2.0 * kappa * w + 0.5j * lam * z
        exponent = np.sum(bz * bz / (4.0 * A) - kappa * z * z + bw * bw / (4.0 * A) - kappa * w * w, axis=-1)
        return prefactor * np.exp(exponent)

    return TwistedTransformResult(n=n, t=t, lam=lam, source={"kind": "gaussian", "width": a},
                                  evaluator=evaluator)


def heat_gaussian_transform(s: float, t: float, lam: float, a=0.0, b=0.0, n: int = 1) -> TwistedTransformResult:
    """
    H_t^lam(tau(a, b) p_s^lam) = tau(a, b) p_{s+t}^lam, continued to C^{2n}

    With a = b = 0 this is the twisted semigroup law p_s *_lam p_t = p_{s+t}.
    """
    _require_time(s)
    _require_time(t)
    _require_lambda(lam)
    a, b = _vector(a, n), _vector(b, n)

    def evaluator(z, w):
        z, w = np.broadcast_arrays(_as_block(np.asarray(z, dtype=complex), n),
                                   _as_block(np.asarray(w, dtype=complex), n))
        phase = np.exp(-0.5j * lam * (np.sum(a * w, axis=-1) - np.sum(b * z, axis=-1)))
        return phase * p_twisted_complex(lam, s + t, z - a, w - b, n)

    return TwistedTransformResult(n=n, t=t, lam=lam,
                                  source={"kind": "heat_kernel", "s": s, "a": a.tolist(), "b": b.tolist()},
                                  evaluator=evaluator)


def special_hermite_transform(alpha: IndexLike, beta: IndexLike, t: float, lam: float) -> TwistedTransformResult:
    """Phi~_{alpha,beta} = e^{-(2|beta|+n)|lam| t} Phi^lam_{alpha,beta} continued to C^{2n}"""
    _require_time(t)
    _require_lambda(lam)
    a_entries, b_entries = _entries(alpha), _entries(beta)
    n = len(a_entries)
    decay = math.exp(-(2 * sum(b_entries) + n) * abs(lam) * t)

    def evaluator(z, w):
        return decay * special_hermite_analytic(a_entries, b_entries, lam, z, w)

    return TwistedTransformResult(n=n, t=t, lam=lam,
                                  source={"kind": "special_hermite", "alpha": list(a_entries), "beta": list(b_entries)},
                                  evaluator=evaluator)


# ---------------------------------------------------------------------------------------
# Twisted translations


def twisted_translate(f: Translatable, a, b, lam: float):
    """
    tau^lam(a, b) f = e^{-(i lam/2)(a.u - b.x)} f(x - a, u - b)

    A SampledField (with evaluator) is sampled again on its lattice; a TwistedTransformResult
    is translated in the complex variables, e^{-(i lam/2)(a.w - b.z)} F(z - a, w - b), which
    keeps it holomorphic; any other callable is treated as f(x, u) on coordinate blocks.
    """
    if isinstance(f, TwistedTransformResult):
        return _translate_transform(f, a, b, lam)
    if isinstance(f, SampledField):
        return _translate_field(f, a, b, lam)
    if callable(f):
        return _translate_callable(f, a, b, lam)
    raise TwistedTransformError(f"cannot translate an object of type {type(f).__name__}")


def _translate_field(f: SampledField, a, b, lam: float) -> SampledField:
    if f.is_group_field:
        raise TwistedTransformError("twisted translations act on fields over R^{2n}")
    if f.evaluator is None:
        raise TwistedTransformError("twisted translation needs a field with an evaluator")
    n = f.n
    a, b = _vector(a, n), _vector(b, n)
    f_eval = f.evaluator

    def evaluate(*coords):
        x = np.stack([np.asarray(c, dtype=float) for c in coords[:n]], axis=-1)
        u = np.stack([np.asarray(c, dtype=float) for c in coords[n:2 * n]], axis=-1)
        phase = np.exp(-0.5j * lam * (np.sum(a * u, axis=-1) - np.sum(b * x, axis=-1)))
        shifted = [x[..., j] - a[j] for j in range(n)] + [u[..., j] - b[j] for j in range(n)]
        return phase * np.asarray(f_eval(*shifted))

    return SampledField.from_function(evaluate, f.lattice, n, t=f.t, lam=f.lam)


def _translate_callable(f: Callable, a, b, lam: float) -> Callable:
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    n = len(a)

    def translated(x, u):
        x = _as_block(np.asarray(x), n)
        u = _as_block(np.asarray(u), n)
        phase = np.exp(-0.5j * lam * (np.sum(a * u, axis=-1) - np.sum(b * x, axis=-1)))
        return phase * np.asarray(f(x - a, u - b))

    return translated


def _translate_transform(F: TwistedTransformResult, a, b, lam: float) -> TwistedTransformResult:
    n = F.n
    a, b = _vector(a, n), _vector(b, n)

    def evaluator(z, w):
        z, w = np.broadcast_arrays(_as_block(np.asarray(z, dtype=complex), n),
                                   _as_block(np.asarray(w, dtype=complex), n))
        phase = np.exp(-0.5j * lam * (np.sum(a * w, axis=-1) - np.sum(b * z, axis=-1)))
        return phase * F.evaluate(z - a, w - b)

    product_evaluator = None
    if n == 1 and F.product_evaluator is not None:
        def product_evaluator(zs, ws):
            phase = np.exp(-0.5j * lam * (a[0] * ws[None, :] - b[0] * zs[:, None]))
            return phase * F.evaluate_product(zs - a[0], ws - b[0])

    source = {**F.source, "translated_by": [a.tolist(), b.tolist()]}
    return TwistedTransformResult(n=n, t=F.t, lam=F.lam, source=source,
                                  evaluator=evaluator, product_evaluator=product_evaluator)


# ---------------------------------------------------------------------------------------
# Weights


def weight_gaussian_factor(t: float, lam: float, y, v, n: int = 1) -> np.ndarray:
    """(y, v)-only factor 4^n p_2t^lam(2y, 2v) of W_t^lam"""
    _require_time(t)
    _require_lambda(lam)
    y = _as_block(np.asarray(y, dtype=float), n)
    v = _as_block(np.asarray(v, dtype=float), n)
    return np.asarray(4.0 ** n * p_twisted(lam, 2.0 * t, 2.0 * y, 2.0 * v, n), dtype=float)


def weight_lambda(t: float, lam: float, y, v, x=0.0, u=0.0, n: int = 1) -> np.ndarray:
    """
    W_t^lam(x + iy, u + iv) = 4^n e^{lam(u.y - v.x)} p_2t^lam(2y, 2v)

    Raises:
        TwistedTransformError: If lambda = 0 or t <= 0
    """
    gaussian = weight_gaussian_factor(t, lam, y, v, n)
    y = _as_block(np.asarray(y, dtype=float), n)
    v = _as_block(np.asarray(v, dtype=float), n)
    x = _as_block(np.asarray(x, dtype=float), n)
    u = _as_block(np.asarray(u, dtype=float), n)
    symplectic = np.sum(u * y, axis=-1) - np.sum(v * x, axis=-1)
    return gaussian * np.exp(lam * symplectic)


def sample_weight(t: float, lam: float, y, v, x=0.0, u=0.0, n: int = 1) -> WeightLambda:
    """W_t^lambda with its Gaussian factor, packed for reports"""
    return WeightLambda(n=n, t=t, lam=lam, y=np.asarray(y), v=np.asarray(v),
                        gaussian=weight_gaussian_factor(t, lam, y, v, n),
                        values=weight_lambda(t, lam, y, v, x, u, n))


def fock_weight(t: float, lam: float, x, u, y, v, n: int = 1) -> np.ndarray:
    """4^n c_n (lam / sinh 2t lam)^n e^{lam(u.y - v.x)} e^{-(lam/2) coth(2t lam)(|z|^2 + |w|^2)}"""
    _require_time(t)
    _require_lambda(lam)
    x, u, y, v = (_as_block(np.asarray(c, dtype=float), n) for c in (x, u, y, v))
    sinhc, lcoth = hyperbolic_factors(lam, 2.0 * t)
    norm2 = np.sum(x * x + y * y + u * u + v * v, axis=-1)
    symplectic = np.sum(u * y, axis=-1) - np.sum(v * x, axis=-1)
    return (4.0 ** n * (4.0 * math.pi) ** (-n) * float(sinhc) ** n
            * np.exp(lam * symplectic - 0.5 * float(lcoth) * norm2))


# ---------------------------------------------------------------------------------------
# Pairings on C^2


WeightTile = Callable[[float, np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def _bergman_tile(t: float, lam: float) -> WeightTile:
    def tile(y, x, u, v):
        gaussian = weight_gaussian_factor(t, lam, np.full_like(v, y), v)
        return gaussian[None, :] * np.exp(lam * (u[None, :] * y - v[None, :] * x[:, None]))
    return tile


def _fock_tile(t: float, lam: float) -> WeightTile:
    def tile(y, x, u, v):
        return fock_weight(t, lam, x[:, None, None], u[None, :, None],
                           np.full((1, len(u), 1), y), v[None, :, None])
    return tile


def _box(quad: QuadratureSpec) -> Tuple[np.ndarray, float]:
    radius = quad.radius or BERGMAN_QUAD.radius
    count = odd_count(quad.nodes)
    return np.linspace(-radius, radius, count), 2.0 * radius / (count - 1)


def _face_peak(density: np.ndarray, count: int) -> float:
    cube = density.reshape(density.shape[0], count, count)
    return float(max(cube[0].max(), cube[-1].max(), cube[:, 0].max(), cube[:, -1].max(),
                     cube[:, :, 0].max(), cube[:, :, -1].max()))


def _check_spaces(functions: Sequence[TwistedTransformResult]) -> TwistedTransformResult:
    if not functions:
        raise TwistedTransformError("at least one function is required")
    first = functions[0]
    if first.n != 1:
        raise TwistedTransformError("pairings on C^{2n} are implemented for n = 1")
    for F in functions[1:]:
        if not first.shares_space(F):
            raise TwistedTransformError(
                f"functions of different spaces: (n, t, lambda) = {(first.n, first.t, first.lam)} and {(F.n, F.t, F.lam)}"
            )
    return first


def _pairing_matrix(left: Sequence[TwistedTransformResult], right: Sequence[TwistedTransformResult],
                    weight_tile: WeightTile, quad: QuadratureSpec, what: str) -> np.ndarray:
    """
    Matrix of int_{C^2} F_k conj(G_l) omega over the box of `quad`.

    Each y node is one tile covering the whole (x, u, v) cube. The doubled-spacing
    sub-box gives the convergence estimate, measured relative to ||F_k|| ||G_l||, and every
    density |F|^2 omega must fall below settings.boundary_decay_ratio of its peak on the
    faces of the box.
    """
    same = left is right
    axis, h = _box(quad)
    m = len(axis)
    uu, vv = np.meshgrid(axis, axis, indexing='ij')
    u_flat, v_flat = uu.ravel(), vv.ravel()
    ws = u_flat + 1j * v_flat
    even = np.arange(m) % 2 == 0
    coarse_w = (even[:, None] & even[None, :]).ravel()
    K, L = len(left), len(right)

    def stats(values, omega):
        density = np.abs(values) ** 2 * omega
        return float(density.max()), _face_peak(density, m), float(reduce_sum(density))

    def tile(j):
        y = axis[j]
        zs = axis + 1j * y
        omega = weight_tile(y, axis, u_flat, v_flat)
        right_values = [G.evaluate_product(zs, ws) for G in right]
        right_coarse = [R[::2][:, coarse_w] for R in right_values]
        right_stats = [stats(R, omega) for R in right_values]
        left_stats = right_stats if same else []
        fine = np.zeros((K, L), dtype=complex)
        coarse = np.zeros((K, L), dtype=complex)
        for k in range(K):
            values = right_values[k] if same else left[k].evaluate_product(zs, ws)
            if not same:
                left_stats.append(stats(values, omega))
            weighted = values * omega
            weighted_coarse = weighted[::2][:, coarse_w] if j % 2 == 0 else None
            for l in range(k if same else 0, L):
                fine[k, l] = reduce_sum(weighted * np.conj(right_values[l]))
                if weighted_coarse is not None:
                    coarse[k, l] = reduce_sum(weighted_coarse * np.conj(right_coarse[l]))
        return fine, coarse, np.array(left_stats), np.array(right_stats)

    results = parallel_map(tile, range(m))
    fine = reduce_sum(np.stack([r[0] for r in results]), axis=0) * h ** 4
    coarse = reduce_sum(np.stack([r[1] for r in results]), axis=0) * (2.0 * h) ** 4
    if same:
        upper = np.triu(fine, 1)
        fine = np.triu(fine) + np.conj(upper).T
        upper = np.triu(coarse, 1)
        coarse = np.triu(coarse) + np.conj(upper).T

    norms = []
    for side in (2, 3):
        tiles = np.stack([r[side] for r in results])  # (m, count, 3)
        peak = tiles[:, :, 0].max(axis=0)
        edge = np.maximum(tiles[:, :, 1].max(axis=0), np.maximum(tiles[0, :, 0], tiles[-1, :, 0]))
        ratio = np.where(peak > 0, edge / np.where(peak > 0, peak, 1.0), 0.0)
        worst = int(np.argmax(ratio))
        if ratio[worst] >= settings.boundary_decay_ratio:
            raise TruncationError(
                f"{what}: function {worst} has boundary/peak ratio {ratio[worst]:.3e} on a box of radius "
                f"{axis[-1]:.3g}; enlarge the box"
            )
        norms.append(reduce_sum(tiles[:, :, 2], axis=0) * h ** 4)

    scale = np.sqrt(np.outer(norms[0], norms[1]))
    disagreement = check_refinement(coarse, fine, quad.tol, what, scale=scale)
    logger.debug(f"{what}: {K}x{L} pairings on {m}^4 nodes, sub-box gap {disagreement:.2e}")
    return fine


def bergman_pairings(left: Sequence[TwistedTransformResult], right: Sequence[TwistedTransformResult],
                     quad: Optional[QuadratureSpec] = None) -> np.ndarray:
    """Matrix of <F_k, G_l> in the twisted Bergman space (n = 1)"""
    quad = quad or BERGMAN_QUAD
    space = _check_spaces(list(left) + list(right))
    return _pairing_matrix(list(left), list(right), _bergman_tile(space.t, space.lam), quad, "bergman_pairing")


def bergman_gram(functions: Sequence[TwistedTransformResult], quad: Optional[QuadratureSpec] = None) -> np.ndarray:
    """Gram matrix in the twisted Bergman space; each function is evaluated once per tile"""
    quad = quad or BERGMAN_QUAD
    functions = list(functions)
    space = _check_spaces(functions)
    return _pairing_matrix(functions, functions, _bergman_tile(space.t, space.lam), quad, "bergman_gram")


def bergman_pairing(F: TwistedTransformResult, G: TwistedTransformResult,
                    quad: Optional[QuadratureSpec] = None) -> complex:
    """
    <F, G> = int_{C^2} F conj(G) W_t^lam over the truncated box (n = 1)

    Raises:
        TwistedTransformError: If F and G belong to different (n, t, lambda)
        TruncationError: If |F|^2 W or |G|^2 W has not decayed on the box faces
        ConvergenceError: If the doubled-spacing sub-box disagrees beyond quad.tol
    """
    if G is F:
        return complex(bergman_gram([F], quad)[0, 0])
    return complex(bergman_pairings([F], [G], quad)[0, 0])


def fock_map(F: TwistedTransformResult) -> TwistedTransformResult:
    """F(z, w) e^{(lam/4) coth(2t lam)(z.z + w.w)}, the image of F in the twisted Fock space"""
    n = F.n
    _, lcoth = hyperbolic_factors(F.lam, 2.0 * F.t)
    factor = 0.25 * float(lcoth)

    def evaluator(z, w):
        z, w = np.broadcast_arrays(_as_block(np.asarray(z, dtype=complex), n),
                                   _as_block(np.asarray(w, dtype=complex), n))
        return F.evaluate(z, w) * np.exp(factor * np.sum(z * z + w * w, axis=-1))

    def product_evaluator(zs, ws):
        return F.evaluate_product(zs, ws) * np.exp(factor * zs * zs)[:, None] * np.exp(factor * ws * ws)[None, :]

    return TwistedTransformResult(n=n, t=F.t, lam=F.lam, source={**F.source, "fock": True},
                                  evaluator=evaluator,
                                  product_evaluator=product_evaluator if n == 1 else None)


def fock_pairing(F: TwistedTransformResult, G: TwistedTransformResult,
                 quad: Optional[QuadratureSpec] = None) -> complex:
    """int_{C^2} F conj(G) times the Fock weight (n = 1)"""
    quad = quad or BERGMAN_QUAD
    space = _check_spaces([F, G])
    left = [F]
    right = left if G is F else [G]
    return complex(_pairing_matrix(left, right, _fock_tile(space.t, space.lam), quad, "fock_pairing")[0, 0])


def monomial(alpha: IndexLike, beta: IndexLike, t: float, lam: float) -> TwistedTransformResult:
    """z^alpha w^beta as an element of the twisted Fock space"""
    a_entries, b_entries = _entries(alpha), _entries(beta)
    if len(a_entries) != len(b_entries):
        raise TwistedTransformError("alpha and beta must have the same length")
    n = len(a_entries)
    a_powers = np.array(a_entries)
    b_powers = np.array(b_entries)

    def evaluator(z, w):
        z, w = np.broadcast_arrays(_as_block(np.asarray(z, dtype=complex), n),
                                   _as_block(np.asarray(w, dtype=complex), n))
        return np.prod(z ** a_powers, axis=-1) * np.prod(w ** b_powers, axis=-1)

    return TwistedTransformResult(n=n, t=t, lam=lam,
                                  source={"kind": "monomial", "alpha": list(a_entries), "beta": list(b_entries)},
                                  evaluator=evaluator)


def monomial_fock_norm(alpha: IndexLike, beta: IndexLike, t: float, lam: float,
                       quad: Optional[QuadratureSpec] = None) -> float:
    """Squared Fock norm of z^alpha w^beta; finite for every monomial"""
    F = monomial(alpha, beta, t, lam)
    return float(fock_pairing(F, F, quad).real)


def torus_block_orthogonality(max_degree: int, t: float, lam: float,
                              quad: Optional[QuadratureSpec] = None, angles: Optional[int] = None,
                              samples: Optional[np.ndarray] = None) -> Dict[str, float]:
    """
    Orthogonality of monomial blocks of different total degree (n = 1)

    The Fock weight is invariant under (z, w) -> e^{i theta}(z, w), so averaging F conj(G)
    over that circle kills products of blocks with different degree. Reports the largest
    normalized cross-block Fock pairing and the largest discrete circle average of
    F conj(G) at sample points.
    """
    angles = angles or 2 * max_degree + 3
    monomials = [(a, d - a) for d in range(max_degree + 1) for a in range(d + 1)]
    functions = [monomial(a, b, t, lam) for a, b in monomials]
    space = _check_spaces(functions)
    gram = _pairing_matrix(functions, functions, _fock_tile(space.t, space.lam),
                           quad or BERGMAN_QUAD, "torus_block_orthogonality")
    degrees = np.array([a + b for a, b in monomials])
    diag = np.sqrt(np.abs(np.diag(gram)))
    normalized = np.abs(gram) / np.outer(diag, diag)
    cross = degrees[:, None] != degrees[None, :]
    pairing = float(normalized[cross].max()) if np.any(cross) else 0.0

    if samples is None:
        samples = np.array([[0.7 + 0.2j, -0.4 + 0.9j], [1.3 - 0.5j, 0.25 + 0.1j], [-0.6 - 0.8j, 1.1 - 0.3j]])
    theta = 2.0 * math.pi * np.arange(angles) / angles
    rotation = np.exp(1j * theta)
    z = samples[:, 0][None, :] * rotation[:, None]
    w = samples[:, 1][None, :] * rotation[:, None]
    values = np.stack([F.evaluate(z, w) for F in functions])  # (K, angles, S)
    torus = 0.0
    for k in range(len(functions)):
        for l in range(len(functions)):
            if degrees[k] == degrees[l]:
                continue
            average = reduce_sum(values[k] * np.conj(values[l]), axis=0) / angles
            scale = np.sqrt(reduce_sum(np.abs(values[k]) ** 2, axis=0) * reduce_sum(np.abs(values[l]) ** 2, axis=0)) / angles
            torus = max(torus, float(np.max(np.abs(average) / np.maximum(scale, 1e-300))))
    return {"pairing": pairing, "torus": torus}


# ---------------------------------------------------------------------------------------
# Reproducing kernels


def reproducing_kernel(a, b, t: float, lam: float, n: int = 1) -> TwistedTransformResult:
    """K^t_{(a,b)}(z, w) = p_2t^lam(z - a, w - b) e^{-(i/2) lam (a.w - b.z)}"""
    _require_time(t)
    _require_lambda(lam)
    a, b = _vector(a, n), _vector(b, n)

    def evaluator(z, w):
        z, w = np.broadcast_arrays(_as_block(np.asarray(z, dtype=complex), n),
                                   _as_block(np.asarray(w, dtype=complex), n))
        phase = np.exp(-0.5j * lam * (np.sum(a * w, axis=-1) - np.sum(b * z, axis=-1)))
        return phase * p_twisted_complex(lam, 2.0 * t, z - a, w - b, n)

    return TwistedTransformResult(n=n, t=t, lam=lam,
                                  source={"kind": "reproducing_kernel", "a": a.tolist(), "b": b.tolist()},
                                  evaluator=evaluator)


def global_kernel(z: ComplexGroupPoint, w: ComplexGroupPoint, t: float,
                  quad: Optional[QuadratureSpec] = None) -> complex:
    """Reproducing kernel of the image of H_t on the complexified group, k_2t(conj(w)^{-1} z)"""
    _require_time(t)
    point = complex_multiply(complex_inverse(w.conjugate()), z)
    return k_heat_analytic(point, HeatParams(n=z.n, t=2.0 * t), quad)


def lemma_reproducing_identity(points, t: float, lam: float = 1.0,
                               quad: Optional[QuadratureSpec] = None) -> Dict[str, np.ndarray]:
    """
    int p_2t(z + a, w + b) e^{(i/2) lam (a.w - b.z)} conj(p_2t(z, w)) W_t dz dw against p_2t(a, b)

    The integrand is K_{(-a,-b)} conj(K_{(0,0)}) W_t, so every (a, b) is one column of a
    single tiled pairing. Returns the quadrature values, the closed form and relative
    residuals.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    kernels = [reproducing_kernel(-p[0], -p[1], t, lam) for p in points]
    base = reproducing_kernel(0.0, 0.0, t, lam)
    values = bergman_pairings(kernels, [base], quad)[:, 0]
    expected = np.asarray(p_twisted(lam, 2.0 * t, points[:, 0], points[:, 1]), dtype=float)
    residuals = np.abs(values - expected) / np.abs(expected)
    return {"values": values, "expected": expected, "residuals": residuals}


def lemma_chain_check(t: float, samples: Optional[np.ndarray] = None) -> Dict[str, float]:
    """
    Relative residuals of each step of the closed-form evaluation of the identity above at lambda = 1

    Steps: the hyperbolic identities between coth 2t, tanh 2t, coth 4t and sinh 4t; the
    completed-square form of the integrand; the two Gaussian integrals over (x, u) and
    (y, v); and the final assembly into p_2t(a, b).
    """
    _require_time(t)
    c2, s2 = 1.0 / math.tanh(2 * t), math.tanh(2 * t)
    c4, S4 = 1.0 / math.tanh(4 * t), math.sinh(4 * t)
    residuals = {
        "coth_plus_tanh": abs(c2 + s2 - 2.0 * c4) / (2.0 * c4),
        "coth_minus_tanh": abs(c2 - s2 - 2.0 / S4) * S4 / 2.0,
        "coth_difference": abs(c2 - c4 - 1.0 / S4) * S4,
        "coth_sum": abs(c4 + 1.0 / S4 - c2) / c2,
    }

    if samples is None:
        samples = np.array([[0.3, -0.7, 0.4, 0.1, -0.2, 0.5],
                            [1.0, 0.5, -0.6, 0.8, 0.3, -0.4],
                            [-0.8, 0.2, 1.1, -0.3, 0.7, 0.6]])
    a, b, x, u, y, v = (samples[:, k] for k in range(6))
    z, w = x + 1j * y, u + 1j * v
    integrand = (p_twisted_complex(1.0, 2 * t, z + a, w + b) * np.exp(0.5j * (a * w - b * z))
                 * np.conj(p_twisted_complex(1.0, 2 * t, z, w)) * weight_lambda(t, 1.0, y, v, x, u))
    completed = (math.sinh(2 * t) ** -3 / (16.0 * math.pi ** 3)
                 * np.exp(-0.125 * c2 * (a * a + b * b) + (c4 - c2) * (y * y + v * v)
                          - 0.5 * c2 * ((x + a / 2 + s2 * v) ** 2 + (u + b / 2 - s2 * y) ** 2)
                          - 0.5j * c2 * (a * y + b * v) + 0.5j * (a * u - b * x)))
    residuals["completed_square"] = float(np.max(np.abs(integrand - completed) / np.abs(completed)))

    first, second = [], []
    for a_k, b_k in samples[:, :2]:
        radius = math.sqrt(80.0 / c2)
        nodes, weights = uniform_rule(radius, 241)
        X, U = np.meshgrid(nodes, nodes, indexing='ij')
        numeric = reduce_sum(np.exp(0.5j * (a_k * U - b_k * X) - 0.5 * c2 * (X * X + U * U))
                             * np.outer(weights, weights))
        closed = 2.0 * math.pi * s2 * math.exp(-0.125 * s2 * (a_k ** 2 + b_k ** 2))
        first.append(abs(numeric - closed) / closed)

        radius = math.sqrt(40.0 * S4)
        nodes, weights = uniform_rule(radius, 241)
        Y, V = np.meshgrid(nodes, nodes, indexing='ij')
        numeric = reduce_sum(np.exp(-1j * (a_k * Y + b_k * V) / S4 - (Y * Y + V * V) / S4)
                             * np.outer(weights, weights))
        closed = math.pi * S4 * math.exp(-(a_k ** 2 + b_k ** 2) / (4.0 * S4))
        second.append(abs(numeric - closed) / closed)
    residuals["first_gaussian_integral"] = float(max(first))
    residuals["second_gaussian_integral"] = float(max(second))

    r2 = samples[:, 0] ** 2 + samples[:, 1] ** 2
    assembled = (math.sinh(2 * t) ** -3 / (16.0 * math.pi ** 3) * np.exp(-0.125 * c2 * r2)
                 * 2.0 * math.pi * s2 * np.exp(-0.125 * s2 * r2) * math.pi * S4 * np.exp(-r2 / (4.0 * S4)))
    target = np.asarray(p_twisted(1.0, 2 * t, samples[:, 0], samples[:, 1]), dtype=float)
    residuals["assembly"] = float(np.max(np.abs(assembled - target) / target))
    return residuals


# ---------------------------------------------------------------------------------------
# Inversion


def invert(F: TwistedTransformResult, s: float, output: Lattice,
           quad: Optional[QuadratureSpec] = None) -> SampledField:
    """
    F_s(a, b) = int F(z + a, w + b) e^{(i lam/2)(a.w - b.z)} conj(p_{t+s}^lam(z, w)) W_t^lam dz dw

    For F = H_t^lam f this is f *_lam p_s^lam, which tends to f as s -> 0. Each output node
    is one translated copy of F paired against p_{t+s}; all copies share one tiled pass.

    Args:
        F: Element of the twisted Bergman space, n = 1
        s: Positive regularization time
        output: Two-axis lattice of (a, b) nodes

    Raises:
        TwistedTransformError: If s <= 0, F is not n = 1 or output is not two-dimensional
    """
    if not (math.isfinite(s) and s > 0):
        raise TwistedTransformError("s must be positive")
    if F.n != 1 or output.ndim != 2:
        raise TwistedTransformError("inversion is implemented for n = 1 on a two-axis output lattice")
    kernel = heat_gaussian_transform(s, F.t, F.lam)
    copies = [twisted_translate(F, -p[0], -p[1], F.lam) for p in output.points()]
    values = bergman_pairings(copies, [kernel], quad)[:, 0]
    logger.info(f"invert: s={s}, {output.size} output nodes")
    return SampledField(lattice=output, values=values.reshape(output.shape), n=1, t=F.t, lam=F.lam)


# ---------------------------------------------------------------------------------------
# The global transform and its central slices


def group_heat_transform(f: SampledField, t: float, points, quad: Optional[QuadratureSpec] = None) -> np.ndarray:
    """
    Global transform H_t f(c) = int f(h) k_t(h^{-1} c) dh at complex group points

    points has shape (N, 2n+1) with columns (z, w, zeta). The kernel is the holomorphic
    continuation of k_t; the sum over f's lattice is checked against its doubled-spacing
    subsum within quad.tol relative to the largest value.
    """
    quad = quad or QuadratureSpec(tol=1e-6)
    _require_time(t)
    if not f.is_group_field:
        raise IncompatibleLatticeError("the global transform needs a field on R^{2n+1}")
    check_boundary_decay(f.values, "group_heat_transform")
    n = f.n
    source, weights, coarse_weights = _source_nodes(f)
    hx, hu, hxi = source[:, :n], source[:, n:2 * n], source[:, 2 * n]
    targets = np.atleast_2d(np.asarray(points, dtype=complex))
    if targets.shape[1] != 2 * n + 1:
        raise TwistedTransformError(f"points need {2 * n + 1} columns, got {targets.shape[1]}")
    z, w, zeta = targets[:, :n], targets[:, n:2 * n], targets[:, 2 * n]

    block = chunk_size(len(source))
    fine = np.empty(len(targets), dtype=complex)
    coarse = np.empty(len(targets), dtype=complex)
    for start in range(0, len(targets), block):
        zb, wb, cb = z[start:start + block], w[start:start + block], zeta[start:start + block]
        dz = zb[:, None, :] - hx[None, :, :]
        dw = wb[:, None, :] - hu[None, :, :]
        dzeta = (cb[:, None] - hxi[None, :]
                 - 0.5 * (np.sum(hx[None, :, :] * wb[:, None, :], axis=-1) - np.sum(hu[None, :, :] * zb[:, None, :], axis=-1)))
        r2 = np.sum(dz * dz, axis=-1) + np.sum(dw * dw, axis=-1)
        kernel = heat_kernel_values(r2, dzeta, t, n, quad)
        fine[start:start + block] = reduce_sum(kernel * weights[None, :], axis=1)
        coarse[start:start + block] = reduce_sum(kernel * coarse_weights[None, :], axis=1)

    check_refinement(coarse, fine, quad.tol, "group_heat_transform", scale=_relative_scale(fine))
    return fine


class SeparableHeatTransform:
    """
    H_t f for separable f = G (x) phi, assembled from its central slices

        H_t f(z, w, zeta) = (1/2 pi) int e^{-i lam zeta} e^{-t lam^2} phi_hat(lam) H_t^{-lam} G(z, w) d lam

    The lambda-integral is a midpoint rule over phi_hat's support (or the radius of the
    e^{-t lam^2} envelope). Spatial transforms are closed forms for Gaussian G and
    quadratures otherwise; they are built once per node and shared between threads.
    """

    def __init__(self, f: SeparableField, t: float, quad: Optional[QuadratureSpec] = None,
                 spatial_quad: Optional[QuadratureSpec] = None, growth: float = 0.0):
        _require_time(t)
        self.f = f
        self.t = t
        self.quad = quad or QuadratureSpec(nodes=64, tol=1e-8)
        self.spatial_quad = spatial_quad
        if f.spectral_support is not None:
            low, high = f.spectral_support
        else:
            log_term = math.log(10.0 / self.quad.tol)
            radius = self.quad.radius or (growth + math.sqrt(growth * growth + 4.0 * t * log_term)) / (2.0 * t)
            low, high = -radius, radius
        # even count keeps lambda = 0 off the midpoints of a symmetric interval
        count = self.quad.nodes + self.quad.nodes % 2
        h = (high - low) / count
        self.nodes = low + h * (np.arange(count) + 0.5)
        self.weights = np.full(count, h)
        self.spectrum = f.phi_hat(self.nodes)
        self._spatial: Dict[int, TwistedTransformResult] = {}
        self._lock = threading.Lock()

    def spatial(self, lam: float) -> TwistedTransformResult:
        """H_t^{slice_twist(lam)} G"""
        mu = slice_twist(lam)
        if self.f.gaussian_width is not None:
            return gaussian_transform(self.f.gaussian_width, self.t, mu, self.f.n)
        return heat_transform_lambda(self.f.spatial, self.t, mu, self.spatial_quad)

    def _node_transform(self, k: int) -> TwistedTransformResult:
        with self._lock:
            if k not in self._spatial:
                self._spatial[k] = self.spatial(float(self.nodes[k]))
            return self._spatial[k]

    def slice(self, lam: float, z, w, eta: float = 0.0) -> np.ndarray:
        """int e^{i lam xi} H_t f(z, w, xi + i eta) d xi = e^{lam eta} e^{-t lam^2} phi_hat(lam) H_t^{-lam} G(z, w)"""
        factor = math.exp(lam * eta - self.t * lam * lam) * complex(self.f.phi_hat(lam))
        return factor * self.spatial(lam).evaluate(z, w)

    def evaluate(self, z, w, zeta) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=complex)
        total = np.zeros(zeta.shape, dtype=complex)
        for k, lam in enumerate(self.nodes):
            if self.spectrum[k] == 0:
                continue
            total = total + (self.weights[k] * self.spectrum[k] * math.exp(-self.t * lam * lam)
                             * np.exp(-1j * lam * zeta) * self._node_transform(k).evaluate(z, w))
        return total / (2.0 * math.pi)


def spectral_factorization_check(f: SeparableField, t: float, lam: float,
                                 quad: Optional[QuadratureSpec] = None, eta: float = 0.0,
                                 points: Optional[np.ndarray] = None,
                                 xi_radius: float = 10.0, xi_nodes: int = 41) -> float:
    """
    Max relative residual of int e^{i lam xi} H_t f(z, w, xi + i eta) d xi = e^{lam eta} e^{-t lam^2} H_t^{-lam}(f^lam)(z, w)

    The left side integrates the global transform, computed by direct quadrature against
    the continued heat kernel on f's samples, over a xi-trapezoid; the right side applies
    the quadrature H_t^{-lam} to the slice phi_hat(lam) G. f is sampled on its spatial
    lattice times the same grid on the central axis.

    Raises:
        TruncationError: If H_t f has not decayed at the ends of the xi-range
    """
    quad = quad or QuadratureSpec(nodes=33, tol=1e-6)
    _require_time(t)
    _require_lambda(lam)
    n = f.n
    if points is None:
        points = np.array([[0.3 + 0.2j, -0.1 + 0.25j], [-0.4 - 0.1j, 0.2 + 0.1j]])
    points = np.atleast_2d(np.asarray(points, dtype=complex))
    if points.shape[1] != 2 * n:
        raise TwistedTransformError(f"points need {2 * n} columns (z, w)")

    lattice = f.spatial.lattice
    field = f.to_field([lattice.origin[0], lattice.spacing[0], lattice.counts[0]])
    xi, xi_weights = uniform_rule(xi_radius, odd_count(xi_nodes))
    targets = np.concatenate([
        np.repeat(points, len(xi), axis=0),
        np.tile(xi + 1j * eta, len(points))[:, None],
    ], axis=1)
    values = group_heat_transform(field, t, targets, quad).reshape(len(points), len(xi))
    for row in values:
        check_boundary_decay(row, "spectral_factorization_check: xi-range")
    lhs = reduce_sum(values * (np.exp(1j * lam * xi) * xi_weights)[None, :], axis=1)

    transform = heat_transform_lambda(f.spatial, t, slice_twist(lam), quad)
    factor = math.exp(lam * eta - t * lam * lam) * complex(f.phi_hat(lam))
    rhs = factor * transform.evaluate(points[:, :n], points[:, n:])
    residual = float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))
    logger.info(f"spectral factorization: t={t}, lambda={lam}, eta={eta}, residual {residual:.2e}")
    return residual
