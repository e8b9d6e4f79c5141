"""
Heisenberg group calculus: group law, inverse, polar decomposition of the
complexification, Haar-measure convolution of sampled fields and central Fourier slices.

Coordinates are exponential coordinates (x, u, xi) with the law

    (x, u, xi)(x', u', xi') = (x + x', u + u', (x.u' - u.x')/2 + xi + xi').

The same formula, with complex entries, is the law of the complexified group.
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np

from heisenberg.config import settings
from heisenberg.models.field import Lattice, SampledField
from heisenberg.models.group import ComplexGroupPoint, GroupPoint
from heisenberg.models.params import QuadratureSpec
from heisenberg.services.quadrature import (
    TruncationError, check_boundary_decay, check_refinement, chunk_size, reduce_sum
)

logger = logging.getLogger(__name__)


class GroupError(Exception):
    """Base class for group-calculus errors"""
    pass


class DimensionMismatchError(GroupError):
    """Raised when two points or fields live in different dimensions"""
    pass


class IncompatibleLatticeError(GroupError):
    """Raised when two sampled fields cannot be combined on one lattice"""
    pass


def _dot(a, b):
    return np.sum(np.asarray(a) * np.asarray(b), axis=-1)


def group_law(x1, u1, xi1, x2, u2, xi2):
    """Vectorized group law on arrays with trailing axis n; works for complex entries"""
    x1, u1, x2, u2 = (np.asarray(a) for a in (x1, u1, x2, u2))
    central = 0.5 * (_dot(x1, u2) - _dot(u1, x2)) + xi1 + xi2
    return x1 + x2, u1 + u2, central


def multiply(p: GroupPoint, q: GroupPoint) -> GroupPoint:
    """Group product p q"""
    if p.n != q.n:
        raise DimensionMismatchError(f"cannot multiply points of dimension {p.n} and {q.n}")
    x, u, xi = group_law(*p.arrays(), *q.arrays())
    return GroupPoint.from_arrays(x, u, xi)


def inverse(p: GroupPoint) -> GroupPoint:
    """(x, u, xi)^{-1} = (-x, -u, -xi)"""
    return GroupPoint(x=[-c for c in p.x], u=[-c for c in p.u], xi=-p.xi)


def complex_multiply(c1: ComplexGroupPoint, c2: ComplexGroupPoint) -> ComplexGroupPoint:
    """Holomorphic group law on the complexification"""
    if c1.n != c2.n:
        raise DimensionMismatchError(f"cannot multiply points of dimension {c1.n} and {c2.n}")
    z, w, zeta = group_law(*c1.arrays(), *c2.arrays())
    return ComplexGroupPoint.from_arrays(z, w, zeta)


def complex_inverse(c: ComplexGroupPoint) -> ComplexGroupPoint:
    return ComplexGroupPoint(z=[-a for a in c.z], w=[-a for a in c.w], zeta=-c.zeta)


def polar_decompose(c: ComplexGroupPoint) -> Tuple[GroupPoint, GroupPoint]:
    """
    Split c = h exp(iX) with h real and X in the Lie algebra.

    The forward map sends ((x,u,xi), (y,v,e)) to (x+iy, u+iv, xi + i e + (i/2)(x.v - u.y)),
    so X = (y, v, eta - (x.v - u.y)/2).
    """
    z, w, zeta = c.arrays()
    x, y = z.real, z.imag
    u, v = w.real, w.imag
    h = GroupPoint.from_arrays(x, u, zeta.real)
    X = GroupPoint.from_arrays(y, v, zeta.imag - 0.5 * (float(_dot(x, v)) - float(_dot(u, y))))
    return h, X


def polar_recompose(h: GroupPoint, X: GroupPoint) -> ComplexGroupPoint:
    """h exp(iX)"""
    if h.n != X.n:
        raise DimensionMismatchError(f"polar factors of dimension {h.n} and {X.n}")
    x, u, xi = h.arrays()
    y, v, e = X.arrays()
    zeta = xi + 1j * e + 0.5j * (float(_dot(x, v)) - float(_dot(u, y)))
    return ComplexGroupPoint.from_arrays(x + 1j * y, u + 1j * v, zeta)


def _split_group_coordinates(points: np.ndarray, n: int):
    return points[..., :n], points[..., n:2 * n], points[..., 2 * n]


def _join_group_coordinates(x, u, xi, n: int):
    return [x[..., j] for j in range(n)] + [u[..., j] for j in range(n)] + [xi]


def field_evaluator(g: SampledField) -> Callable:
    if g.evaluator is not None:
        return g.evaluator
    from scipy.interpolate import RegularGridInterpolator

    logger.debug("convolve: second factor has no evaluator, using cubic interpolation")
    real = RegularGridInterpolator(g.lattice.axes(), g.values.real, method="cubic",
                                   bounds_error=False, fill_value=0.0)
    imag = RegularGridInterpolator(g.lattice.axes(), g.values.imag, method="cubic",
                                   bounds_error=False, fill_value=0.0)

    def evaluate(*coords):
        stacked = np.stack([np.asarray(c, dtype=float) for c in coords], axis=-1)
        return real(stacked) + 1j * imag(stacked)

    return evaluate


def coarse_mask(lattice: Lattice) -> np.ndarray:
    """Nodes with even index on every axis, i.e. the lattice with doubled spacing"""
    masks = [np.arange(m) % 2 == 0 for m in lattice.counts]
    return np.logical_and.reduce(np.meshgrid(*masks, indexing='ij')).ravel()


def _convolution_values(f: SampledField, g: SampledField, quad: QuadratureSpec,
                        targets: np.ndarray) -> np.ndarray:
    if not (f.is_group_field and g.is_group_field):
        raise IncompatibleLatticeError("group convolution needs fields on R^{2n+1}")
    if f.n != g.n:
        raise DimensionMismatchError(f"fields of dimension {f.n} and {g.n}")
    if not f.lattice.compatible_with(g.lattice):
        raise IncompatibleLatticeError("f and g must share lattice spacings")
    check_boundary_decay(f.values, "convolve: first factor")
    check_boundary_decay(g.values, "convolve: second factor")

    n = f.n
    evaluate_g = field_evaluator(g)
    source = f.lattice.points()
    weights = f.values.ravel() * f.lattice.cell_volume
    coarse_weights = np.where(coarse_mask(f.lattice), weights * 2 ** f.lattice.ndim, 0.0)
    keep = np.abs(weights) > 0.0
    source, weights, coarse_weights = source[keep], weights[keep], coarse_weights[keep]
    hx, hu, hxi = _split_group_coordinates(source, n)

    block = chunk_size(len(source))
    fine = np.empty(len(targets), dtype=complex)
    coarse = np.empty(len(targets), dtype=complex)
    for start in range(0, len(targets), block):
        batch = targets[start:start + block]
        px, pu, pxi = _split_group_coordinates(batch, n)
        # h^{-1} p for every (target, source) pair
        dx, du, dxi = group_law(-hx[None, :, :], -hu[None, :, :], -hxi[None, :],
                                px[:, None, :], pu[:, None, :], pxi[:, None])
        values = evaluate_g(*_join_group_coordinates(dx, du, dxi, n))
        fine[start:start + block] = reduce_sum(values * weights[None, :], axis=1)
        coarse[start:start + block] = reduce_sum(values * coarse_weights[None, :], axis=1)

    check_refinement(coarse, fine, quad.tol, "convolve")
    logger.debug(f"convolve: {len(targets)} targets against {len(source)} source nodes")
    return fine


def convolve(f: SampledField, g: SampledField, quad: QuadratureSpec,
             output: Optional[Lattice] = None) -> SampledField:
    """
    Group convolution (f * g)(p) = int f(h) g(h^{-1} p) dh by direct quadrature.

    f supplies the quadrature samples on its lattice; g is evaluated off-lattice through its
    evaluator (or a cubic interpolant). The result is sampled on `output`, default f's
    lattice. The doubled-spacing sub-lattice gives a second estimate; the two must agree
    within quad.tol relative to the largest value.
    """
    out_lattice = output or f.lattice
    values = _convolution_values(f, g, quad, out_lattice.points())
    return SampledField(lattice=out_lattice, values=values.reshape(out_lattice.shape),
                        n=f.n, t=f.t, lam=f.lam)


def convolve_at(f: SampledField, g: SampledField, quad: QuadratureSpec, points) -> np.ndarray:
    """(f * g) at scattered points of shape (N, 2n+1)"""
    return _convolution_values(f, g, quad, np.atleast_2d(np.asarray(points, dtype=float)))


def slice_twist(lam: float) -> float:
    """
    Spectral parameter whose twisted convolution matches group convolution under the slice.

    With F^lam = int e^{i lam xi} F dxi, (F * G)^lam = F^lam *_{-lam} G^lam.
    """
    return -lam


def central_slice(F: SampledField, lam: float) -> SampledField:
    """F^lam(x, u) = int e^{i lam xi} F(x, u, xi) dxi over the last lattice axis"""
    if not F.is_group_field:
        raise IncompatibleLatticeError("central slice needs a field on R^{2n+1}")
    magnitude = np.abs(F.values)
    edge = max(float(magnitude[..., 0].max()), float(magnitude[..., -1].max()))
    peak = float(magnitude.max())
    if peak > 0 and edge >= settings.boundary_decay_ratio * peak:
        raise TruncationError(
            f"central_slice: xi-domain too short, edge/peak {edge / peak:.3e} at lambda={lam}"
        )
    xi_axis = F.lattice.axes()[-1]
    phase = np.exp(1j * lam * xi_axis)
    values = reduce_sum(F.values * phase, axis=-1) * F.lattice.spacing[-1]
    lattice = Lattice(origin=F.lattice.origin[:-1], spacing=F.lattice.spacing[:-1],
                      counts=F.lattice.counts[:-1])
    return SampledField(lattice=lattice, values=values, n=F.n, t=F.t, lam=lam)


def translate(F: SampledField, h: GroupPoint) -> SampledField:
    """Left translate (tau(h) F)(p) = F(h^{-1} p); needs F's evaluator"""
    if F.evaluator is None:
        raise IncompatibleLatticeError("translation needs a field with an evaluator")
    if h.n != F.n:
        raise DimensionMismatchError(f"translating a dimension {F.n} field by a dimension {h.n} point")
    n = F.n
    hx, hu, hxi = h.arrays()
    F_eval = F.evaluator

    def evaluate(*coords):
        qx = np.stack(coords[:n], axis=-1)
        qu = np.stack(coords[n:2 * n], axis=-1)
        sx, su, sxi = group_law(-hx, -hu, -hxi, qx, qu, coords[-1])
        return F_eval(*_join_group_coordinates(sx, su, sxi, n))

    return SampledField.from_function(evaluate, F.lattice, n, t=F.t, lam=F.lam)
