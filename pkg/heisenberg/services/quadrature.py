"""
Quadrature primitives shared by the kernel, transform and weight services.

Every integral in the toolkit is a uniform (trapezoid) sum over a truncated box or a
Gauss-Hermite sum. Reductions go through :func:`reduce_sum`, which always sums a
C-contiguous array along fixed axes; numpy's add.reduce then uses its pairwise tree
(blocks of eight, halved recursively), so results are bitwise reproducible for a fixed
QuadratureSpec regardless of how the work was scheduled.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from heisenberg.config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class QuadratureError(Exception):
    """Base class for quadrature failures"""
    pass


class TruncationError(QuadratureError):
    """Raised when an integrand has not decayed at the truncation boundary"""
    pass


class ConvergenceError(QuadratureError):
    """Raised when successive refinements disagree beyond tolerance"""
    pass


def uniform_rule(radius: float, count: int, center: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Trapezoid nodes and weights on [center - radius, center + radius]

    Args:
        radius: Half width of the interval
        count: Number of nodes, at least 2
        center: Midpoint of the interval

    Returns:
        Tuple of (nodes, weights)
    """
    if count < 2:
        raise ValueError("uniform rule needs at least two nodes")
    nodes = np.linspace(center - radius, center + radius, count)
    h = 2.0 * radius / (count - 1)
    weights = np.full(count, h)
    weights[0] = weights[-1] = 0.5 * h
    return nodes, weights


def envelope_radius(a: float, b: float, tol: float) -> float:
    """Smallest R with exp(-a R^2 + b R) <= tol, for a Gaussian envelope with linear growth b"""
    if a <= 0:
        raise ValueError("envelope needs a positive quadratic coefficient")
    log_term = math.log(1.0 / tol)
    b = max(b, 0.0)
    return (b + math.sqrt(b * b + 4.0 * a * log_term)) / (2.0 * a)


def odd_count(count: int) -> int:
    """Round up to an odd node count so symmetric grids contain their center"""
    count = max(int(count), 3)
    return count if count % 2 == 1 else count + 1


def reduce_sum(values: np.ndarray, axis=None):
    """Deterministic sum (pairwise tree of numpy add.reduce on contiguous data)"""
    return np.ascontiguousarray(values).sum(axis=axis)


def boundary_ratio(values: np.ndarray) -> float:
    """max |value| on the faces of the array divided by max |value| overall"""
    magnitude = np.abs(np.asarray(values))
    peak = float(magnitude.max()) if magnitude.size else 0.0
    if peak == 0.0:
        return 0.0
    edge = 0.0
    for axis in range(magnitude.ndim):
        if magnitude.shape[axis] < 2:
            continue
        first = np.take(magnitude, 0, axis=axis)
        last = np.take(magnitude, -1, axis=axis)
        edge = max(edge, float(first.max()), float(last.max()))
    return edge / peak


def check_boundary_decay(values: np.ndarray, what: str, ratio: Optional[float] = None) -> float:
    """
    Raise TruncationError unless boundary values are below ratio times the interior peak.

    Returns the measured ratio.
    """
    ratio = settings.boundary_decay_ratio if ratio is None else ratio
    measured = boundary_ratio(values)
    if measured >= ratio:
        raise TruncationError(
            f"{what}: boundary/peak ratio {measured:.3e} is not below {ratio:.1e}; enlarge the box"
        )
    return measured


def check_refinement(coarse, fine, tol: float, what: str, scale=None) -> float:
    """
    Compare two refinement levels; raise ConvergenceError when they disagree

    Without `scale` the gap is measured against max(1, max |fine|); an explicit scale
    (scalar or broadcastable array) gives entrywise relative gaps.
    """
    coarse = np.asarray(coarse)
    fine = np.asarray(fine)
    if not fine.size:
        return 0.0
    if scale is None:
        scale = max(1.0, float(np.max(np.abs(fine))))
    scale = np.maximum(np.asarray(scale, dtype=float), 1e-300)
    disagreement = float(np.max(np.abs(fine - coarse) / scale))
    if disagreement > tol:
        raise ConvergenceError(f"{what}: refinements disagree by {disagreement:.3e} (tol {tol:.1e})")
    return disagreement


def chunk_size(per_item: int) -> int:
    """Number of items whose intermediate arrays stay within settings.chunk_elements"""
    return max(1, settings.chunk_elements // max(1, per_item))


def parallel_map(func: Callable[[T], R], items: Sequence[T], max_workers: Optional[int] = None) -> List[R]:
    """
    Map func over items with a thread pool, keeping input order.

    numpy releases the GIL inside its kernels, so threads overlap the heavy work; each
    item is reduced independently, so the result does not depend on the worker count.
    """
    workers = settings.max_workers if max_workers is None else max_workers
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as executor:
        return list(executor.map(func, items))


def trapezoid_nd(values: np.ndarray, spacings: Iterable[float]):
    """Uniform sum times cell volume over all axes (integrands are assumed decayed at the faces)"""
    return reduce_sum(values) * float(np.prod(list(spacings)))
