"""
Special functions: Hermite and Laguerre polynomials, Hermite functions, special
Hermite functions on R^{2n} and their holomorphic extension, Gauss-Hermite rules.

Special Hermite functions at lambda = 1 are the Fourier-Wigner integrals

    Phi_{a,b}(x, u) = (2 pi)^{-n/2} int e^{i x.xi} Phi_a(xi + u/2) Phi_b(xi - u/2) dxi.

Completing the square (xi = s + i z/2) turns each coordinate factor into

    (2 pi)^{-1/2} N_a N_b e^{-(z^2 + w^2)/4} int e^{-s^2} H_a(s + (iz + w)/2) H_b(s + (iz - w)/2) ds,

a polynomial against e^{-s^2}, so a Gauss-Hermite rule with (a + b)//2 + 1 nodes is exact
and the same expression is the holomorphic extension to complex (z, w).
General lambda uses the dilation |lambda|^{n/2} Phi(sqrt|lambda| x, sqrt|lambda| u), with
u -> -u for lambda < 0.
"""

import csv
import io
import logging
import math
from functools import lru_cache
from typing import Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaln

from heisenberg.models.params import MultiIndex

logger = logging.getLogger(__name__)

IndexLike = Union[MultiIndex, Sequence[int], int]


class SpecialFunctionError(Exception):
    """Raised for invalid special-function arguments"""
    pass


def _entries(alpha: IndexLike) -> Tuple[int, ...]:
    if isinstance(alpha, MultiIndex):
        return tuple(alpha.entries)
    if isinstance(alpha, (int, np.integer)):
        return (int(alpha),)
    entries = tuple(int(a) for a in alpha)
    if any(a < 0 for a in entries):
        raise SpecialFunctionError("multi-index entries must be non-negative")
    return entries


def hermite_poly(k: int, x):
    """Physicists' Hermite polynomial H_k(x) by the three-term recurrence; x real or complex"""
    if k < 0:
        raise SpecialFunctionError("Hermite degree must be non-negative")
    x = np.asarray(x)
    previous = np.ones_like(x, dtype=np.result_type(x, float))
    if k == 0:
        return previous
    current = 2.0 * x * previous
    for j in range(1, k):
        previous, current = current, 2.0 * x * current - 2.0 * j * previous
    return current


def hermite_poly_table(kmax: int, x) -> np.ndarray:
    """H_0..H_kmax stacked along a new leading axis"""
    x = np.asarray(x)
    table = np.empty((kmax + 1,) + x.shape, dtype=np.result_type(x, float))
    table[0] = 1.0
    if kmax >= 1:
        table[1] = 2.0 * x
    for j in range(1, kmax):
        table[j + 1] = 2.0 * x * table[j] - 2.0 * j * table[j - 1]
    return table


def laguerre_poly(k: int, a: float, x):
    """Generalized Laguerre polynomial L_k^a(x) by recurrence; x may be complex"""
    if k < 0:
        raise SpecialFunctionError("Laguerre degree must be non-negative")
    x = np.asarray(x)
    previous = np.ones_like(x, dtype=np.result_type(x, float))
    if k == 0:
        return previous
    current = 1.0 + a - x
    for j in range(1, k):
        previous, current = current, ((2 * j + 1 + a - x) * current - (j + a) * previous) / (j + 1)
    return current


def hermite_normalization(k: int) -> float:
    """N_k = (2^k k! sqrt(pi))^{-1/2}"""
    return math.exp(-0.5 * (k * math.log(2.0) + gammaln(k + 1) + 0.5 * math.log(math.pi)))


def _hermite_function_1d(k: int, x):
    # Normalized recurrence; avoids the overflow of H_k(x) e^{-x^2/2} at large k
    x = np.asarray(x)
    previous = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    if k == 0:
        return previous
    current = math.sqrt(2.0) * x * previous
    for j in range(1, k):
        previous, current = current, math.sqrt(2.0 / (j + 1)) * x * current - math.sqrt(j / (j + 1)) * previous
    return current


def hermite_function(alpha: IndexLike, xi):
    """
    L^2-normalized product Hermite function Phi_alpha(xi).

    xi has shape (..., n) with n = len(alpha); for n = 1 a bare array is accepted.
    """
    entries = _entries(alpha)
    xi = np.asarray(xi)
    if len(entries) == 1 and (xi.ndim == 0 or xi.shape[-1] != 1):
        return _hermite_function_1d(entries[0], xi)
    if xi.shape[-1] != len(entries):
        raise SpecialFunctionError(f"point dimension {xi.shape[-1]} does not match multi-index length {len(entries)}")
    result = np.ones(xi.shape[:-1], dtype=np.result_type(xi, float))
    for j, a in enumerate(entries):
        result = result * _hermite_function_1d(a, xi[..., j])
    return result


@lru_cache(maxsize=None)
def _gauss_hermite_table(m: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.hermite.hermgauss(m)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_hermite_nodes(m: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    m-point Gauss-Hermite rule for the weight e^{-x^2}, exact up to degree 2m - 1.

    Tables are computed once per m and returned read-only.
    """
    if m < 2:
        raise SpecialFunctionError("Gauss-Hermite rule needs at least 2 nodes")
    return _gauss_hermite_table(int(m))


def dump_nodes(m: int) -> str:
    """Gauss-Hermite table as CSV text with header k,node,weight"""
    nodes, weights = gauss_hermite_nodes(m)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["k", "node", "weight"])
    for k, (node, weight) in enumerate(zip(nodes, weights)):
        writer.writerow([k, f"{node:.17g}", f"{weight:.17g}"])
    return buffer.getvalue()


def _special_hermite_1d(a: int, b: int, z, w):
    """Fourier-Wigner factor at lambda = 1 for one coordinate, holomorphic in (z, w)"""
    m = max(2, (a + b) // 2 + 1)
    s, weights = gauss_hermite_nodes(m)
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    shift_a = (1j * z + w)[..., None] / 2.0
    shift_b = (1j * z - w)[..., None] / 2.0
    integrand = hermite_poly(a, s + shift_a) * hermite_poly(b, s + shift_b)
    integral = integrand @ weights
    prefactor = hermite_normalization(a) * hermite_normalization(b) / math.sqrt(2.0 * math.pi)
    return prefactor * np.exp(-(z * z + w * w) / 4.0) * integral


def special_hermite_analytic(alpha: IndexLike, beta: IndexLike, lam: float, z, w):
    """
    Holomorphic extension of Phi^lambda_{alpha,beta} to C^n x C^n.

    z, w have shape (..., n); for n = 1 bare arrays are accepted.
    """
    if lam == 0:
        raise SpecialFunctionError("special Hermite functions need lambda != 0")
    a_entries, b_entries = _entries(alpha), _entries(beta)
    if len(a_entries) != len(b_entries):
        raise SpecialFunctionError("alpha and beta must have the same length")
    n = len(a_entries)
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if n == 1 and (z.ndim == 0 or z.shape[-1] != 1):
        z = z[..., None]
        w = w[..., None]
    scale = math.sqrt(abs(lam))
    sign = 1.0 if lam > 0 else -1.0
    result = np.full(z.shape[:-1], abs(lam) ** (n / 2.0), dtype=complex)
    for j in range(n):
        result = result * _special_hermite_1d(a_entries[j], b_entries[j], scale * z[..., j], sign * scale * w[..., j])
    return result


def special_hermite(alpha: IndexLike, beta: IndexLike, lam: float, x, u):
    """Phi^lambda_{alpha,beta}(x, u) on real points; complex valued"""
    return special_hermite_analytic(alpha, beta, lam, np.asarray(x, dtype=float), np.asarray(u, dtype=float))


def twisted_convolution_constant(lam: float, n: int = 1) -> float:
    """c with Phi_{a,b} *_lam Phi_{m,n} = c delta_{b,m} Phi_{a,n}; equals (2 pi / |lam|)^{n/2}"""
    return (2.0 * math.pi / abs(lam)) ** (n / 2.0)


def heat_expansion_constant(lam: float, n: int = 1) -> float:
    """c with p_t^lam = c sum_mu e^{-(2|mu|+n)|lam| t} Phi^lam_{mu,mu}; equals (|lam| / 2 pi)^{n/2}"""
    return (abs(lam) / (2.0 * math.pi)) ** (n / 2.0)


def heat_expansion_partial_sum(M: int, lam: float, t: float, x, u):
    """Partial sum of the special Hermite expansion of p_t^lam over |mu| <= M, n = 1"""
    total = np.zeros(np.broadcast(np.asarray(x), np.asarray(u)).shape, dtype=complex)
    for mu in range(M + 1):
        total = total + math.exp(-(2 * mu + 1) * abs(lam) * t) * special_hermite(mu, mu, lam, x, u)
    return heat_expansion_constant(lam) * total
