"""Hermite function basis: evaluation, multi-index enumeration, quadrature.

The basis consists of the L2(R)-orthonormal Hermite functions

    h_0(t) = pi**(-1/4) * exp(-t**2 / 2),
    h_{k+1}(t) = sqrt(2/(k+1)) * t * h_k(t) - sqrt(k/(k+1)) * h_{k-1}(t),

tensorized over axes in d dimensions, h_n(x) = prod_i h_{n_i}(x_i).  The
recurrence is evaluated in the function normalization, which stays bounded
(|h_k| < 1) for all degrees, so there is no overflow for large k.

Truncation keeps all multi-indices with total degree |n| <= K (a simplex,
not a per-axis box), matching the grading by (2|n| + d) used by the
Sobolev norms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from math import comb, sqrt, pi

import numpy as np
from numpy.polynomial.hermite import hermgauss

#: hard cap on tensor-product quadrature size
MAX_QUADRATURE_NODES = 10**6


def hermite_values_1d(max_degree: int, t: np.ndarray) -> np.ndarray:
    """Table of 1-d Hermite function values.

    Parameters
    ----------
    max_degree : int
        Highest degree K to evaluate.
    t : ndarray
        Evaluation points, any shape.

    Returns
    -------
    ndarray of shape (K + 1,) + t.shape with row k holding h_k(t).
    """
    t = np.asarray(t, dtype=float)
    out = np.empty((max_degree + 1,) + t.shape)
    out[0] = pi ** (-0.25) * np.exp(-0.5 * t * t)
    if max_degree >= 1:
        out[1] = sqrt(2.0) * t * out[0]
    for k in range(1, max_degree):
        out[k + 1] = sqrt(2.0 / (k + 1)) * t * out[k] - sqrt(k / (k + 1.0)) * out[k - 1]
    return out


def total_degree(n: tuple[int, ...]) -> int:
    """Total degree |n| of a multi-index (plain tuple of ints)."""
    return sum(n)


@dataclass(frozen=True)
class TruncationScheme:
    """Simplex truncation of the Hermite basis in d variables.

    Retains every multi-index n with total degree |n| <= max_degree; the
    basis size is binomial(max_degree + dimension, dimension).
    """

    dimension: int
    max_degree: int

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.max_degree < 0:
            raise ValueError("max_degree must be >= 0")

    @property
    def basis_size(self) -> int:
        return comb(self.max_degree + self.dimension, self.dimension)

    @cached_property
    def basis(self) -> tuple[tuple[int, ...], ...]:
        return tuple(enumerate_basis(self))

    @cached_property
    def index(self) -> dict[tuple[int, ...], int]:
        """Multi-index tuple -> position in the enumeration."""
        return {n: i for i, n in enumerate(self.basis)}

    @cached_property
    def degrees(self) -> np.ndarray:
        """Total degree |n| per basis entry, aligned with the enumeration."""
        return np.array([sum(n) for n in self.basis], dtype=int)


def _level(dimension: int, k: int):
    """Multi-indices with |n| = k, descending lexicographic."""
    if dimension == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in _level(dimension - 1, k - first):
            yield (first,) + rest


def enumerate_basis(scheme: TruncationScheme) -> list[tuple[int, ...]]:
    """Graded lexicographic enumeration of the retained multi-indices.

    Indices are ordered by total degree, and within one degree level
    lexicographically with the first axis most significant, e.g. for
    d=2, K=1: (0,0), (1,0), (0,1).
    """
    out: list[tuple[int, ...]] = []
    for k in range(scheme.max_degree + 1):
        out.extend(_level(scheme.dimension, k))
    return out


def eval_hermite(n: tuple[int, ...], x) -> float | np.ndarray:
    """Evaluate the tensor Hermite function h_n at one or more points.

    Parameters
    ----------
    n : tuple of ints
        Multi-index, one entry per axis.
    x : array_like
        A single point of shape (d,) or a batch of shape (m, d).

    Returns
    -------
    float for a single point, ndarray of shape (m,) for a batch.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != len(n):
        raise ValueError(f"point dimension {x.shape[1]} != multi-index length {len(n)}")
    vals = np.ones(x.shape[0])
    for axis, k in enumerate(n):
        vals = vals * hermite_values_1d(k, x[:, axis])[k]
    return vals if vals.size > 1 else float(vals[0])


def hermite_design_matrix(scheme: TruncationScheme, points: np.ndarray) -> np.ndarray:
    """Matrix H with H[i, q] = h_{n_i}(points[q]) over the retained basis.

    points has shape (m, d).  Column q holds all basis function values at
    one point, so H.T @ c evaluates the expansion with coefficients c.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != scheme.dimension:
        raise ValueError("points have wrong dimension for scheme")
    tables = [hermite_values_1d(scheme.max_degree, points[:, a])
              for a in range(scheme.dimension)]
    H = np.empty((scheme.basis_size, points.shape[0]))
    for i, n in enumerate(scheme.basis):
        row = tables[0][n[0]]
        for a in range(1, scheme.dimension):
            row = row * tables[a][n[a]]
        H[i] = row
    return H


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor Gauss-Hermite rule rewritten for plain integrals over R^d.

    nodes has shape (m, d); weights absorb the Gaussian factor of the
    classical rule (total weights w_j * exp(u_j**2) per axis, optionally
    under the substitution x = scale * u), so sum_j weights[j] * g(nodes[j])
    approximates the unweighted integral of g.
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int
    scale: float = 1.0

    def integrate(self, f) -> float:
        """Integrate a callable taking an (m, d) array of points."""
        vals = np.asarray(f(self.nodes), dtype=float)
        res = float(self.weights @ vals)
        if not np.isfinite(res):
            raise ValueError("quadrature produced a non-finite result "
                             "(integrand grows faster than the Gaussian weight)")
        return res


def gauss_hermite_rule(dimension: int, order: int, scale: float = 1.0) -> QuadratureRule:
    """Build a tensor-product Gauss-Hermite rule of the given 1-d order.

    With scale=1 the rule integrates (polynomial of degree <= 2*order-1)
    times exp(-|x|^2) exactly, which covers products of two retained
    Hermite functions.  With scale=sqrt(2) it integrates polynomial times
    exp(-|x|^2/2) exactly, the right pattern for projecting polynomials
    and Gaussian-decay profiles onto the basis.
    """
    if dimension > 3:
        raise ValueError("tensor quadrature limited to d <= 3")
    if order ** dimension > MAX_QUADRATURE_NODES:
        raise ValueError(f"tensor rule would need {order ** dimension} nodes "
                         f"(cap {MAX_QUADRATURE_NODES})")
    u, w = hermgauss(order)
    nodes_1d = scale * u
    weights_1d = scale * w * np.exp(u * u)
    if not np.all(np.isfinite(weights_1d)):
        raise ValueError(f"quadrature order {order} overflows the total weights")
    grids = np.meshgrid(*([nodes_1d] * dimension), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    wgrids = np.meshgrid(*([weights_1d] * dimension), indexing="ij")
    weights = np.ones(nodes.shape[0])
    for g in wgrids:
        weights = weights * g.ravel()
    return QuadratureRule(nodes=nodes, weights=weights, order=order, scale=scale)


def default_projection_rule(scheme: TruncationScheme) -> QuadratureRule:
    """Projection rule at the default order 2K + 16 with scale 1.

    Exact (to rounding) for integrands f * h_n when f is a polynomial
    times exp(-|x|^2/2), the Gaussian-dominated decay class the projector
    is documented for; entire perturbations of that class converge
    spectrally.  Polynomial integrands without decay want scale sqrt(2)
    instead.
    """
    return gauss_hermite_rule(scheme.dimension, 2 * scheme.max_degree + 16)
