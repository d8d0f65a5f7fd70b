"""Banded operator matrices on the truncated basis and the translation group.

Matrix entries follow the 1-d ladder identities

    d/dt h_k = sqrt(k/2) h_{k-1} - sqrt((k+1)/2) h_{k+1},
    t * h_k  = sqrt((k+1)/2) h_{k+1} + sqrt(k/2) h_{k-1},

acting on one axis of the tensor basis.  Couplings that would leave the
truncation simplex are dropped (Galerkin semantics), so identities that
mix degrees hold exactly only on interior degrees.

The translation group tau_x (shift by x, (tau_x f)(y) = f(y - x)) has
generator -sum_i x_i d_i and is realized as a matrix exponential.  The
derivative matrix is antisymmetric, hence the translation matrix is
orthogonal and norm-preserving in S_0.
"""

from __future__ import annotations

from math import sqrt

import numpy as np
from scipy.linalg import expm

from .hermite import TruncationScheme
from .sobolev import CoefficientVector, norm_p


def derivative_matrix(axis: int, scheme: TruncationScheme) -> np.ndarray:
    """Matrix of the partial derivative along the given axis (0-based).

    Couples only multi-indices differing by +-1 in that axis; applying it
    to projected coefficients approximates projecting the derivative.
    """
    _check_axis(axis, scheme)
    size = scheme.basis_size
    D = np.zeros((size, size))
    index = scheme.index
    for n, col in index.items():
        k = n[axis]
        if k >= 1:
            lower = n[:axis] + (k - 1,) + n[axis + 1:]
            D[index[lower], col] = sqrt(k / 2.0)
        upper = n[:axis] + (k + 1,) + n[axis + 1:]
        row = index.get(upper)
        if row is not None:
            D[row, col] = -sqrt((k + 1) / 2.0)
    return D


def multiplication_matrix(axis: int, scheme: TruncationScheme) -> np.ndarray:
    """Matrix of multiplication by the coordinate x_axis (symmetric, banded)."""
    _check_axis(axis, scheme)
    size = scheme.basis_size
    M = np.zeros((size, size))
    index = scheme.index
    for n, col in index.items():
        k = n[axis]
        if k >= 1:
            lower = n[:axis] + (k - 1,) + n[axis + 1:]
            M[index[lower], col] = sqrt(k / 2.0)
        upper = n[:axis] + (k + 1,) + n[axis + 1:]
        row = index.get(upper)
        if row is not None:
            M[row, col] = sqrt((k + 1) / 2.0)
    return M


def hermite_operator_matrix(scheme: TruncationScheme) -> np.ndarray:
    """sum_i (M_i^2 - d_i^2); diagonal (2|n| + d) away from the boundary."""
    size = scheme.basis_size
    H = np.zeros((size, size))
    for axis in range(scheme.dimension):
        D = derivative_matrix(axis, scheme)
        M = multiplication_matrix(axis, scheme)
        H += M @ M - D @ D
    return H


def translation_operator(x, scheme: TruncationScheme) -> np.ndarray:
    """Matrix of the shift by x, exp(-sum_i x_i * derivative_matrix(i)).

    Computed by scaling-and-squaring Pade approximation.  Exact group
    action in the truncation limit; for d >= 2 the axis generators commute
    only up to truncation-boundary terms.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (scheme.dimension,):
        raise ValueError(f"shift must have shape ({scheme.dimension},)")
    gen = np.zeros((scheme.basis_size, scheme.basis_size))
    for axis in range(scheme.dimension):
        if x[axis] != 0.0:
            gen -= x[axis] * derivative_matrix(axis, scheme)
    return expm(gen)


def translate(v: CoefficientVector, x) -> CoefficientVector:
    """Apply the translation matrix to a coefficient vector."""
    return v.with_coefficients(translation_operator(x, v.scheme) @ v.coefficients)


def generator_residual(v: CoefficientVector, axis: int, h: float,
                       p: float = 0.0) -> float:
    """Defect of the difference quotient against the group generator.

    Returns norm_p((tau_{h e_axis} v - v)/h + d_axis v, p).  For smooth
    profiles this is O(h): the translation group has generator -d_axis, so
    the quotient converges to -d_axis v at first order.
    """
    if h == 0.0:
        raise ValueError("step h must be nonzero")
    _check_axis(axis, v.scheme)
    shift = np.zeros(v.scheme.dimension)
    shift[axis] = h
    T = translation_operator(shift, v.scheme)
    D = derivative_matrix(axis, v.scheme)
    resid = (T @ v.coefficients - v.coefficients) / h + D @ v.coefficients
    return norm_p(v.with_coefficients(resid), p)


def _check_axis(axis: int, scheme: TruncationScheme) -> None:
    if not 0 <= axis < scheme.dimension:
        raise ValueError(f"axis {axis} out of range for dimension {scheme.dimension}")
