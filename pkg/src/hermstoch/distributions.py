"""Constructors for the stock distribution families.

Deltas and atomic measures have closed-form coefficients (c_n = h_n(x)
from <delta_x, h_n> = h_n(x)); shifting them is therefore done exactly by
re-evaluating the basis at the shifted atoms, never through the matrix
exponential.  Polynomials of degree <= 3 are projected by a quadrature
that integrates polynomial-times-Gaussian exactly.
"""

from __future__ import annotations

import math

import numpy as np

from .hermite import TruncationScheme, gauss_hermite_rule, hermite_design_matrix
from .sobolev import CoefficientVector, project_function

POLY_DEGREE_CAP = 3

#: a polynomial is a dict mapping exponent tuples to coefficients,
#: e.g. {(0,): 1.0, (1,): -2.0} for 1 - 2x in d=1
Polynomial = dict


def delta_coefficients(x, scheme: TruncationScheme) -> CoefficientVector:
    """Coefficients of the Dirac distribution at x: c_n = h_n(x).

    The finite vector is the truncation of an element of S_p for every
    p < -d/4; its scale norms at such p shrink as |x| grows.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    H = hermite_design_matrix(scheme, x.reshape(1, -1))
    return CoefficientVector(scheme, H[:, 0])


def atomic_measure_coefficients(atoms, scheme: TruncationScheme) -> CoefficientVector:
    """Weighted sum of delta coefficients for atoms [(weight, point), ...]."""
    atoms = list(atoms)
    if not atoms:
        raise ValueError("atom list must be nonempty")
    weights = np.array([float(w) for w, _ in atoms])
    points = np.stack([np.atleast_1d(np.asarray(pt, dtype=float)) for _, pt in atoms])
    H = hermite_design_matrix(scheme, points)
    return CoefficientVector(scheme, H @ weights)


def translate_atoms(atoms, shift) -> list:
    """Shift every atom location by the vector shift (exact delta translation)."""
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    return [(w, np.atleast_1d(np.asarray(pt, dtype=float)) + shift) for w, pt in atoms]


def polynomial_degree(poly: Polynomial) -> int:
    terms = [e for e, c in poly.items() if c != 0.0]
    return max((sum(e) for e in terms), default=0)


def polynomial_function(poly: Polynomial, dimension: int):
    """Callable evaluating the polynomial on an (m, d) point array."""
    def f(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        vals = np.zeros(points.shape[0])
        for expo, coeff in poly.items():
            if len(expo) != dimension:
                raise ValueError(f"exponent {expo} has wrong length for d={dimension}")
            term = np.full(points.shape[0], float(coeff))
            for a, e in enumerate(expo):
                if e:
                    term = term * points[:, a] ** e
            vals += term
        return vals
    return f


def polynomial_coefficients(poly: Polynomial, scheme: TruncationScheme) -> CoefficientVector:
    """Exact pairings <poly, h_n> of a polynomial of degree <= 3.

    Uses a scale-sqrt(2) rule, which integrates polynomial times a single
    Hermite weight exactly, so the only error is rounding.  Degrees above
    the cap are rejected: truncated Hermite coefficients of high-degree
    polynomials decay too slowly to be honest.
    """
    deg = polynomial_degree(poly)
    if deg > POLY_DEGREE_CAP:
        raise ValueError(f"polynomial degree {deg} above cap {POLY_DEGREE_CAP}")
    rule = gauss_hermite_rule(scheme.dimension, 2 * scheme.max_degree + 16,
                              scale=math.sqrt(2.0))
    return project_function(polynomial_function(poly, scheme.dimension), scheme,
                            rule=rule)
