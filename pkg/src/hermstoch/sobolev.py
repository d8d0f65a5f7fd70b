"""Truncated Hermite-Sobolev vectors: norms, pairings, the Hermite operator.

A CoefficientVector stores the retained coefficients c_n = <Phi, h_n> of a
tempered distribution.  The scale norm of index p weights degree level k by
(2k + d)**(2p):

    norm_p(v)**2 = sum_k (2k + d)**(2p) * sum_{|n| = k} c_n**2.

p = 0 recovers the L2 norm; negative p admits distributions such as deltas.
In truncation every vector lies in every S_p, so the regularity label is
advisory metadata only and norms are computed on demand for any p.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .hermite import (QuadratureRule, TruncationScheme, default_projection_rule,
                      hermite_design_matrix)

BASIS_ORDER = "graded-lex"


@dataclass(frozen=True)
class CoefficientVector:
    """Dense coefficients aligned with the graded-lex basis enumeration."""

    scheme: TruncationScheme
    coefficients: np.ndarray
    regularity_label: Optional[float] = None

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coefficients, dtype=float)
        object.__setattr__(self, "coefficients", coeffs)
        if coeffs.shape != (self.scheme.basis_size,):
            raise ValueError(
                f"coefficient length {coeffs.shape} does not match basis size "
                f"{self.scheme.basis_size}")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")

    def with_coefficients(self, coeffs: np.ndarray) -> "CoefficientVector":
        return replace(self, coefficients=coeffs)

    def to_json(self) -> dict:
        return {
            "dimension": self.scheme.dimension,
            "max_degree": self.scheme.max_degree,
            "order": BASIS_ORDER,
            "coefficients": self.coefficients.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "CoefficientVector":
        if data.get("order") != BASIS_ORDER:
            raise ValueError(f"unsupported basis order {data.get('order')!r}")
        scheme = TruncationScheme(int(data["dimension"]), int(data["max_degree"]))
        return cls(scheme, np.asarray(data["coefficients"], dtype=float))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "CoefficientVector":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def zero_vector(scheme: TruncationScheme) -> CoefficientVector:
    return CoefficientVector(scheme, np.zeros(scheme.basis_size))


def basis_vector(scheme: TruncationScheme, n: tuple[int, ...]) -> CoefficientVector:
    """Unit coefficient vector at the multi-index n."""
    c = np.zeros(scheme.basis_size)
    c[scheme.index[tuple(n)]] = 1.0
    return CoefficientVector(scheme, c)


def level_weights(scheme: TruncationScheme, p: float) -> np.ndarray:
    """Per-entry norm weights (2|n| + d)**(2p)."""
    return (2.0 * scheme.degrees + scheme.dimension) ** (2.0 * p)


def norm_p(v: CoefficientVector, p: float) -> float:
    """Scale norm of index p of a coefficient vector.

    Returns sqrt(sum_k (2k+d)**(2p) sum_{|n|=k} c_n**2) over the retained
    indices.  p=0 is the Euclidean norm of the coefficients.
    """
    w = level_weights(v.scheme, p)
    return float(np.sqrt(np.sum(w * v.coefficients ** 2)))


def dual_pair(u: CoefficientVector, v: CoefficientVector) -> float:
    """Duality pairing <u, v> = sum_n u_n v_n.

    Requires identical truncation schemes; no silent re-projection.  The
    pairing satisfies |<u, v>| <= norm_p(u, -p) * norm_p(v, p) for every p.
    """
    if u.scheme != v.scheme:
        raise ValueError("dual_pair requires identical truncation schemes")
    return float(u.coefficients @ v.coefficients)


def apply_hermite_operator(v: CoefficientVector, l: int) -> CoefficientVector:
    """Apply the l-th power of the Hermite operator, c_n -> (2|n|+d)**l c_n.

    The operator is diagonal on the basis; negative l gives the inverse.
    It is an exact isometry between scale norms:
    norm_p(apply_hermite_operator(v, l), p) == norm_p(v, p + l).
    """
    eig = (2.0 * v.scheme.degrees + v.scheme.dimension) ** float(l)
    return v.with_coefficients(eig * v.coefficients)


def project_function(f: Callable[[np.ndarray], np.ndarray],
                     scheme: TruncationScheme,
                     rule: Optional[QuadratureRule] = None) -> CoefficientVector:
    """Project a function with Gaussian-dominated decay onto the basis.

    Parameters
    ----------
    f : callable
        Receives an (m, d) array of points, returns (m,) values.
    scheme : TruncationScheme
    rule : QuadratureRule, optional
        Defaults to the tensor rule of order 2K + 16 with scale sqrt(2).

    Returns
    -------
    CoefficientVector with c_n approximating the integral of f * h_n.

    Raises
    ------
    ValueError if the quadrature result is non-finite (f grows faster
    than the Gaussian weight).
    """
    if rule is None:
        rule = default_projection_rule(scheme)
    vals = np.asarray(f(rule.nodes), dtype=float)
    if vals.shape != (rule.nodes.shape[0],):
        raise ValueError("f must map an (m, d) point array to (m,) values")
    H = hermite_design_matrix(scheme, rule.nodes)
    coeffs = H @ (rule.weights * vals)
    if not np.all(np.isfinite(coeffs)):
        raise ValueError("quadrature produced non-finite coefficients "
                         "(integrand grows faster than the Gaussian weight)")
    return CoefficientVector(scheme, coeffs)


def reconstruct(v: CoefficientVector, points: np.ndarray) -> np.ndarray:
    """Evaluate the truncated expansion sum_n c_n h_n at the given points."""
    H = hermite_design_matrix(v.scheme, points)
    return H.T @ v.coefficients
