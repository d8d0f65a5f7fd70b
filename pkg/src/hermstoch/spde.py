"""Translation-invariant Ito-type SPDE in truncated coefficient space.

The state y is a coefficient vector; drift and diffusion come from pairing
the state against fixed coefficient data b_i and sigma_i^j:

    L(y)   = 1/2 sum_{i,k} (S(y) S(y)^T)_{ik} d2_{ik} y - sum_i <b_i, y> d_i y,
    A^j(y) = - sum_i <sigma_i^j, y> d_i y,

where S(y)[j, i] = <sigma_i^j, y>.  Two solution routes are provided and
meant to be compared under common noise:

* galerkin_integrate: Euler-Maruyama directly in coefficient space,
* translated_profile_solution: drive a finite-dimensional SDE with
  coefficients b_bar(x) = <b, tau_x Phi>, sigma_bar^j(x) = <sigma^j,
  tau_x Phi> and set Y_t = tau_{X_t} Phi.

Translated-profile states are produced by exact re-projection of the
shifted profile (shift-then-project for smooth profiles, basis
re-evaluation for deltas), never by accumulating incremental matrix
exponentials; the matrix route stays available for cross-validation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .distributions import delta_coefficients
from .hermite import TruncationScheme, hermite_design_matrix, default_projection_rule
from .invariance import AmbientFields
from .manifolds import ChartManifold
from .operators import derivative_matrix, translation_operator
from .sde import BlowUpError, SdeModel, Trajectory, euler_maruyama
from .sobolev import CoefficientVector, level_weights

#: default norm-reporting regularity per profile kind
DEFAULT_REGULARITY = {"delta": -1.0, "smooth": 0.0}


@dataclass(frozen=True)
class SpdeModel:
    """Coefficient data of the SPDE plus the travelling profile Phi.

    b_coeffs has one CoefficientVector per spatial axis; sigma_coeffs one
    per (noise index j, spatial axis i).  For smooth profiles supply
    profile_fn (and optionally its gradient/hessian for orbit charts);
    for delta profiles supply delta_point.
    """

    scheme: TruncationScheme
    b_coeffs: tuple
    sigma_coeffs: tuple
    profile: CoefficientVector
    profile_kind: str = "smooth"
    profile_fn: Optional[Callable] = None
    profile_gradient: Optional[Callable] = None
    profile_hessian: Optional[Callable] = None
    delta_point: Optional[np.ndarray] = None
    regularity: Optional[float] = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "b_coeffs", tuple(self.b_coeffs))
        object.__setattr__(self, "sigma_coeffs",
                           tuple(tuple(row) for row in self.sigma_coeffs))
        d = self.scheme.dimension
        if len(self.b_coeffs) != d:
            raise ValueError(f"need {d} drift coefficient vectors")
        for row in self.sigma_coeffs:
            if len(row) != d:
                raise ValueError(f"each noise mode needs {d} coefficient vectors")
        for v in (*self.b_coeffs, *(v for row in self.sigma_coeffs for v in row),
                  self.profile):
            if v.scheme != self.scheme:
                raise ValueError("all coefficient vectors must share the scheme")
        if self.profile_kind not in ("smooth", "delta"):
            raise ValueError(f"unknown profile kind {self.profile_kind!r}")
        if self.profile_kind == "delta":
            pt = np.zeros(d) if self.delta_point is None \
                else np.atleast_1d(np.asarray(self.delta_point, dtype=float))
            object.__setattr__(self, "delta_point", pt)
        if self.regularity is None:
            object.__setattr__(self, "regularity",
                               DEFAULT_REGULARITY[self.profile_kind])

    @property
    def spatial_dim(self) -> int:
        return self.scheme.dimension

    @property
    def noise_count(self) -> int:
        return len(self.sigma_coeffs)

    @cached_property
    def _b_mat(self) -> np.ndarray:
        return np.stack([v.coefficients for v in self.b_coeffs])

    @cached_property
    def _sigma_mat(self) -> np.ndarray:
        # shape (r, d, basis)
        return np.stack([np.stack([v.coefficients for v in row])
                         for row in self.sigma_coeffs])

    @cached_property
    def _D(self) -> list:
        return [derivative_matrix(a, self.scheme) for a in range(self.spatial_dim)]

    @cached_property
    def _DD(self) -> dict:
        return {(i, k): self._D[i] @ self._D[k]
                for i in range(self.spatial_dim) for k in range(self.spatial_dim)}

    @cached_property
    def _proj_nodes(self) -> np.ndarray:
        return default_projection_rule(self.scheme).nodes

    @cached_property
    def _proj_matrix(self) -> np.ndarray:
        rule = default_projection_rule(self.scheme)
        return hermite_design_matrix(self.scheme, rule.nodes) * rule.weights

    def proj_points(self, x: np.ndarray) -> np.ndarray:
        """Quadrature nodes shifted by -x, where the moved profile is sampled."""
        return self._proj_nodes - x


def translate_profile(m: SpdeModel, x, method: str = "exact") -> CoefficientVector:
    """Coefficients of tau_x Phi.

    method="exact" re-evaluates (shift-then-project for smooth profiles,
    h_n(point + x) for deltas); method="expm" applies the translation
    matrix, kept for cross-validation of the group action.
    """
    return CoefficientVector(m.scheme, _translate_raw(m, np.asarray(x, dtype=float),
                                                      method))


def _translate_raw(m: SpdeModel, x: np.ndarray, method: str = "exact") -> np.ndarray:
    if method == "expm":
        return translation_operator(x, m.scheme) @ m.profile.coefficients
    if method != "exact":
        raise ValueError(f"unknown translation method {method!r}")
    if m.profile_kind == "delta":
        return delta_coefficients(m.delta_point + x, m.scheme).coefficients
    if m.profile_fn is not None:
        return m._proj_matrix @ np.asarray(m.profile_fn(m.proj_points(x)), dtype=float)
    # no closed form available: fall back to the matrix route
    return translation_operator(x, m.scheme) @ m.profile.coefficients


def pairing_fields(m: SpdeModel):
    """Callables b_bar(x) -> (d,) and sigma_bar(x) -> (d, r) via dual pairs.

    b_bar(x) = <b, tau_x Phi> and sigma_bar^j(x) = <sigma^j, tau_x Phi>;
    with Phi = delta_0 these reproduce the smooth fields b and sigma
    pointwise up to truncation.
    """

    # drift and diffusion are evaluated at the same x on every Euler step;
    # recompute the shifted profile only when x changes
    last = {"key": None, "tp": None}

    def _profile_at(x):
        x = np.asarray(x, dtype=float)
        key = x.tobytes()
        if key != last["key"]:
            last["key"] = key
            last["tp"] = _translate_raw(m, x)
        return last["tp"]

    def b_bar(x):
        return m._b_mat @ _profile_at(x)

    def sigma_bar(x):
        return (m._sigma_mat @ _profile_at(x)).T  # (d, r)

    return b_bar, sigma_bar


def as_sde_model(m: SpdeModel) -> SdeModel:
    """Finite-dimensional SDE driving the translated-profile solution."""
    b_bar, sigma_bar = pairing_fields(m)
    return SdeModel(dimension=m.spatial_dim, noise_count=m.noise_count,
                    drift=b_bar, diffusion_columns=sigma_bar,
                    name=f"{m.name or 'spde'}-profile-drive")


def _pair_matrix(m: SpdeModel, y: np.ndarray) -> np.ndarray:
    """S(y)[j, i] = <sigma_i^j, y>."""
    return m._sigma_mat @ y


def _drift_raw(m: SpdeModel, y: np.ndarray) -> np.ndarray:
    S = _pair_matrix(m, y)
    A2 = S.T @ S
    out = np.zeros_like(y)
    for i in range(m.spatial_dim):
        out += 0.5 * A2[i, i] * (m._DD[i, i] @ y)
        for k in range(i + 1, m.spatial_dim):
            out += A2[i, k] * (m._DD[i, k] @ y)
    b_pair = m._b_mat @ y
    for i in range(m.spatial_dim):
        out -= b_pair[i] * (m._D[i] @ y)
    return out


def _diffusion_raw(m: SpdeModel, y: np.ndarray) -> np.ndarray:
    S = _pair_matrix(m, y)
    out = np.zeros((m.noise_count, y.size))
    for j in range(m.noise_count):
        for i in range(m.spatial_dim):
            out[j] -= S[j, i] * (m._D[i] @ y)
    return out


def spde_drift(m: SpdeModel, y: CoefficientVector) -> CoefficientVector:
    """Drift L(y) of the coefficient-space SPDE."""
    if y.scheme != m.scheme:
        raise ValueError("state scheme does not match the model")
    return CoefficientVector(m.scheme, _drift_raw(m, y.coefficients))


def spde_diffusion(m: SpdeModel, y: CoefficientVector) -> list:
    """Noise fields A^j(y), one CoefficientVector per noise mode."""
    if y.scheme != m.scheme:
        raise ValueError("state scheme does not match the model")
    raw = _diffusion_raw(m, y.coefficients)
    return [CoefficientVector(m.scheme, row) for row in raw]


def ambient_fields(m: SpdeModel) -> AmbientFields:
    """The SPDE drift/noise as chart-ambient fields on raw coefficient arrays."""
    return AmbientFields(drift=lambda y: _drift_raw(m, y),
                         diffusion_columns=lambda y: _diffusion_raw(m, y).T,
                         noise_count=m.noise_count)


@dataclass(frozen=True)
class SpdeTrajectory:
    """Coefficient-space path with the regularity used for norm reporting."""

    scheme: TruncationScheme
    times: np.ndarray
    states: np.ndarray
    regularity: float
    seed: Optional[int] = None
    anchor_path: Optional[np.ndarray] = None

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states length mismatch")
        if self.states.shape[1] != self.scheme.basis_size:
            raise ValueError("state width does not match basis size")

    def norms(self, p: Optional[float] = None) -> np.ndarray:
        """Per-time scale norm series at p (defaults to the stored regularity)."""
        if p is None:
            p = self.regularity
        w = level_weights(self.scheme, p)
        return np.sqrt((self.states ** 2) @ w)

    def to_json(self) -> dict:
        data = {
            "dimension": self.scheme.dimension,
            "max_degree": self.scheme.max_degree,
            "order": "graded-lex",
            "regularity": self.regularity,
            "seed": self.seed,
            "times": self.times.tolist(),
            "states": self.states.tolist(),
        }
        if self.anchor_path is not None:
            data["anchor_path"] = self.anchor_path.tolist()
        return data

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def from_json(cls, data: dict) -> "SpdeTrajectory":
        anchor = data.get("anchor_path")
        return cls(
            scheme=TruncationScheme(int(data["dimension"]), int(data["max_degree"])),
            times=np.asarray(data["times"], dtype=float),
            states=np.asarray(data["states"], dtype=float),
            regularity=float(data["regularity"]),
            seed=data.get("seed"),
            anchor_path=None if anchor is None else np.asarray(anchor, dtype=float))


def galerkin_integrate(m: SpdeModel, y0: CoefficientVector, T: float, dt: float,
                       increments: np.ndarray,
                       seed: Optional[int] = None) -> SpdeTrajectory:
    """Euler-Maruyama directly in coefficient space.

    y_{k+1} = y_k + L(y_k) dt + sum_j A^j(y_k) dW^j_k with the provided
    increment matrix (use coupled_increments for reproducibility and for
    sharing noise with the translated-profile route).
    """
    if y0.scheme != m.scheme:
        raise ValueError("initial state scheme does not match the model")
    n_steps = int(round(T / dt))
    if increments.shape != (n_steps, m.noise_count):
        raise ValueError(f"increments must have shape ({n_steps}, {m.noise_count})")
    times = dt * np.arange(n_steps + 1)
    states = np.empty((n_steps + 1, m.scheme.basis_size))
    y = y0.coefficients.copy()
    states[0] = y
    for k in range(n_steps):
        y = y + _drift_raw(m, y) * dt + _diffusion_raw(m, y).T @ increments[k]
        if not np.all(np.isfinite(y)):
            raise BlowUpError(step=k + 1, time=times[k + 1])
        states[k + 1] = y
    return SpdeTrajectory(scheme=m.scheme, times=times, states=states,
                          regularity=m.regularity, seed=seed)


def translated_profile_solution(m: SpdeModel, x0, T: float, dt: float,
                                increments: np.ndarray,
                                seed: Optional[int] = None) -> SpdeTrajectory:
    """Solution Y_t = tau_{X_t} Phi with X driven by the paired fields.

    X follows the finite-dimensional SDE with drift b_bar and diffusion
    sigma_bar under the shared increments; every coefficient state is the
    exactly re-projected shifted profile, and the anchor path X is
    recorded alongside.
    """
    drive = as_sde_model(m)
    traj: Trajectory = euler_maruyama(drive, x0, T, dt, seed=seed or 0,
                                      increments=increments)
    states = np.empty((len(traj.times), m.scheme.basis_size))
    for idx, x in enumerate(traj.states):
        states[idx] = _translate_raw(m, x)
    return SpdeTrajectory(scheme=m.scheme, times=traj.times, states=states,
                          regularity=m.regularity, seed=seed,
                          anchor_path=traj.states)


def compare_trajectories(a: SpdeTrajectory, b: SpdeTrajectory,
                         p: float = 0.0) -> np.ndarray:
    """Per-time S_p distance between two coefficient trajectories."""
    if a.scheme != b.scheme:
        raise ValueError("trajectories use different schemes")
    if len(a.times) != len(b.times) or not np.allclose(a.times, b.times):
        raise ValueError("trajectories use different time grids")
    w = level_weights(a.scheme, p)
    diff = a.states - b.states
    return np.sqrt((diff ** 2) @ w)


def orbit_chart(m: SpdeModel) -> ChartManifold:
    """Chart x -> tau_x Phi of the profile orbit in coefficient space.

    First and second derivatives are exact projections of the shifted
    profile derivatives: d/dx_i tau_x Phi = -(d_i Phi)(. - x) and
    d2/dx_i dx_k tau_x Phi = +(d2_{ik} Phi)(. - x).  Requires
    profile_gradient and profile_hessian for smooth profiles.
    """
    d = m.spatial_dim

    if m.profile_kind == "smooth":
        if m.profile_gradient is None or m.profile_hessian is None:
            raise ValueError("orbit chart needs profile_gradient and profile_hessian")

        def dphi(x):
            grads = np.asarray(m.profile_gradient(m.proj_points(np.asarray(x, float))))
            return -(m._proj_matrix @ grads)

        def d2phi(x):
            hess = np.asarray(m.profile_hessian(m.proj_points(np.asarray(x, float))))
            return np.einsum("bq,qmn->bmn",
                             m._proj_matrix, hess.reshape(-1, d, d))
    else:
        raise ValueError("orbit chart implemented for smooth profiles only")

    return ChartManifold(chart_dim=d, ambient_dim=m.scheme.basis_size,
                         phi=lambda x: _translate_raw(m, np.asarray(x, float)),
                         dphi=dphi, d2phi=d2phi, name="profile-orbit")
