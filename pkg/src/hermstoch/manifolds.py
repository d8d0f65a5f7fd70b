"""Submanifold descriptions, tangent projectors, generators, Stratonovich.

Level sets N = {x : f(x) = 0} carry their Jacobian and (optionally)
Hessians; missing derivatives fall back to central finite differences
with step h_fd = eps**(1/3) * (1 + |x|).  Charts carry a parametrization
with first and second derivatives and may map into coefficient space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

EPS_CBRT = float(np.finfo(float).eps) ** (1.0 / 3.0)

#: condition-number threshold for declaring Df rank deficient
RANK_COND_LIMIT = 1e12


def fd_step(x: np.ndarray) -> float:
    return EPS_CBRT * (1.0 + float(np.linalg.norm(x)))


def fd_gradient(f: Callable, x: np.ndarray) -> np.ndarray:
    h = fd_step(x)
    g = np.empty(x.size)
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def fd_hessian(f: Callable, x: np.ndarray) -> np.ndarray:
    h = fd_step(x)
    d = x.size
    H = np.empty((d, d))
    f0 = f(x)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h
        H[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / (h * h)
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = h
            H[i, j] = H[j, i] = (f(x + ei + ej) - f(x + ei - ej)
                                 - f(x - ei + ej) + f(x - ei - ej)) / (4.0 * h * h)
    return H


@dataclass(frozen=True)
class ScalarFunction:
    """Scalar field with derivatives, finite-difference ones by default."""

    value: Callable[[np.ndarray], float]
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def gradient_at(self, x: np.ndarray) -> np.ndarray:
        if self.gradient is not None:
            return np.asarray(self.gradient(x), dtype=float)
        return fd_gradient(self.value, x)

    def hessian_at(self, x: np.ndarray) -> np.ndarray:
        if self.hessian is not None:
            return np.asarray(self.hessian(x), dtype=float)
        return fd_hessian(self.value, x)

    @property
    def is_analytic(self) -> bool:
        return self.gradient is not None and self.hessian is not None


@dataclass(frozen=True)
class LevelSetManifold:
    """Zero set of f: R^d -> R^n with full-row-rank Jacobian on the set."""

    ambient_dim: int
    codim: int
    f: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hessians: Optional[Callable[[np.ndarray], np.ndarray]] = None
    feas_tol: float = 1e-10
    name: str = ""

    def value(self, x) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.f(np.asarray(x, dtype=float)), dtype=float))

    def jacobian_at(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(x), dtype=float).reshape(self.codim,
                                                                     self.ambient_dim)
        rows = [fd_gradient(lambda y, k=k: float(self.value(y)[k]), x)
                for k in range(self.codim)]
        return np.stack(rows)

    def hessians_at(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.hessians is not None:
            return np.asarray(self.hessians(x), dtype=float)
        return np.stack([fd_hessian(lambda y, k=k: float(self.value(y)[k]), x)
                         for k in range(self.codim)])

    def component(self, k: int) -> ScalarFunction:
        """Component f_k as a scalar field with consistent derivatives."""
        grad = (lambda x, k=k: self.jacobian_at(x)[k]) if self.jacobian else None
        hess = (lambda x, k=k: self.hessians_at(x)[k]) if self.hessians else None
        return ScalarFunction(value=lambda x, k=k: float(self.value(x)[k]),
                              gradient=grad, hessian=hess)

    @property
    def is_analytic(self) -> bool:
        return self.jacobian is not None and self.hessians is not None


@dataclass(frozen=True)
class ChartManifold:
    """Parametrization phi: V in R^m -> ambient space, with derivatives.

    phi(u) returns the ambient point (any dimension, including coefficient
    space); dphi(u) the (ambient, m) Jacobian; d2phi(u) the (ambient, m, m)
    stack of second derivatives.
    """

    chart_dim: int
    ambient_dim: int
    phi: Callable[[np.ndarray], np.ndarray]
    dphi: Callable[[np.ndarray], np.ndarray]
    d2phi: Callable[[np.ndarray], np.ndarray]
    name: str = ""


@dataclass(frozen=True)
class PointSample:
    """Batch of manifold points, shape (count, ambient_dim)."""

    points: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "points", np.atleast_2d(np.asarray(self.points,
                                                                    dtype=float)))

    def __len__(self) -> int:
        return self.points.shape[0]


def tangent_projector(m: LevelSetManifold, x) -> np.ndarray:
    """Orthogonal projector onto ker Df(x), P = I - Df^T (Df Df^T)^-1 Df.

    The tangent space of a level set is the kernel of the Jacobian; P is
    symmetric, idempotent, with rank d - n.  Raises ValueError when Df is
    numerically rank deficient.
    """
    J = m.jacobian_at(x)
    G = J @ J.T
    if np.linalg.cond(G) > RANK_COND_LIMIT:
        raise ValueError(f"Jacobian rank deficient at {np.asarray(x)}")
    P = np.eye(m.ambient_dim) - J.T @ np.linalg.solve(G, J)
    return P


def apply_generator(model, g: ScalarFunction, x) -> float:
    """Ito generator L g = sum_i b_i d_i g + 1/2 sum_{ik} (sigma sigma^T)_{ik} d2_{ik} g."""
    x = np.asarray(x, dtype=float)
    grad = g.gradient_at(x)
    hess = g.hessian_at(x)
    sig = model.diffusion_columns(x)
    a = sig @ sig.T
    return float(model.drift(x) @ grad + 0.5 * np.sum(a * hess))


def apply_first_order(model, g: ScalarFunction, x) -> np.ndarray:
    """First-order noise fields (A^j g)(x) = sum_i sigma^j_i d_i g, all j."""
    x = np.asarray(x, dtype=float)
    grad = g.gradient_at(x)
    return model.diffusion_columns(x).T @ grad


def diffusion_jacobians_at(model, x) -> np.ndarray:
    """(r, d, d) stack of D sigma^j, analytic if provided, else central FD."""
    x = np.asarray(x, dtype=float)
    if model.diffusion_jacobians is not None:
        return np.asarray(model.diffusion_jacobians(x), dtype=float)
    h = fd_step(x)
    d, r = model.dimension, model.noise_count
    out = np.empty((r, d, d))
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        diff = (model.diffusion_columns(x + e) - model.diffusion_columns(x - e)) / (2 * h)
        out[:, :, k] = diff.T
    return out


def stratonovich_correction(model, x) -> np.ndarray:
    """1/2 sum_j D sigma^j(x) sigma^j(x), the Ito-to-Stratonovich drift shift."""
    x = np.asarray(x, dtype=float)
    jac = diffusion_jacobians_at(model, x)
    sig = model.diffusion_columns(x)
    out = np.zeros(model.dimension)
    for j in range(model.noise_count):
        out += jac[j] @ sig[:, j]
    return 0.5 * out


def corrected_drift(model, x) -> np.ndarray:
    """Stratonovich drift c(x) = b(x) - 1/2 sum_j D sigma^j sigma^j."""
    return model.drift(np.asarray(x, dtype=float)) - stratonovich_correction(model, x)


# ---------------------------------------------------------------------------
# samplers

def sample_sphere(count: int, dimension: int, seed: int = 0,
                  radius: float = 1.0) -> PointSample:
    """Uniform points on the sphere via normalized Gaussian vectors."""
    gen = np.random.Generator(np.random.Philox(key=np.array([seed, 0],
                                                            dtype=np.uint64)))
    pts = gen.standard_normal((count, dimension))
    pts *= radius / np.linalg.norm(pts, axis=1, keepdims=True)
    return PointSample(points=pts, seed=seed)


def newton_projection_sample(m: LevelSetManifold, count: int, seed: int = 0,
                             proposal_scale: float = 1.5, max_iter: int = 50,
                             feas_tol: float = 1e-6) -> PointSample:
    """Sample a level set by Gauss-Newton projection of ambient proposals.

    Proposals are Gaussian; each is iterated x <- x - Df^T (Df Df^T)^-1 f(x)
    until |f| <= feas_tol.  Non-converged proposals are rejected.
    """
    gen = np.random.Generator(np.random.Philox(key=np.array([seed, 1],
                                                            dtype=np.uint64)))
    points = []
    attempts = 0
    while len(points) < count and attempts < 100 * count:
        attempts += 1
        x = proposal_scale * gen.standard_normal(m.ambient_dim)
        for _ in range(max_iter):
            val = m.value(x)
            if np.max(np.abs(val)) <= feas_tol:
                points.append(x)
                break
            J = m.jacobian_at(x)
            G = J @ J.T
            if np.linalg.cond(G) > RANK_COND_LIMIT:
                break
            x = x - J.T @ np.linalg.solve(G, val)
    if len(points) < count:
        raise ValueError(f"projection sampler produced only {len(points)}/{count} points")
    return PointSample(points=np.stack(points), seed=seed)


# ---------------------------------------------------------------------------
# built-in manifolds and charts

def sphere_manifold(dimension: int = 3, radius: float = 1.0) -> LevelSetManifold:
    """Sphere |x|^2 = radius^2 as a level set with analytic derivatives."""
    r2 = radius * radius
    return LevelSetManifold(
        ambient_dim=dimension, codim=1,
        f=lambda x: np.array([x @ x - r2]),
        jacobian=lambda x: (2.0 * x).reshape(1, -1),
        hessians=lambda x: 2.0 * np.eye(len(x)).reshape(1, len(x), len(x)),
        name="sphere")


def hyperplane_manifold(normal, offset: float = 0.0) -> LevelSetManifold:
    """Hyperplane <x, normal> = offset with analytic derivatives."""
    eta = np.asarray(normal, dtype=float)
    d = eta.size
    return LevelSetManifold(
        ambient_dim=d, codim=1,
        f=lambda x: np.array([x @ eta - offset]),
        jacobian=lambda x: eta.reshape(1, -1),
        hessians=lambda x: np.zeros((1, d, d)),
        name="hyperplane")


def torus_manifold(major_radius: float = 2.0, minor_radius: float = 0.5) -> LevelSetManifold:
    """Torus of revolution (sqrt(x^2+y^2) - R)^2 + z^2 = r^2 in R^3.

    Analytic Jacobian; Hessians are left to finite differences.
    """
    R, r = major_radius, minor_radius

    def f(x):
        rho = np.hypot(x[0], x[1])
        return np.array([(rho - R) ** 2 + x[2] ** 2 - r * r])

    def jac(x):
        rho = np.hypot(x[0], x[1])
        factor = 2.0 * (rho - R) / rho
        return np.array([[factor * x[0], factor * x[1], 2.0 * x[2]]])

    return LevelSetManifold(ambient_dim=3, codim=1, f=f, jacobian=jac,
                            feas_tol=1e-6, name="torus-levelset")


def spherical_chart() -> ChartManifold:
    """Spherical-coordinate patch (theta, phi) -> S2 with analytic derivatives."""

    def phi(u):
        th, ph = u
        return np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])

    def dphi(u):
        th, ph = u
        return np.array([
            [np.cos(th) * np.cos(ph), -np.sin(th) * np.sin(ph)],
            [np.cos(th) * np.sin(ph), np.sin(th) * np.cos(ph)],
            [-np.sin(th), 0.0],
        ])

    def d2phi(u):
        th, ph = u
        out = np.empty((3, 2, 2))
        out[:, 0, 0] = [-np.sin(th) * np.cos(ph), -np.sin(th) * np.sin(ph), -np.cos(th)]
        out[:, 0, 1] = out[:, 1, 0] = [-np.cos(th) * np.sin(ph),
                                       np.cos(th) * np.cos(ph), 0.0]
        out[:, 1, 1] = [-np.sin(th) * np.cos(ph), -np.sin(th) * np.sin(ph), 0.0]
        return out

    return ChartManifold(chart_dim=2, ambient_dim=3, phi=phi, dphi=dphi,
                         d2phi=d2phi, name="spherical-coordinates")
