"""Built-in model, manifold, and profile-function registries.

Everything the CLI can name lives here: finite-dimensional SDE models
(several on the unit sphere with known invariance verdicts), the two
reference SPDE models (delta and Gaussian travelling profile), level-set
manifolds, and the named scalar functions accepted by the transform
subcommand.  Custom systems go through the library API instead.
"""

from __future__ import annotations

import numpy as np

from .hermite import TruncationScheme
from .manifolds import (LevelSetManifold, hyperplane_manifold, sphere_manifold,
                        torus_manifold)
from .sde import SdeModel
from .sobolev import project_function
from .spde import SpdeModel


# ---------------------------------------------------------------------------
# sphere SDE family

def _stroock_columns(x: np.ndarray, lam: float = 1.0) -> np.ndarray:
    d = x.size
    return lam * (np.eye(d) - np.outer(x, x))


def _stroock_jacobians(x: np.ndarray, lam: float = 1.0) -> np.ndarray:
    d = x.size
    out = np.zeros((d, d, d))
    for j in range(d):
        for i in range(d):
            for k in range(d):
                out[j, i, k] = -lam * ((k == j) * x[i] + x[j] * (i == k))
    return out


def stroock_sphere_model(dimension: int = 3, scale: float = 1.0) -> SdeModel:
    """Spherical Brownian motion in Ito form, drift -scale^2 (d-1)/2 x.

    Noise columns scale*(e_j - x_j x), one per coordinate.  Leaves every
    centered sphere radius 1 invariant.
    """
    d = dimension
    lam = scale
    return SdeModel(
        dimension=d, noise_count=d,
        drift=lambda x: -lam * lam * (d - 1) / 2.0 * x,
        diffusion_columns=lambda x: _stroock_columns(x, lam),
        diffusion_jacobians=lambda x: _stroock_jacobians(x, lam),
        name="stroock-sphere" if lam == 1.0 else "scaled-stroock-sphere")


def driftless_stroock_model(dimension: int = 3) -> SdeModel:
    """Stroock noise columns with the compensating drift removed: not
    sphere-invariant (the generator residual on |x|^2 - 1 equals d - 1)."""
    d = dimension
    return SdeModel(
        dimension=d, noise_count=d,
        drift=lambda x: np.zeros(d),
        diffusion_columns=_stroock_columns,
        diffusion_jacobians=_stroock_jacobians,
        name="driftless-stroock-sphere")


def radial_drift_model(dimension: int = 3) -> SdeModel:
    """Deterministic outward flow b(x) = x: leaves no sphere invariant."""
    d = dimension
    return SdeModel(
        dimension=d, noise_count=1,
        drift=lambda x: np.array(x, dtype=float),
        diffusion_columns=lambda x: np.zeros((d, 1)),
        diffusion_jacobians=lambda x: np.zeros((1, d, d)),
        name="radial-drift-sphere")


def zero_model(dimension: int = 3) -> SdeModel:
    """b = 0, sigma = 0; invariant for every submanifold."""
    d = dimension
    return SdeModel(
        dimension=d, noise_count=1,
        drift=lambda x: np.zeros(d),
        diffusion_columns=lambda x: np.zeros((d, 1)),
        diffusion_jacobians=lambda x: np.zeros((1, d, d)),
        name="zero")


def ornstein_uhlenbeck_model(theta: float = 1.0, sigma: float = 1.0) -> SdeModel:
    """dX = -theta X dt + sigma dW in one dimension."""
    return SdeModel(
        dimension=1, noise_count=1,
        drift=lambda x: -theta * np.array(x, dtype=float),
        diffusion_columns=lambda x: np.array([[sigma]]),
        diffusion_jacobians=lambda x: np.zeros((1, 1, 1)),
        name="ornstein-uhlenbeck")


def hyperplane_tangent_model() -> SdeModel:
    """In-plane rotation drift plus two constant in-plane noise columns;
    keeps the plane x_3 = 0 invariant."""
    cols = np.zeros((3, 2))
    cols[0, 0] = 1.0
    cols[1, 1] = 1.0
    return SdeModel(
        dimension=3, noise_count=2,
        drift=lambda x: np.array([-x[1], x[0], 0.0]),
        diffusion_columns=lambda x: cols,
        diffusion_jacobians=lambda x: np.zeros((2, 3, 3)),
        name="hyperplane-tangent")


# ---------------------------------------------------------------------------
# reference SPDE data (d = 1, one noise mode)

def _gauss(z):
    return np.exp(-z ** 2 / 2.0)


def spde_drift_field(z: np.ndarray) -> np.ndarray:
    """b_1(z) = -z exp(-z^2/2): smooth, odd, Gaussian-dominated."""
    z = np.asarray(z)[..., 0]
    return -z * _gauss(z)


def spde_noise_field(z: np.ndarray) -> np.ndarray:
    """sigma_1^1(z) = 0.25 exp(-z^2/2)."""
    z = np.asarray(z)[..., 0]
    return 0.25 * _gauss(z)


def gaussian_profile(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z)[..., 0]
    return _gauss(z)


def gaussian_profile_gradient(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z)[..., 0]
    return (-z * _gauss(z))[:, None]


def gaussian_profile_hessian(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z)[..., 0]
    return ((z * z - 1.0) * _gauss(z))[:, None, None]


def _spde_coefficient_data(scheme: TruncationScheme):
    b1 = project_function(spde_drift_field, scheme)
    s1 = project_function(spde_noise_field, scheme)
    return (b1,), ((s1,),)


def gaussian_profile_spde(max_degree: int = 60) -> SpdeModel:
    """d=1 SPDE with travelling Gaussian profile exp(-z^2/2)."""
    scheme = TruncationScheme(1, max_degree)
    b, s = _spde_coefficient_data(scheme)
    return SpdeModel(
        scheme=scheme, b_coeffs=b, sigma_coeffs=s,
        profile=project_function(gaussian_profile, scheme),
        profile_kind="smooth",
        profile_fn=gaussian_profile,
        profile_gradient=gaussian_profile_gradient,
        profile_hessian=gaussian_profile_hessian,
        name="gaussian-profile-spde")


def delta_profile_spde(max_degree: int = 60) -> SpdeModel:
    """Same coefficient fields with profile delta_0, so the paired drift
    and noise reproduce the smooth fields pointwise up to truncation."""
    from .distributions import delta_coefficients
    scheme = TruncationScheme(1, max_degree)
    b, s = _spde_coefficient_data(scheme)
    return SpdeModel(
        scheme=scheme, b_coeffs=b, sigma_coeffs=s,
        profile=delta_coefficients(np.zeros(1), scheme),
        profile_kind="delta", delta_point=np.zeros(1),
        name="delta-profile-spde")


# ---------------------------------------------------------------------------
# registries

SDE_MODELS = {
    "stroock-sphere": stroock_sphere_model,
    "scaled-stroock-sphere": lambda **kw: stroock_sphere_model(
        scale=kw.pop("scale", 0.5), **kw),
    "driftless-stroock-sphere": driftless_stroock_model,
    "radial-drift-sphere": radial_drift_model,
    "zero": zero_model,
    "ornstein-uhlenbeck": ornstein_uhlenbeck_model,
    "hyperplane-tangent": hyperplane_tangent_model,
}

SPDE_MODELS = {
    "gaussian-profile-spde": gaussian_profile_spde,
    "delta-profile-spde": delta_profile_spde,
}

MANIFOLDS = {
    "sphere": sphere_manifold,
    "hyperplane": hyperplane_manifold,
    "torus-levelset": torus_manifold,
}

#: manifold each SDE model is checked against unless overridden
DEFAULT_MANIFOLD = {
    "stroock-sphere": "sphere",
    "scaled-stroock-sphere": "sphere",
    "driftless-stroock-sphere": "sphere",
    "radial-drift-sphere": "sphere",
    "zero": "sphere",
    "hyperplane-tangent": "hyperplane",
}

#: expected checker verdict of each sphere-family model, for batch tests
KNOWN_VERDICTS = {
    "stroock-sphere": True,
    "scaled-stroock-sphere": True,
    "zero": True,
    "driftless-stroock-sphere": False,
    "radial-drift-sphere": False,
}


def _shifted_gauss(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.exp(-np.sum((x - 0.5) ** 2, axis=-1) / 2.0)


FUNCTIONS = {
    "gaussian": lambda x: np.exp(-np.sum(np.asarray(x, float) ** 2, axis=-1) / 2.0),
    "shifted-gaussian": _shifted_gauss,
    "linear": lambda x: np.asarray(x, dtype=float)[..., 0],
    "cubic": lambda x: np.asarray(x, dtype=float)[..., 0] ** 3,
}


def _lookup(registry: dict, name: str, what: str):
    try:
        return registry[name]
    except KeyError:
        known = ", ".join(sorted(registry))
        raise ValueError(f"unknown {what} {name!r}; available: {known}") from None


def make_sde_model(name: str, **params) -> SdeModel:
    return _lookup(SDE_MODELS, name, "SDE model")(**params)


def make_spde_model(name: str, **params) -> SpdeModel:
    return _lookup(SPDE_MODELS, name, "SPDE model")(**params)


def make_manifold(name: str, **params) -> LevelSetManifold:
    return _lookup(MANIFOLDS, name, "manifold")(**params)


def make_function(name: str):
    return _lookup(FUNCTIONS, name, "function")


def is_spde_model(name: str) -> bool:
    return name in SPDE_MODELS
