"""Numerical invariance criteria for SDE models against submanifolds.

Every check evaluates a family of pointwise residuals that vanish exactly
when the corresponding invariance criterion holds:

* check_levelset: generator and noise-field residuals L f_k, A^j f_k on
  the zero set of f (level-set criterion),
* check_sphere: the closed-form sphere specialization
  <x, b> + tr(sigma sigma^T)/2 and <x, sigma^j>,
* check_tangency: normal component of a single vector field,
* check_simultaneous: tangency of a field frozen at y against tangent
  spaces at neighbors z (local simultaneity),
* check_chart: least-squares residuals of pulling drift and noise fields
  back through a parametrization (works for coefficient-space charts too),
* empirical_invariance: Monte-Carlo deviation of simulated paths.

Reports carry per-point residuals, the worst offending point, and a
pass/fail verdict against the tolerance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .manifolds import (LevelSetManifold, ChartManifold, PointSample,
                        apply_first_order, apply_generator, corrected_drift,
                        tangent_projector, RANK_COND_LIMIT)
from .sde import SdeModel, euler_maruyama

#: default residual tolerances
TOL_ANALYTIC = 1e-8
TOL_FINITE_DIFFERENCE = 1e-5


@dataclass(frozen=True)
class InvarianceReport:
    """Residual statistics of one invariance condition over a point sample."""

    condition: str
    tolerance: float
    residuals: np.ndarray
    points: np.ndarray
    seed: Optional[int] = None

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.residuals)))

    @property
    def mean_abs(self) -> float:
        return float(np.mean(np.abs(self.residuals)))

    @property
    def n_points(self) -> int:
        return int(len(self.residuals))

    @property
    def verdict(self) -> bool:
        return bool(self.max_abs <= self.tolerance)

    @property
    def worst_point(self) -> np.ndarray:
        return self.points[int(np.argmax(np.abs(self.residuals)))]

    def to_json(self) -> dict:
        return {
            "condition": self.condition,
            "tolerance": self.tolerance,
            "max_abs": self.max_abs,
            "mean_abs": self.mean_abs,
            "n_points": self.n_points,
            "verdict": "pass" if self.verdict else "fail",
            "worst_point": self.worst_point.tolist(),
        }


def all_pass(reports: Sequence[InvarianceReport]) -> bool:
    return all(r.verdict for r in reports)


def reports_to_json(reports: Sequence[InvarianceReport]) -> list:
    return [r.to_json() for r in reports]


def save_reports(reports: Sequence[InvarianceReport], path) -> None:
    with open(path, "w") as fh:
        json.dump(reports_to_json(reports), fh, indent=2)


def default_tolerance(analytic: bool) -> float:
    return TOL_ANALYTIC if analytic else TOL_FINITE_DIFFERENCE


@dataclass(frozen=True)
class AmbientFields:
    """Drift and noise fields in the chart's ambient space.

    Wraps either a finite-dimensional SDE model or Galerkin SPDE
    coefficients behind the same interface for check_chart.
    """

    drift: Callable[[np.ndarray], np.ndarray]
    diffusion_columns: Callable[[np.ndarray], np.ndarray]
    noise_count: int


def fields_from_sde(model: SdeModel) -> AmbientFields:
    return AmbientFields(drift=model.drift,
                         diffusion_columns=model.diffusion_columns,
                         noise_count=model.noise_count)


def _rank_ok(m: LevelSetManifold, x) -> bool:
    J = m.jacobian_at(x)
    return np.linalg.cond(J @ J.T) <= RANK_COND_LIMIT


def check_levelset(model: SdeModel, m: LevelSetManifold, sample: PointSample,
                   tol: Optional[float] = None) -> list[InvarianceReport]:
    """Level-set invariance residuals L f_k and A^j f_k at sample points.

    The zero set of f is locally invariant iff both residual families
    vanish on it.  Rank-deficient Jacobian points are flagged with an
    infinite residual rather than dropped.
    """
    if tol is None:
        tol = default_tolerance(m.is_analytic)
    pts = sample.points
    reports = []
    flagged = np.array([not _rank_ok(m, x) for x in pts])
    for k in range(m.codim):
        g = m.component(k)
        gen = np.array([apply_generator(model, g, x) for x in pts])
        gen[flagged] = np.inf
        reports.append(InvarianceReport(
            condition=f"generator residual on f[{k}]",
            tolerance=tol, residuals=gen, points=pts, seed=sample.seed))
        first = np.stack([apply_first_order(model, g, x) for x in pts])
        first[flagged] = np.inf
        for j in range(model.noise_count):
            reports.append(InvarianceReport(
                condition=f"noise field {j} residual on f[{k}]",
                tolerance=tol, residuals=first[:, j], points=pts,
                seed=sample.seed))
    return reports


def check_sphere(model: SdeModel, sample: PointSample,
                 tol: Optional[float] = None) -> list[InvarianceReport]:
    """Closed-form sphere criterion, no derivatives of f required.

    Drift balance <x, b(x)> + tr(sigma sigma^T)(x)/2 = 0 and noise
    tangency <x, sigma^j(x)> = 0 for every j, on unit-sphere points.
    """
    if tol is None:
        tol = TOL_ANALYTIC
    pts = sample.points
    drift_res = np.empty(len(pts))
    noise_res = np.empty((len(pts), model.noise_count))
    for i, x in enumerate(pts):
        sig = model.diffusion_columns(x)
        drift_res[i] = x @ model.drift(x) + 0.5 * np.sum(sig * sig)
        noise_res[i] = x @ sig
    reports = [InvarianceReport(
        condition="sphere drift balance",
        tolerance=tol, residuals=drift_res, points=pts, seed=sample.seed)]
    for j in range(model.noise_count):
        reports.append(InvarianceReport(
            condition=f"sphere noise tangency {j}",
            tolerance=tol, residuals=noise_res[:, j], points=pts,
            seed=sample.seed))
    return reports


def check_tangency(field: Callable[[np.ndarray], np.ndarray],
                   m: LevelSetManifold, sample: PointSample,
                   tol: Optional[float] = None,
                   condition: str = "field tangency") -> InvarianceReport:
    """Normal component |(I - P(x)) field(x)| of one vector field."""
    if tol is None:
        tol = default_tolerance(m.jacobian is not None)
    pts = sample.points
    res = np.empty(len(pts))
    for i, x in enumerate(pts):
        try:
            P = tangent_projector(m, x)
        except ValueError:
            res[i] = np.inf
            continue
        v = np.asarray(field(x), dtype=float)
        res[i] = np.linalg.norm(v - P @ v)
    return InvarianceReport(condition=condition, tolerance=tol,
                            residuals=res, points=pts, seed=sample.seed)


def check_stratonovich(model: SdeModel, m: LevelSetManifold, sample: PointSample,
                       tol: Optional[float] = None) -> InvarianceReport:
    """Tangency of the Stratonovich-corrected drift c = b - correction.

    Under tangency of b and the sigma^j, tangency of c is equivalent to
    the level-set criterion, which gives an independent route to the same
    verdict.
    """
    return check_tangency(lambda x: corrected_drift(model, x), m, sample, tol,
                          condition="stratonovich drift tangency")


def check_simultaneous(field: Callable[[np.ndarray], np.ndarray],
                       m: LevelSetManifold, sample: PointSample, radius: float,
                       tol: Optional[float] = None) -> InvarianceReport:
    """Tangency of field(y) against tangent spaces at neighbors z.

    For every ordered pair of sample points with |y - z| <= radius the
    residual |(I - P(z)) field(y)| is recorded; the reported worst point
    is the neighbor z of the worst pair.  The neighborhood radius is a
    free parameter of the criterion.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if tol is None:
        tol = default_tolerance(m.jacobian is not None)
    pts = sample.points
    residuals = []
    witnesses = []
    for i, y in enumerate(pts):
        v = np.asarray(field(y), dtype=float)
        for j, z in enumerate(pts):
            if i == j or np.linalg.norm(y - z) > radius:
                continue
            try:
                P = tangent_projector(m, z)
                residuals.append(np.linalg.norm(v - P @ v))
            except ValueError:
                residuals.append(np.inf)
            witnesses.append(z)
    if not residuals:
        raise ValueError("no neighbor pairs within radius; enlarge the sample")
    return InvarianceReport(condition=f"simultaneous tangency (radius {radius:g})",
                            tolerance=tol, residuals=np.array(residuals),
                            points=np.stack(witnesses), seed=sample.seed)


def check_chart(fields: AmbientFields, chart: ChartManifold, sample: PointSample,
                tol: Optional[float] = None) -> list[InvarianceReport]:
    """Pull the ambient fields back through a parametrization by least squares.

    Per chart point u with y = phi(u): coordinates a^j solve
    dphi(u) a^j ~ A^j(y) and the noise residual is the least-squares
    defect; the drift residual removes the quadratic correction first,
    R = L(y) - 1/2 sum_j d2phi(u)(a^j, a^j), then measures the defect of
    dphi(u) l ~ R.  Both vanish iff the fields are pushforwards from the
    chart, i.e. the parametrized manifold is invariant.
    """
    if tol is None:
        tol = TOL_ANALYTIC
    pts = sample.points
    res_A = np.empty((len(pts), fields.noise_count))
    res_L = np.empty(len(pts))
    for idx, u in enumerate(pts):
        y = chart.phi(u)
        Dphi = np.asarray(chart.dphi(u), dtype=float)
        rank = np.linalg.matrix_rank(Dphi)
        if rank < chart.chart_dim:
            res_A[idx] = np.inf
            res_L[idx] = np.inf
            continue
        D2phi = np.asarray(chart.d2phi(u), dtype=float)
        sig = np.asarray(fields.diffusion_columns(y), dtype=float)
        quad = np.zeros(sig.shape[0])
        for j in range(fields.noise_count):
            a_j, *_ = np.linalg.lstsq(Dphi, sig[:, j], rcond=None)
            res_A[idx, j] = np.linalg.norm(sig[:, j] - Dphi @ a_j)
            quad += np.einsum("imn,m,n->i", D2phi, a_j, a_j)
        R = np.asarray(fields.drift(y), dtype=float) - 0.5 * quad
        ell, *_ = np.linalg.lstsq(Dphi, R, rcond=None)
        res_L[idx] = np.linalg.norm(R - Dphi @ ell)
    reports = [InvarianceReport(
        condition=f"chart noise residual {j}",
        tolerance=tol, residuals=res_A[:, j], points=pts, seed=sample.seed)
        for j in range(fields.noise_count)]
    reports.append(InvarianceReport(
        condition="chart drift residual",
        tolerance=tol, residuals=res_L, points=pts, seed=sample.seed))
    return reports


def empirical_invariance(model: SdeModel, m: LevelSetManifold, x0, T: float,
                         dts: Sequence[float], paths: int,
                         seed: int = 0) -> list[tuple[float, float]]:
    """Monte-Carlo deviation table [(dt, mean over paths of max_t |f(X_t)|)].

    x0 must be feasible.  Deviations shrink with dt at the strong Euler
    rate when the manifold is invariant; blow-ups propagate.
    """
    x0 = np.asarray(x0, dtype=float)
    if np.max(np.abs(m.value(x0))) > max(m.feas_tol, 1e-8):
        raise ValueError("x0 is not on the manifold")
    table = []
    for dt in dts:
        devs = np.empty(paths)
        for p in range(paths):
            traj = euler_maruyama(model, x0, T, dt, seed=seed, path_index=p)
            vals = np.array([np.linalg.norm(m.value(x)) for x in traj.states])
            devs[p] = vals.max()
        table.append((float(dt), float(devs.mean())))
    return table
