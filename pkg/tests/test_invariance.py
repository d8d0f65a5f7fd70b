"""Invariance criteria: known verdicts, route agreement, empirical decay."""

import numpy as np
import pytest

from hermstoch.invariance import (all_pass, check_chart, check_levelset,
                                  check_simultaneous, check_sphere,
                                  check_stratonovich, check_tangency,
                                  empirical_invariance, fields_from_sde,
                                  reports_to_json)
from hermstoch.manifolds import (PointSample, hyperplane_manifold,
                                 sample_sphere, sphere_manifold,
                                 spherical_chart)
from hermstoch.models import (KNOWN_VERDICTS, SDE_MODELS, hyperplane_tangent_model,
                              make_sde_model, stroock_sphere_model, zero_model)
from hermstoch.sde import SdeModel


SPHERE_SAMPLE = sample_sphere(40, 3, seed=1)


def test_stroock_levelset_passes_tight():
    reports = check_levelset(stroock_sphere_model(3), sphere_manifold(3),
                             SPHERE_SAMPLE)
    assert all_pass(reports)
    assert max(r.max_abs for r in reports) <= 1e-10


def test_constant_drift_fails_with_expected_residual():
    # b = e1 has normal component; the generator residual on |x|^2 - 1
    # is exactly 2 x_1, so the worst point pins the failure
    model = SdeModel(dimension=3, noise_count=1,
                     drift=lambda x: np.array([1.0, 0.0, 0.0]),
                     diffusion_columns=lambda x: np.zeros((3, 1)))
    reports = check_levelset(model, sphere_manifold(3), SPHERE_SAMPLE)
    gen = [r for r in reports if r.condition.startswith("generator")][0]
    assert not gen.verdict
    expected = 2.0 * np.max(np.abs(SPHERE_SAMPLE.points[:, 0]))
    assert gen.max_abs == pytest.approx(expected, rel=1e-12)


def test_hyperplane_tangent_model_passes():
    model = hyperplane_tangent_model()
    m = hyperplane_manifold(np.array([0.0, 0.0, 1.0]))
    pts = np.hstack([np.random.Generator(
        np.random.Philox(key=np.array([2, 0], dtype=np.uint64))
    ).standard_normal((25, 2)), np.zeros((25, 1))])
    reports = check_levelset(model, m, PointSample(points=pts))
    assert all_pass(reports)


def test_check_sphere_matches_levelset_verdicts():
    for name, expected in KNOWN_VERDICTS.items():
        model = make_sde_model(name)
        if model.dimension != 3:
            continue
        lv = all_pass(check_levelset(model, sphere_manifold(3), SPHERE_SAMPLE))
        sp = all_pass(check_sphere(model, SPHERE_SAMPLE))
        st = check_stratonovich(model, sphere_manifold(3), SPHERE_SAMPLE)
        noise_ok = all(r.verdict for r in check_sphere(model, SPHERE_SAMPLE)[1:])
        assert lv == expected, name
        assert sp == expected, name
        # Stratonovich tangency equals the criterion whenever the noise
        # fields are tangent (it is a drift-only restatement)
        if noise_ok:
            assert st.verdict == expected, name


def test_sphere_radial_residual_value():
    # b = x gives <x, b> = 1 on the unit sphere: informative failure
    model = make_sde_model("radial-drift-sphere")
    drift = check_sphere(model, SPHERE_SAMPLE)[0]
    assert drift.max_abs == pytest.approx(1.0, rel=1e-12)
    assert drift.mean_abs == pytest.approx(1.0, rel=1e-12)


def test_driftless_stroock_fails_only_on_drift():
    model = make_sde_model("driftless-stroock-sphere")
    reports = check_sphere(model, SPHERE_SAMPLE)
    assert not reports[0].verdict  # drift balance broken
    assert all(r.verdict for r in reports[1:])  # noise still tangent
    assert reports[0].max_abs == pytest.approx(1.0, rel=1e-10)


def test_tangency_examples():
    m = sphere_manifold(3)
    rot = check_tangency(lambda x: np.array([-x[1], x[0], 0.0]), m,
                         SPHERE_SAMPLE, condition="rotation")
    assert rot.verdict and rot.max_abs <= 1e-10
    rad = check_tangency(lambda x: x, m, SPHERE_SAMPLE)
    assert not rad.verdict
    assert rad.max_abs == pytest.approx(1.0, rel=1e-12)


def test_second_order_consistency_of_routes():
    # drift with a genuinely tangent but position-dependent part: the
    # level-set generator residual and the sphere drift balance must agree
    base = stroock_sphere_model(3)

    def drift(x):
        return np.array([-x[1], x[0], 0.0]) + base.drift(x)

    model = SdeModel(dimension=3, noise_count=3, drift=drift,
                     diffusion_columns=base.diffusion_columns,
                     diffusion_jacobians=base.diffusion_jacobians)
    lv = check_levelset(model, sphere_manifold(3), SPHERE_SAMPLE)
    sp = check_sphere(model, SPHERE_SAMPLE)
    assert all_pass(lv) and all_pass(sp)
    gen = [r for r in lv if r.condition.startswith("generator")][0]
    # the two drift residuals differ by the factor 2 from d(|x|^2) = 2x
    np.testing.assert_allclose(gen.residuals, 2.0 * sp[0].residuals,
                               atol=1e-9)


def test_simultaneous_tangency():
    m = hyperplane_manifold(np.array([0.0, 0.0, 1.0]))
    gen = np.random.Generator(np.random.Philox(key=np.array([5, 0],
                                                            dtype=np.uint64)))
    pts = np.hstack([gen.standard_normal((30, 2)), np.zeros((30, 1))])
    sample = PointSample(points=pts)
    ok = check_simultaneous(lambda y: np.array([y[0], 1.0, 0.0]), m, sample,
                            radius=2.0)
    assert ok.verdict
    # constant field e1 - x1 * x on the sphere is tangent at x itself but
    # not at neighbors: simultaneity fails even though tangency holds
    ms = sphere_manifold(3)
    field = lambda y: np.array([1.0, 0.0, 0.0]) - y[0] * y
    tan = check_tangency(field, ms, SPHERE_SAMPLE)
    assert tan.verdict
    sim = check_simultaneous(field, ms, SPHERE_SAMPLE, radius=0.5)
    assert not sim.verdict
    zero = check_simultaneous(lambda y: np.zeros(3), ms, SPHERE_SAMPLE,
                              radius=0.5)
    assert zero.verdict and zero.max_abs == 0.0
    with pytest.raises(ValueError):
        check_simultaneous(field, ms, SPHERE_SAMPLE, radius=-1.0)
    with pytest.raises(ValueError):
        check_simultaneous(field, ms, SPHERE_SAMPLE, radius=1e-6)


def test_chart_identity_trivial():
    # identity chart on R^2: everything is a pushforward, residuals vanish
    from hermstoch.manifolds import ChartManifold
    chart = ChartManifold(chart_dim=2, ambient_dim=2,
                          phi=lambda u: u,
                          dphi=lambda u: np.eye(2),
                          d2phi=lambda u: np.zeros((2, 2, 2)))
    model = SdeModel(dimension=2, noise_count=1,
                     drift=lambda x: np.array([x[1], -x[0]]),
                     diffusion_columns=lambda x: np.array([[1.0], [0.5]]))
    sample = PointSample(points=np.array([[0.1, 0.2], [1.0, -1.0]]))
    reports = check_chart(fields_from_sde(model), chart, sample)
    assert max(r.max_abs for r in reports) <= 1e-12


def test_chart_spherical_with_stroock():
    chart = spherical_chart()
    gen = np.random.Generator(np.random.Philox(key=np.array([6, 0],
                                                            dtype=np.uint64)))
    us = np.column_stack([gen.uniform(0.4, np.pi - 0.4, 15),
                          gen.uniform(0.0, 2 * np.pi, 15)])
    reports = check_chart(fields_from_sde(stroock_sphere_model(3)), chart,
                          PointSample(points=us))
    assert all_pass(reports)
    assert max(r.max_abs for r in reports) <= 1e-8


def test_chart_detects_normal_field():
    chart = spherical_chart()
    model = SdeModel(dimension=3, noise_count=1,
                     drift=lambda x: x,  # radial: not a pushforward
                     diffusion_columns=lambda x: np.zeros((3, 1)))
    sample = PointSample(points=np.array([[1.0, 0.3]]))
    reports = check_chart(fields_from_sde(model), chart, sample)
    drift = [r for r in reports if "drift" in r.condition][0]
    assert drift.max_abs == pytest.approx(1.0, rel=1e-10)


def test_empirical_invariance_zero_model():
    table = empirical_invariance(zero_model(3), sphere_manifold(3),
                                 np.array([1.0, 0.0, 0.0]), T=0.5,
                                 dts=[0.1, 0.05], paths=3)
    assert all(dev == 0.0 for _, dev in table)


def test_empirical_invariance_stroock_decays():
    model = stroock_sphere_model(3)
    table = empirical_invariance(model, sphere_manifold(3),
                                 np.array([0.0, 0.0, 1.0]), T=0.25,
                                 dts=[2e-2, 5e-3], paths=8, seed=3)
    (dt1, dev1), (dt2, dev2) = table
    assert dev2 < dev1
    assert dev1 < 0.2


def test_empirical_invariance_infeasible_start():
    with pytest.raises(ValueError):
        empirical_invariance(zero_model(3), sphere_manifold(3),
                             np.array([2.0, 0.0, 0.0]), T=0.1, dts=[0.1],
                             paths=1)


def test_report_json_schema():
    reports = check_sphere(stroock_sphere_model(3), SPHERE_SAMPLE)
    payload = reports_to_json(reports)
    assert isinstance(payload, list)
    for entry in payload:
        assert set(entry) == {"condition", "tolerance", "max_abs", "mean_abs",
                              "n_points", "verdict", "worst_point"}
        assert entry["verdict"] in ("pass", "fail")
        assert entry["n_points"] == len(SPHERE_SAMPLE)
        assert len(entry["worst_point"]) == 3
