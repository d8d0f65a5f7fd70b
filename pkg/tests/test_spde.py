"""Coefficient-space SPDE: fields, both solution routes, cross-checks."""

import json

import numpy as np
import pytest
from scipy.linalg import null_space

from hermstoch.hermite import TruncationScheme
from hermstoch.invariance import check_chart
from hermstoch.manifolds import PointSample
from hermstoch.models import (delta_profile_spde, gaussian_profile,
                              gaussian_profile_spde, spde_drift_field,
                              spde_noise_field)
from hermstoch.operators import derivative_matrix, translation_operator
from hermstoch.sde import BlowUpError, coupled_increments
from hermstoch.sobolev import CoefficientVector, norm_p, project_function
from hermstoch.spde import (SpdeModel, SpdeTrajectory, ambient_fields,
                            compare_trajectories, galerkin_integrate,
                            orbit_chart, pairing_fields, spde_diffusion,
                            spde_drift, translate_profile,
                            translated_profile_solution)

GAUSS40 = gaussian_profile_spde(40)


def zero_vec(scheme):
    return CoefficientVector(scheme, np.zeros(scheme.basis_size))


def transport_model(max_degree=40):
    """Drift pairing pinned to 1 along the flow: dy = -d/dz y dt.

    The pairing vector is taken from the kernel of the antisymmetric
    derivative matrix (nonempty for even max degree), so <b_1, y_t> is
    conserved exactly, even by the discrete Euler steps.
    """
    scheme = TruncationScheme(1, max_degree)
    k = null_space(derivative_matrix(0, scheme))[:, 0]
    y0 = project_function(gaussian_profile, scheme)
    b1 = CoefficientVector(scheme, k / (k @ y0.coefficients))
    m = SpdeModel(scheme=scheme, b_coeffs=(b1,),
                  sigma_coeffs=((zero_vec(scheme),),), profile=y0)
    return m, y0


def test_drift_and_diffusion_of_zero_state():
    y = zero_vec(GAUSS40.scheme)
    assert np.all(spde_drift(GAUSS40, y).coefficients == 0.0)
    assert all(np.all(a.coefficients == 0.0)
               for a in spde_diffusion(GAUSS40, y))


def test_field_scaling_degrees():
    # A^j is quadratic in y; the drift splits into a quadratic transport
    # part (b pairing) and a cubic second-order part (sigma pairing twice)
    m = GAUSS40
    y = m.profile
    y2 = CoefficientVector(m.scheme, 2.0 * y.coefficients)
    for a2, a in zip(spde_diffusion(m, y2), spde_diffusion(m, y)):
        np.testing.assert_allclose(a2.coefficients, 4.0 * a.coefficients,
                                   atol=1e-12)
    zero = zero_vec(m.scheme)
    b_only = SpdeModel(scheme=m.scheme, b_coeffs=m.b_coeffs,
                       sigma_coeffs=((zero,),), profile=m.profile,
                       profile_kind="smooth", profile_fn=m.profile_fn)
    s_only = SpdeModel(scheme=m.scheme, b_coeffs=(zero,),
                       sigma_coeffs=m.sigma_coeffs, profile=m.profile,
                       profile_kind="smooth", profile_fn=m.profile_fn)
    np.testing.assert_allclose(spde_drift(b_only, y2).coefficients,
                               4.0 * spde_drift(b_only, y).coefficients,
                               atol=1e-12)
    np.testing.assert_allclose(spde_drift(s_only, y2).coefficients,
                               8.0 * spde_drift(s_only, y).coefficients,
                               atol=1e-12)
    # the full drift is the sum of the two parts
    np.testing.assert_allclose(
        spde_drift(m, y).coefficients,
        spde_drift(b_only, y).coefficients + spde_drift(s_only, y).coefficients,
        atol=1e-12)


def test_transport_drift_formula():
    # with the pairing frozen at 1 and no noise, L(y) = -D y exactly
    m, y0 = transport_model()
    D = derivative_matrix(0, m.scheme)
    np.testing.assert_allclose(spde_drift(m, y0).coefficients,
                               -(D @ y0.coefficients), atol=1e-12)


def test_transport_matches_translation_oracle():
    # the flow of dy = -d/dz y dt is translation; Euler converges to the
    # matrix-exponential oracle at first order in dt
    m, y0 = transport_model()
    T = 0.5
    exact = translation_operator(np.array([T]), m.scheme) @ y0.coefficients
    k_over_c = m.b_coeffs[0].coefficients
    errs = []
    for dt in (1e-2, 5e-3):
        inc = np.zeros((int(round(T / dt)), 1))
        traj = galerkin_integrate(m, y0, T, dt, inc)
        pairing = traj.states @ k_over_c
        np.testing.assert_allclose(pairing, 1.0, atol=1e-12)
        errs.append(np.linalg.norm(traj.states[-1] - exact))
    assert errs[1] < 2e-3
    assert errs[0] / errs[1] == pytest.approx(2.0, abs=0.1)


def test_galerkin_common_noise_determinism():
    inc = coupled_increments(21, 50, 1, 1e-3)
    a = galerkin_integrate(GAUSS40, GAUSS40.profile, 0.05, 1e-3, inc, seed=21)
    b = galerkin_integrate(GAUSS40, GAUSS40.profile, 0.05, 1e-3, inc, seed=21)
    np.testing.assert_array_equal(a.states, b.states)


def test_delta_profile_pairing_reproduces_fields():
    m = delta_profile_spde(60)
    b_bar, sigma_bar = pairing_fields(m)
    for x in (-2.0, -0.5, 0.0, 0.7, 1.5):
        pt = np.array([[x]])
        assert b_bar(np.array([x]))[0] == pytest.approx(
            spde_drift_field(pt).item(), abs=1e-12)
        assert sigma_bar(np.array([x]))[0, 0] == pytest.approx(
            spde_noise_field(pt).item(), abs=1e-12)


def test_translate_profile_routes_agree():
    m = gaussian_profile_spde(60)
    x = np.array([0.3])
    exact = translate_profile(m, x, method="exact")
    moved = translate_profile(m, x, method="expm")
    diff = CoefficientVector(m.scheme, exact.coefficients - moved.coefficients)
    assert norm_p(diff, 0.0) < 1e-6
    with pytest.raises(ValueError):
        translate_profile(m, x, method="nope")


def test_drift_consistency_on_orbit():
    # L(tau_x Phi) = dpsi(x) b_bar(x) + 1/2 d2psi(x)(sigma_bar, sigma_bar):
    # the SPDE drift restricted to the orbit is the pushforward of the
    # paired drift plus the quadratic chart correction
    m = gaussian_profile_spde(60)
    chart = orbit_chart(m)
    fields = ambient_fields(m)
    b_bar, sigma_bar = pairing_fields(m)
    for x in (np.array([0.0]), np.array([0.3]), np.array([-0.8])):
        y = chart.phi(x)
        L = fields.drift(y)
        sb = sigma_bar(x)[:, 0]
        pred = chart.dphi(x) @ b_bar(x) + \
            0.5 * np.einsum("bmn,m,n->b", chart.d2phi(x), sb, sb)
        diff = CoefficientVector(m.scheme, L - pred)
        assert norm_p(diff, -1.0) < 1e-12


def test_orbit_chart_residuals_on_solution():
    # chart pullback residuals vanish along translated-profile anchors
    m = gaussian_profile_spde(40)
    inc = coupled_increments(5, 100, 1, 1e-3)
    traj = translated_profile_solution(m, np.zeros(1), 0.1, 1e-3, inc, seed=5)
    anchors = traj.anchor_path[::25]
    reports = check_chart(ambient_fields(m), orbit_chart(m),
                          PointSample(points=anchors), tol=1e-4)
    assert all(r.verdict for r in reports)
    assert max(r.max_abs for r in reports) < 1e-10


def test_one_step_route_difference_is_first_order():
    # mean one-step distance between the Galerkin and translated-profile
    # routes under shared noise scales linearly in dt
    m = GAUSS40
    y0 = m.profile

    def one_step(dt, seed):
        inc = coupled_increments(seed, 1, 1, dt)
        g = galerkin_integrate(m, y0, dt, dt, inc, seed=seed)
        p = translated_profile_solution(m, np.zeros(1), dt, dt, inc, seed=seed)
        return compare_trajectories(g, p, p=-1.0)[-1]

    means = []
    for dt in (1e-2, 5e-3):
        means.append(np.mean([one_step(dt, s) for s in range(100)]))
    assert means[0] / means[1] == pytest.approx(2.0, abs=0.2)


def test_compare_trajectories_properties():
    inc = coupled_increments(31, 40, 1, 1e-3)
    a = galerkin_integrate(GAUSS40, GAUSS40.profile, 0.04, 1e-3, inc, seed=31)
    np.testing.assert_array_equal(compare_trajectories(a, a, p=-1.0), 0.0)
    inc2 = coupled_increments(32, 40, 1, 1e-3)
    b = galerkin_integrate(GAUSS40, GAUSS40.profile, 0.04, 1e-3, inc2, seed=32)
    dab = compare_trajectories(a, b, p=-1.0)
    assert dab[0] == 0.0 and np.max(dab) > 0.0
    np.testing.assert_array_equal(dab, compare_trajectories(b, a, p=-1.0))


def test_galerkin_blow_up():
    inc = np.zeros((10, 1))
    inc[0, 0] = 1e160  # quadratic drift squares the huge state next step
    with pytest.raises(BlowUpError) as info, np.errstate(over="ignore",
                                                         invalid="ignore"):
        galerkin_integrate(GAUSS40, GAUSS40.profile, 0.01, 1e-3, inc)
    assert info.value.step == 2


def test_spde_trajectory_roundtrip(tmp_path):
    inc = coupled_increments(8, 20, 1, 1e-3)
    traj = translated_profile_solution(GAUSS40, np.zeros(1), 0.02, 1e-3,
                                       inc, seed=8)
    path = tmp_path / "spde.json"
    traj.save(path)
    data = json.loads(path.read_text())
    assert data["order"] == "graded-lex"
    assert data["dimension"] == 1 and data["max_degree"] == 40
    back = SpdeTrajectory.from_json(data)
    assert back.scheme == traj.scheme
    assert back.regularity == traj.regularity == 0.0
    np.testing.assert_array_equal(back.states, traj.states)
    np.testing.assert_array_equal(back.anchor_path, traj.anchor_path)
    # norm series at the stored regularity matches a direct computation
    np.testing.assert_allclose(
        back.norms(), [norm_p(CoefficientVector(GAUSS40.scheme, s), 0.0)
                       for s in traj.states], atol=1e-12)


def test_delta_model_regularity_default():
    assert delta_profile_spde(20).regularity == -1.0
    assert gaussian_profile_spde(20).regularity == 0.0


def test_validation_errors():
    scheme = TruncationScheme(1, 10)
    other = TruncationScheme(1, 12)
    y = project_function(gaussian_profile, scheme)
    with pytest.raises(ValueError):
        SpdeModel(scheme=scheme, b_coeffs=(), sigma_coeffs=((y,),), profile=y)
    with pytest.raises(ValueError):
        SpdeModel(scheme=scheme, b_coeffs=(y,), sigma_coeffs=((),), profile=y)
    with pytest.raises(ValueError):
        SpdeModel(scheme=scheme, b_coeffs=(y,), sigma_coeffs=((y,),),
                  profile=project_function(gaussian_profile, other))
    with pytest.raises(ValueError):
        SpdeModel(scheme=scheme, b_coeffs=(y,), sigma_coeffs=((y,),),
                  profile=y, profile_kind="weird")
    m = SpdeModel(scheme=scheme, b_coeffs=(y,), sigma_coeffs=((y,),), profile=y)
    with pytest.raises(ValueError):
        spde_drift(m, project_function(gaussian_profile, other))
    with pytest.raises(ValueError):
        galerkin_integrate(m, y, 0.01, 1e-3, np.zeros((3, 1)))
    with pytest.raises(ValueError):
        orbit_chart(delta_profile_spde(10))
    a = SpdeTrajectory(scheme=scheme, times=np.zeros(1),
                       states=np.zeros((1, scheme.basis_size)), regularity=0.0)
    b = SpdeTrajectory(scheme=other, times=np.zeros(1),
                       states=np.zeros((1, other.basis_size)), regularity=0.0)
    with pytest.raises(ValueError):
        compare_trajectories(a, b)
