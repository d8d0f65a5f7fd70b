"""Euler-Maruyama integrator: statistics, determinism, failure modes."""

import numpy as np
import pytest

from hermstoch.models import ornstein_uhlenbeck_model, zero_model
from hermstoch.sde import (BlowUpError, SdeModel, Trajectory,
                           coupled_increments, euler_maruyama)


def brownian(d=1):
    return SdeModel(dimension=d, noise_count=d,
                    drift=lambda x: np.zeros(d),
                    diffusion_columns=lambda x: np.eye(d),
                    name="brownian")


def test_zero_model_constant_path():
    traj = euler_maruyama(zero_model(3), np.array([1.0, -2.0, 0.5]),
                          T=1.0, dt=0.01, seed=5)
    np.testing.assert_array_equal(traj.states, np.tile(traj.states[0], (101, 1)))
    assert traj.times[-1] == pytest.approx(1.0)


def test_brownian_terminal_variance():
    # Var X_T = T for standard Brownian motion; the Euler step adds no
    # bias here, so the sample variance should land within 3 standard
    # errors of T (SE of a variance estimate ~ T * sqrt(2/n))
    T, n_paths = 1.0, 10_000
    finals = np.empty(n_paths)
    model = brownian()
    for i in range(n_paths):
        traj = euler_maruyama(model, np.zeros(1), T=T, dt=0.1,
                              seed=42, path_index=i)
        finals[i] = traj.states[-1, 0]
    se = T * np.sqrt(2.0 / n_paths)
    assert abs(finals.var() - T) < 3 * se
    assert abs(finals.mean()) < 3 * np.sqrt(T / n_paths)


def test_ou_stationary_variance():
    # long OU path: time average of X^2 approaches sigma^2/(2 theta) = 1/2,
    # up to the known Euler bias sigma^2/(2 theta - theta^2 dt) at dt = 0.01
    model = ornstein_uhlenbeck_model(theta=1.0, sigma=1.0)
    traj = euler_maruyama(model, np.zeros(1), T=400.0, dt=0.01, seed=7)
    burn = len(traj.states) // 10
    est = np.mean(traj.states[burn:, 0] ** 2)
    assert est == pytest.approx(0.5, rel=0.10)


def test_reproducibility_bit_exact():
    model = ornstein_uhlenbeck_model()
    a = euler_maruyama(model, np.array([1.0]), T=1.0, dt=1e-3, seed=11)
    b = euler_maruyama(model, np.array([1.0]), T=1.0, dt=1e-3, seed=11)
    np.testing.assert_array_equal(a.states, b.states)
    c = euler_maruyama(model, np.array([1.0]), T=1.0, dt=1e-3, seed=12)
    assert not np.array_equal(a.states, c.states)


def test_path_index_gives_independent_streams():
    inc0 = coupled_increments(3, 100, 2, 0.01, path_index=0)
    inc1 = coupled_increments(3, 100, 2, 0.01, path_index=1)
    assert not np.array_equal(inc0, inc1)
    # correlation between supposedly independent streams stays small
    r = np.corrcoef(inc0.ravel(), inc1.ravel())[0, 1]
    assert abs(r) < 0.2
    np.testing.assert_array_equal(inc0, coupled_increments(3, 100, 2, 0.01))


def test_coupled_increments_statistics():
    dt, n = 1e-2, 100_000
    inc = coupled_increments(0, n, 2, dt)
    assert inc.shape == (n, 2)
    # column means: CLT bound 4 sqrt(dt)/sqrt(n)
    assert np.all(np.abs(inc.mean(axis=0)) < 4 * np.sqrt(dt) / np.sqrt(n))
    assert np.allclose(inc.var(axis=0), dt, rtol=0.05)


def test_common_noise_reuse():
    model = brownian(2)
    inc = coupled_increments(9, 50, 2, 0.02)
    a = euler_maruyama(model, np.zeros(2), T=1.0, dt=0.02, increments=inc)
    b = euler_maruyama(model, np.zeros(2), T=1.0, dt=0.02, increments=inc)
    np.testing.assert_array_equal(a.states, b.states)
    np.testing.assert_array_equal(a.states[-1], inc.sum(axis=0))


def test_blow_up_reports_step_and_time():
    # dX = X^2 dt explodes in finite time from x0 = 1 (true blow-up t = 1)
    model = SdeModel(dimension=1, noise_count=1,
                     drift=lambda x: x ** 2,
                     diffusion_columns=lambda x: np.zeros((1, 1)))
    with pytest.raises(BlowUpError) as info, np.errstate(over="ignore"):
        with np.testing.suppress_warnings() as sup:
            sup.filter(RuntimeWarning)
            euler_maruyama(model, np.array([1.0]), T=2.0, dt=1e-3, seed=0)
    err = info.value
    assert 0 < err.step <= 2000
    assert err.time == pytest.approx(err.step * 1e-3)
    assert "non-finite" in str(err)


def test_shape_and_dt_validation():
    model = brownian()
    with pytest.raises(ValueError):
        euler_maruyama(model, np.zeros(1), T=1.0, dt=-0.1)
    with pytest.raises(ValueError):
        euler_maruyama(model, np.zeros(1), T=0.0, dt=0.1)
    with pytest.raises(ValueError):
        euler_maruyama(model, np.zeros(2), T=1.0, dt=0.1)
    with pytest.raises(ValueError):
        euler_maruyama(model, np.zeros(1), T=1.0, dt=0.1,
                       increments=np.zeros((3, 1)))


def test_trajectory_roundtrips(tmp_path):
    traj = euler_maruyama(brownian(2), np.zeros(2), T=0.5, dt=0.05, seed=2)
    jpath = tmp_path / "traj.json"
    traj.save(jpath)
    import json
    back = Trajectory.from_json(json.loads(jpath.read_text()))
    np.testing.assert_array_equal(back.states, traj.states)
    np.testing.assert_array_equal(back.wiener_increments, traj.wiener_increments)
    assert back.seed == 2

    cpath = tmp_path / "traj.csv"
    traj.to_csv(cpath)
    rows = cpath.read_text().strip().splitlines()
    assert rows[0] == "t,x_1,x_2"
    assert len(rows) == len(traj.times) + 1
    last = [float(v) for v in rows[-1].split(",")]
    assert last[1:] == pytest.approx(list(traj.states[-1]), abs=0)


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory(times=np.arange(3.0), states=np.zeros((2, 1)),
                   wiener_increments=np.zeros((2, 1)))
    with pytest.raises(ValueError):
        Trajectory(times=np.arange(3.0), states=np.zeros((3, 1)),
                   wiener_increments=np.zeros((1, 1)))
