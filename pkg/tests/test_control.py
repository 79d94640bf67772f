import math

import numpy as np
import pytest

from lipinterp.control import (ControlConfig, MonteCarloResult, NarxRegressor, PendulumState, closed_loop_matrix,
                               control_law, episode_rng, observe_acceleration, pendulum_step,
                               pendulum_true_dynamics, read_trace_csv, run_episode, run_monte_carlo,
                               spectral_radius, write_mc_summary_csv, write_trace_csv)
from lipinterp.core import HolderMetric, LipschitzInterpolator, SampleSet
from lipinterp.errors import ConfigurationError, DimensionError
from lipinterp.noise import make_uniform
from lipinterp.tables import read_csv

XI = (2 * math.pi, 0.0)


def test_true_dynamics():
    assert pendulum_true_dynamics(PendulumState(0.0, 0.0)) == 0.0
    assert pendulum_true_dynamics(PendulumState(math.pi / 2, 0.0)) == -1.0
    assert pendulum_true_dynamics(PendulumState(0.0, 1.0)) == -1.0


def test_step():
    assert pendulum_step(PendulumState(0.0, 0.0), 0.0, 0.1) == PendulumState(0.0, 0.0)
    s = pendulum_step(PendulumState(math.pi / 2, 0.0), 0.0, 0.1)
    assert s.q == math.pi / 2 and s.q_dot == pytest.approx(-0.1, abs=1e-16)
    s = pendulum_step(PendulumState(0.0, 1.0), 0.0, 0.1)
    assert s.q == pytest.approx(0.1, abs=1e-16) and s.q_dot == pytest.approx(0.9, abs=1e-16)
    with pytest.raises(ConfigurationError):
        pendulum_step(PendulumState(0.0, 0.0), 0.0, 0.0)


def test_observation():
    s = PendulumState(0.3, -0.2)
    assert observe_acceleration(s, 1.5, None, np.random.default_rng(0)) == pendulum_true_dynamics(s) + 1.5
    rng = np.random.default_rng(0)
    obs = [observe_acceleration(s, 1.5, make_uniform(2.0), rng) for _ in range(1000)]
    base = pendulum_true_dynamics(s) + 1.5
    assert min(obs) >= base - 2.0 and max(obs) <= base + 2.0
    again = [observe_acceleration(s, 1.5, make_uniform(2.0), np.random.default_rng(0)) for _ in range(1)]
    assert again[0] == obs[0]


def test_control_law():
    zero = lambda x: 0.0
    assert control_law(PendulumState(*XI), zero, XI, 1.0, 1.0) == 0.0
    assert control_law(PendulumState(0.0, 0.0), zero, XI, 1.0, 1.0) == pytest.approx(2 * math.pi, abs=1e-15)
    assert control_law(PendulumState(0.0, 0.0), lambda x: -1.0, XI, 1.0, 1.0) == pytest.approx(1 + 2 * math.pi, abs=1e-15)


def test_closed_loop_matrix():
    np.testing.assert_allclose(closed_loop_matrix(0.1, 1.0, 1.0), [[1, 0.1], [-0.1, 0.9]], rtol=0, atol=1e-16)
    np.testing.assert_array_equal(closed_loop_matrix(0.0, 3.0, 2.0), np.eye(2))
    np.testing.assert_array_equal(closed_loop_matrix(1.0, 0.0, 0.0), [[1, 1], [0, 1]])


def test_spectral_radius_examples():
    assert spectral_radius(np.eye(2)) == 1.0
    assert spectral_radius([[1, 0.1], [-0.1, 0.9]]) == pytest.approx(math.sqrt(0.91), abs=1e-12)
    assert spectral_radius(np.diag([0.5, -0.8])) == 0.8


def test_spectral_radius_matches_eigvals(rng):
    for _ in range(200):
        m = rng.normal(size=(2, 2))
        assert spectral_radius(m) == pytest.approx(np.abs(np.linalg.eigvals(m)).max(), rel=1e-9)
    with pytest.raises(DimensionError):
        spectral_radius(np.eye(3))


def test_config_rejects_unstable_gains():
    with pytest.raises(ConfigurationError):
        ControlConfig(k1=0.0, k2=0.0)
    with pytest.raises(ConfigurationError):
        ControlConfig(delta=1.0, k1=1.0, k2=30.0)
    with pytest.raises(ConfigurationError):
        ControlConfig(delta=0.0)


def test_zero_steps():
    t = run_episode(ControlConfig(steps=0), episode_rng(0, 0))
    assert len(t) == 1
    assert (t.q[0], t.qdot[0]) == (-2.0, -1.0)


def test_trace_length_and_first_step():
    cfg = ControlConfig(steps=25)
    t = run_episode(cfg, episode_rng(0, 0))
    assert len(t) == 26
    # nothing learned yet: zero prior
    assert t.f_hat[0] == 0.0
    assert t.u[0] == pytest.approx(1.0 * (2 * math.pi + 2) + 1.0 * 1.0, abs=1e-12)


def test_error_recursion_identity():
    cfg = ControlConfig(steps=300, repetitions=1)
    t = run_episode(cfg, episode_rng(5, 0))
    m = cfg.matrix
    z = t.zeta
    for n in range(cfg.steps):
        pred = m @ z[n] - cfg.delta * t.d_model[n] * np.array([0.0, 1.0])
        np.testing.assert_allclose(z[n + 1], pred, rtol=0, atol=1e-10)


def test_oracle_contraction():
    cfg = ControlConfig(noise=None, oracle=True, repetitions=1)
    t = run_episode(cfg, episode_rng(0, 0))
    np.testing.assert_array_equal(t.d_model, 0.0)
    assert t.err_norm[-1] <= 1e-3
    # linear recursion bound ||zeta_n|| <= ||M^n|| ||zeta_0||
    m = cfg.matrix
    for n in (50, 150, 300):
        assert t.err_norm[n] <= np.linalg.norm(np.linalg.matrix_power(m, n), 2) * t.err_norm[0] * (1 + 1e-9)
    # geometric decay at the spectral radius over windows longer than the rotation period
    rho = spectral_radius(m)
    for n in (100, 200):
        assert t.err_norm[n + 60] <= t.err_norm[n] * rho ** 60 * np.linalg.cond(np.linalg.eig(m)[1])


def test_model_error_bounded():
    cfg = ControlConfig(steps=300, repetitions=1)
    for rep in range(3):
        t = run_episode(cfg, episode_rng(1, rep))
        states = np.stack([t.q, t.qdot], axis=1)
        for n in range(1, len(t)):
            visited = states[: n + 1]
            diam = max(np.linalg.norm(visited - visited[i], axis=1).max() for i in range(len(visited)))
            assert abs(t.d_model[n]) <= 2 * 2.0 + 2 * cfg.lipschitz * diam


def test_learned_prediction_matches_core():
    cfg = ControlConfig(steps=40, repetitions=1)
    t = run_episode(cfg, episode_rng(2, 0))
    rng = episode_rng(2, 0)
    data = SampleSet(2)
    model = LipschitzInterpolator(HolderMetric(2, 1.0), 11.0)
    for n in range(cfg.steps):
        x = np.array([t.q[n], t.qdot[n]])
        if n:
            assert t.f_hat[n] == model.predict(data, x)
        acc = pendulum_true_dynamics(PendulumState(*x)) + t.u[n] + make_uniform(2.0).sample(rng)
        data.add(x, acc - t.u[n])


def test_monte_carlo_single_rep_and_determinism():
    cfg = ControlConfig(steps=50, repetitions=1, seed=4)
    mc = run_monte_carlo(cfg)
    np.testing.assert_array_equal(mc.mean_error, mc.traces[0].err_norm)
    np.testing.assert_array_equal(mc.std_error, 0.0)
    again = run_monte_carlo(cfg)
    assert all(a == b for a, b in zip(mc.traces, again.traces))


def test_trace_csv(tmp_path):
    mc = run_monte_carlo(ControlConfig(steps=20, repetitions=2))
    write_trace_csv(mc, tmp_path / "t.csv")
    write_mc_summary_csv(mc, tmp_path / "s.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "rep,step,q,qdot,u,zeta1,zeta2,err_norm,d_model"
    assert len(lines) == 1 + 2 * 21
    back = read_trace_csv(tmp_path / "t.csv")
    for rep, t in enumerate(mc.traces):
        for col in ("q", "qdot", "u", "zeta1", "zeta2", "err_norm", "d_model"):
            np.testing.assert_array_equal(back[rep][col], getattr(t, col))
    summary = read_csv(tmp_path / "s.csv")
    assert list(summary[0]) == ["step", "mean_err", "std_err"]
    assert float(summary[7]["mean_err"]) == mc.mean_error[7]


# --- NARX regressor ----------------------------------------------------------------------

def test_narx_layout():
    r = NarxRegressor(d_y=2, d_u=1)
    assert r.size == 2 + 2
    np.testing.assert_array_equal(r.vector(5.0), [0, 0, 0, 5])
    r.push(1.0, 5.0)
    r.push(2.0, 6.0)
    np.testing.assert_array_equal(r.vector(7.0), [1, 2, 6, 7])
    r.push(3.0, 7.0)
    np.testing.assert_array_equal(r.vector(8.0), [2, 3, 7, 8])


def test_narx_vector_outputs():
    r = NarxRegressor(d_y=1, d_u=0, l=2, s=3)
    assert r.size == 2 + 3
    r.push([1.0, 2.0], [0.0, 0.0, 0.0])
    np.testing.assert_array_equal(r.vector([4.0, 5.0, 6.0]), [1, 2, 4, 5, 6])
    with pytest.raises(DimensionError):
        r.vector([1.0])


def test_narx_online_learning_improves():
    # y_n = 0.8 sin(y_{n-1}) + 0.5 tanh(u_n) + e_n learned online from its own regressors
    f = lambda x: 0.8 * math.sin(x[0]) + 0.5 * math.tanh(x[1])
    rng = np.random.default_rng(0)
    reg = NarxRegressor(d_y=1, d_u=0)
    data = SampleSet(reg.size)
    model = LipschitzInterpolator(HolderMetric(2, 1.0), 1.0)
    errs = []
    for n in range(1500):
        u = rng.uniform(-2, 2)
        x = reg.vector(u)
        if len(data):
            errs.append(abs(model.predict(data, x) - f(x)))
        y = f(x) + rng.uniform(-0.1, 0.1)
        data.add(x, y)
        reg.push(y, u)
    assert np.mean(errs[-200:]) < 0.5 * np.mean(errs[:200])
