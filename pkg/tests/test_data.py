import numpy as np
import pytest

from isscert.data import (DATASET_CSV, collect_dataset, integrate_trajectory, load_dataset,
                          regressor_matrices, rk4, run_experiment, save_dataset,
                          uniform_sample_times)
from isscert.exceptions import ConfigException, DimensionError, NoiseBoundException
from isscert.models import Dataset, Signal, SignalSpec


def test_rk4_exponential_decay():
    times, states, diverged = rk4(lambda t, x: -x, [1.0], 1.0, 0.01)
    assert not diverged
    assert times[-1] == 1.0
    assert states[-1, 0] == pytest.approx(np.exp(-1.0), rel=1e-8)


def test_rk4_lands_on_horizon():
    times, _, _ = rk4(lambda t, x: np.zeros(1), [0.0], 0.25, 0.1)
    np.testing.assert_allclose(times, [0.0, 0.1, 0.2, 0.25])


def test_rk4_divergence_guard():
    _, states, diverged = rk4(lambda t, x: x ** 2, [10.0], 1.0, 0.01, guard=1e3)
    assert diverged
    assert np.linalg.norm(states[-1]) <= 1e3


def test_rk4_bad_step():
    with pytest.raises(ConfigException):
        rk4(lambda t, x: x, [1.0], 1.0, 0.0)
    with pytest.raises(ConfigException):
        rk4(lambda t, x: x, [1.0], 0.001, 0.01)


def test_signal_specs():
    rng = np.random.default_rng(0)
    ball = SignalSpec('interpolated_uniform_ball', radius=0.5).realize(2, 1.0, rng)
    assert ball.max_norm() <= 0.5
    assert ball.times[-1] >= 1.0
    const = SignalSpec('constant', value=[1.0, 2.0]).realize(2, 1.0, rng)
    np.testing.assert_allclose(const(0.7), [1.0, 2.0])
    with pytest.raises(ConfigException):
        SignalSpec('square_wave')
    with pytest.raises(ConfigException):
        SignalSpec('custom_samples')


def test_integrate_trajectory_shape(system):
    traj = integrate_trajectory(system, [1.0, -1.0], horizon=0.5, step=0.01, seed=0)
    assert traj.states.shape == (51, 2)
    assert traj.inputs.shape == (51, 1)
    assert not traj.diverged
    with pytest.raises(ConfigException):
        integrate_trajectory(system, [1.0, 2.0, 3.0])


def test_collect_exact_rhs_without_noise(system):
    traj = integrate_trajectory(
        system, [2.0, -2.0], u=SignalSpec('interpolated_gaussian'), horizon=0.5, step=0.01,
        seed=3)
    times = uniform_sample_times(0.5, 5)
    dataset = collect_dataset(traj, system, times, delta=0.1)
    assert dataset.T == 5
    for x, u, xdot in zip(dataset.states, dataset.inputs, dataset.xdot):
        np.testing.assert_allclose(xdot, system.rhs(x, u))


def test_collect_rejects_large_noise(system):
    traj = integrate_trajectory(system, [1.0, 1.0], horizon=0.2, step=0.01)
    loud = Signal([0.0], [[2.0, 0.0]])
    with pytest.raises(NoiseBoundException):
        collect_dataset(traj, system, [0.0, 0.1], d=loud, delta=1.0)


def test_run_experiment(experiment, dataset):
    assert dataset.T == experiment.samples
    assert dataset.metadata['seed'] == experiment.seed
    noise = dataset.xdot - np.array([experiment.system.rhs(x, u)
                                     for x, u in zip(dataset.states, dataset.inputs)])
    assert np.all(np.sum(noise ** 2, axis=1) <= experiment.delta + 1e-12)


def test_run_experiment_is_reproducible(dataset, experiment):
    again = run_experiment(experiment.system, experiment.experiments, experiment.delta,
                           experiment.samples, experiment.horizon, experiment.step,
                           experiment.seed, experiment.noise)
    assert again.content_hash() == dataset.content_hash()


def test_two_experiments(system):
    experiments = [{'x0': [1.0, 0.0], 'input': SignalSpec.zero()},
                   {'x0': [0.0, 1.0], 'input': SignalSpec('interpolated_gaussian')}]
    dataset = run_experiment(system, experiments, 1.0, 10, seed=2)
    assert dataset.T == 20
    assert dataset.multi_trajectory
    assert dataset.metadata['trajectories'] == 2


def test_regressor_matrices(dataset, base_library):
    z0, w0 = regressor_matrices(dataset, base_library)
    assert z0.shape == (4, dataset.T)
    assert w0.shape == (1, dataset.T)
    np.testing.assert_allclose(w0[0], dataset.inputs[:, 0])


def test_save_and_load(tmpdir, dataset):
    out = str(tmpdir)
    uri = save_dataset(dataset, out)
    assert uri == str(tmpdir.join(DATASET_CSV))
    loaded = load_dataset(uri)
    assert loaded.T == dataset.T
    assert loaded.delta == dataset.delta
    assert loaded.content_hash() == dataset.content_hash()


def test_load_needs_delta(tmpdir, dataset):
    csv_path = tmpdir.join('bare.csv')
    csv_path.write(dataset.to_csv())
    tmpdir.join('bare.json').write('{}')
    with pytest.raises(ConfigException):
        load_dataset(str(csv_path))


def test_malformed_csv():
    with pytest.raises(ConfigException):
        Dataset.from_csv('t,x1,xdot1\n0,1\n', 1.0)
    with pytest.raises(ConfigException):
        Dataset.from_csv('t,x1,xdot1\n0,a,1\n', 1.0)
    with pytest.raises(ConfigException):
        Dataset.from_csv('t,y1\n0,1\n', 1.0)


def test_dataset_checks():
    with pytest.raises(DimensionError):
        Dataset([0.0], [[1.0, 2.0]], [[0.0]], [[1.0]], 1.0)
    with pytest.raises(ConfigException):
        Dataset([0.0], [[1.0]], [[0.0]], [[1.0]], 0.0)


def test_rk4_is_fourth_order(system):
    def field(t, x):
        return system.rhs(x, [np.sin(t)])

    x0 = [1.0, 0.5]
    _, reference, _ = rk4(field, x0, 1.0, 0.05 / 16)
    _, coarse, _ = rk4(field, x0, 1.0, 0.05)
    _, fine, _ = rk4(field, x0, 1.0, 0.025)
    ratio = (np.linalg.norm(coarse[-1] - reference[-1]) /
             np.linalg.norm(fine[-1] - reference[-1]))
    assert 8.0 <= ratio <= 32.0


def test_ball_signal_between_knots():
    rng = np.random.default_rng(8)
    signal = SignalSpec('interpolated_uniform_ball', radius=0.7).realize(2, 3.0, rng)
    times = rng.uniform(0.0, 3.0, size=1000)
    values = signal.evaluate_many(times)
    assert np.all(np.linalg.norm(values, axis=1) <= 0.7 + 1e-12)
