"""Ground-truth simulation and noisy derivative data collection"""
import json
import logging

import numpy as np

from . import settings
from .aws.s3 import file_to_str, join_uri, str_to_file
from .exceptions import ConfigException, NoiseBoundException
from .models.dataset import Dataset, Trajectory
from .models.signal import Signal, SignalSpec

logger = logging.getLogger(__name__)

DATASET_CSV = 'dataset.csv'
DATASET_META = 'dataset.json'


def _realize(signal, dim, horizon, rng):
    if signal is None:
        return Signal.zero(dim)
    if isinstance(signal, Signal):
        if signal.dim != dim:
            raise ConfigException('Signal has dimension {}, expected {}'.format(signal.dim, dim))
        return signal
    return signal.realize(dim, horizon, rng)


def rk4(field, x0, horizon, step, guard=settings.DIVERGENCE_GUARD):
    """Fixed-step classical Runge-Kutta integration of xdot = field(t, x)

    The last step is shortened to land exactly on the horizon.

    Returns:
        (times, states, diverged)
    """
    if step <= 0:
        raise ConfigException('Integration step must be positive')
    if horizon < step:
        raise ConfigException('Horizon {} is shorter than the step {}'.format(horizon, step))
    count = int(np.ceil(horizon / step - 1e-9))
    times = [0.0]
    states = [np.asarray(x0, dtype=float)]
    diverged = False
    t = 0.0
    x = states[0]
    for k in range(count):
        h = min(step, horizon - t)
        k1 = field(t, x)
        k2 = field(t + h / 2, x + h / 2 * k1)
        k3 = field(t + h / 2, x + h / 2 * k2)
        k4 = field(t + h, x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = horizon if k == count - 1 else (k + 1) * step
        if not np.all(np.isfinite(x)) or np.linalg.norm(x) > guard:
            diverged = True
            logger.warning('Trajectory diverged at t=%.4g', t)
            break
        times.append(t)
        states.append(x)
    return np.array(times), np.array(states), diverged


def integrate_trajectory(system, x0, u=None, d=None, horizon=settings.HORIZON,
                         step=settings.INTEGRATION_STEP, rng=None, seed=None):
    """Simulate xdot = A Z(x) + B W(x) u(t) + d(t)

    Args:
        system (TrueSystem): ground truth
        x0 (array): initial state
        u (SignalSpec or Signal): input, zero if omitted
        d (SignalSpec or Signal): process noise, zero if omitted
        horizon (float): final time
        step (float): integration step
        rng (numpy.random.Generator): randomness for the signals
        seed (int): used when rng is not given

    Returns:
        Trajectory
    """
    rng = rng if rng is not None else np.random.default_rng(seed)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (system.n,):
        raise ConfigException('x0 has shape {}, expected ({},)'.format(x0.shape, system.n))
    u_sig = _realize(u, system.m, horizon, rng)
    d_sig = _realize(d, system.n, horizon, rng)

    def field(t, x):
        return system.rhs(x, u_sig(t), d_sig(t))

    times, states, diverged = rk4(field, x0, horizon, step)
    return Trajectory(times, states, u_sig.evaluate_many(times), d_sig.evaluate_many(times),
                      diverged, u_sig, d_sig)


def uniform_sample_times(horizon, count):
    if count < 1:
        raise ConfigException('At least one sample is required, got T={}'.format(count))
    return np.linspace(0.0, horizon, count, endpoint=False)


def collect_dataset(trajectory, system, sample_times, d=None, delta=1.0, rng=None,
                    metadata=None):
    """Sample states and measure derivatives as the exact right-hand side plus noise

    Args:
        trajectory (Trajectory): source of x(t) and u(t)
        system (TrueSystem): ground truth used for the exact right-hand side
        sample_times (array): times within the trajectory support
        d (SignalSpec or Signal): measurement noise; the trajectory's own noise
            signal is used when omitted
        delta (float): noise energy bound, |d(t_i)|^2 <= delta

    Returns:
        Dataset

    Raises:
        NoiseBoundException: a noise sample exceeds the bound
    """
    sample_times = np.atleast_1d(np.asarray(sample_times, dtype=float))
    if len(sample_times) < 1:
        raise ConfigException('At least one sample is required')
    if d is None:
        d_sig = trajectory.noise_signal or Signal.zero(system.n)
    else:
        rng = rng if rng is not None else np.random.default_rng()
        d_sig = _realize(d, system.n, trajectory.horizon, rng)
    states = trajectory.state_at(sample_times)
    inputs = trajectory.input_signal.evaluate_many(sample_times) \
        if trajectory.input_signal is not None else np.zeros((len(sample_times), system.m))
    noise = d_sig.evaluate_many(sample_times)
    energy = np.sum(noise ** 2, axis=1)
    worst = int(np.argmax(energy))
    if energy[worst] > delta:
        raise NoiseBoundException(
            'Noise sample at t={:.4g} has |d|^2 = {:.6g} > delta = {:.6g}'.format(
                sample_times[worst], energy[worst], delta))
    xdot = np.array([system.rhs(x, u, dk) for x, u, dk in zip(states, inputs, noise)])
    logger.info('Collected %d samples (max |d|^2 = %.4g, delta = %.4g)',
                len(sample_times), energy[worst], delta)
    return Dataset(sample_times, states, inputs, xdot, delta, metadata=metadata)


def regressor_matrices(dataset, library):
    """Z0 (N x T) and W0 (M x T) with columns Z(x_i) and W(x_i) u_i"""
    z0 = np.zeros((library.N, dataset.T))
    w0 = np.zeros((library.M, dataset.T))
    for i in range(dataset.T):
        z0[:, i] = library.evaluate_z(dataset.states[i])
        w0[:, i] = library.evaluate_w(dataset.states[i]) @ dataset.inputs[i]
    return z0, w0


def run_experiment(system, experiments, delta, samples, horizon=settings.HORIZON,
                   step=settings.INTEGRATION_STEP, seed=0, noise=None):
    """Integrate one or more experiments and collect a combined dataset

    Args:
        system (TrueSystem): ground truth
        experiments (list[dict]): each with ``x0`` and an optional ``input`` SignalSpec
        delta (float): noise energy bound
        samples (int): samples per experiment
        noise (SignalSpec): process noise entering both the motion and the measurement
        seed (int): seed of the shared random generator

    Returns:
        Dataset
    """
    rng = np.random.default_rng(seed)
    parts = []
    for k, exp in enumerate(experiments):
        traj = integrate_trajectory(system, exp['x0'], exp.get('input'), noise, horizon, step,
                                    rng=rng)
        if traj.diverged:
            raise ConfigException('Experiment {} diverged before t={}'.format(k, horizon))
        times = uniform_sample_times(horizon, samples)
        parts.append(collect_dataset(traj, system, times, delta=delta))
    dataset = parts[0] if len(parts) == 1 else Dataset.concatenate(parts)
    dataset.metadata.update({'seed': seed, 'trajectories': len(parts)})
    return dataset


def save_dataset(dataset, out_dir):
    csv_uri = join_uri(out_dir, DATASET_CSV)
    str_to_file(dataset.to_csv(), csv_uri)
    str_to_file(dataset.metadata_json(), join_uri(out_dir, DATASET_META))
    return csv_uri


def load_dataset(csv_uri, meta_uri=None):
    """Read a dataset CSV and its JSON sidecar (next to the CSV by default)"""
    if meta_uri is None:
        meta_uri = csv_uri[:-len('.csv')] + '.json' if csv_uri.endswith('.csv') \
            else csv_uri + '.json'
    try:
        metadata = json.loads(file_to_str(meta_uri))
    except ValueError as e:
        raise ConfigException('Malformed dataset metadata {}: {}'.format(meta_uri, e))
    if 'delta' not in metadata:
        raise ConfigException('Dataset metadata {} has no delta'.format(meta_uri))
    return Dataset.from_csv(file_to_str(csv_uri), metadata['delta'], metadata)
