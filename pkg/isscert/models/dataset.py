import csv
import io
import json

import numpy as np

from ..exceptions import ConfigException, DimensionError
from ..utils import format_float, sha256_text


class Trajectory(object):
    """Dense RK4 trajectory with the exogenous signals that drove it"""

    def __repr__(self):
        return '<Trajectory - {} steps{}>'.format(
            len(self.times), ', diverged' if self.diverged else '')

    def __init__(self, times, states, inputs, noise, diverged=False, input_signal=None,
                 noise_signal=None, exogenous=None):
        self.times = np.asarray(times, dtype=float)
        self.states = np.asarray(states, dtype=float)
        self.inputs = np.asarray(inputs, dtype=float)
        self.noise = np.asarray(noise, dtype=float)
        self.diverged = diverged
        self.input_signal = input_signal
        self.noise_signal = noise_signal
        # disturbance w or d of a closed-loop run, one row per time
        self.exogenous = None if exogenous is None else np.asarray(exogenous, dtype=float)

    @property
    def horizon(self):
        return float(self.times[-1])

    def state_at(self, times):
        """Linear interpolation of the states; exact on integration steps"""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(times < self.times[0] - 1e-12) or np.any(times > self.times[-1] + 1e-12):
            raise ConfigException('Sample times outside the trajectory support [{}, {}]'.format(
                self.times[0], self.times[-1]))
        out = np.zeros((len(times), self.states.shape[1]))
        for k in range(self.states.shape[1]):
            out[:, k] = np.interp(times, self.times, self.states[:, k])
        return out


class Dataset(object):
    """Noisy samples (t, x, u, xdot) with the noise energy bound delta"""

    def __repr__(self):
        return '<Dataset - T={}, n={}, m={}, delta={}>'.format(self.T, self.n, self.m,
                                                               self.delta)

    def __init__(self, times, states, inputs, xdot, delta, trajectory=None, metadata=None):
        self.times = np.asarray(times, dtype=float).reshape(-1)
        self.states = np.atleast_2d(np.asarray(states, dtype=float))
        self.inputs = np.asarray(inputs, dtype=float).reshape(len(self.times), -1)
        self.xdot = np.atleast_2d(np.asarray(xdot, dtype=float))
        self.delta = float(delta)
        if self.T < 1:
            raise ConfigException('A dataset needs at least one sample')
        if not (self.states.shape[0] == self.xdot.shape[0] == self.T):
            raise DimensionError('Sample arrays disagree on T')
        if self.states.shape != self.xdot.shape:
            raise DimensionError('x and xdot dimensions differ')
        if self.delta <= 0:
            raise ConfigException('delta must be positive')
        if trajectory is None:
            trajectory = np.zeros(self.T, dtype=int)
        self.trajectory = np.asarray(trajectory, dtype=int)
        self.metadata = dict(metadata or {})

    @property
    def T(self):
        return len(self.times)

    @property
    def n(self):
        return self.states.shape[1]

    @property
    def m(self):
        return self.inputs.shape[1]

    @property
    def trajectory_count(self):
        return int(len(np.unique(self.trajectory)))

    @property
    def multi_trajectory(self):
        return self.trajectory_count > 1

    @classmethod
    def concatenate(cls, datasets):
        """Stack datasets collected from separate experiments

        All parts must share dimensions and delta.
        """
        if not datasets:
            raise ConfigException('Nothing to concatenate')
        first = datasets[0]
        if any(ds.delta != first.delta or ds.n != first.n or ds.m != first.m
               for ds in datasets):
            raise DimensionError('Datasets differ in delta or dimensions')
        index = np.concatenate([np.full(ds.T, k) for k, ds in enumerate(datasets)])
        metadata = dict(first.metadata)
        metadata['trajectories'] = len(datasets)
        return cls(np.concatenate([ds.times for ds in datasets]),
                   np.vstack([ds.states for ds in datasets]),
                   np.vstack([ds.inputs for ds in datasets]),
                   np.vstack([ds.xdot for ds in datasets]),
                   first.delta, index, metadata)

    def header(self):
        return (['t'] + ['x{}'.format(k + 1) for k in range(self.n)]
                + ['u{}'.format(k + 1) for k in range(self.m)]
                + ['xdot{}'.format(k + 1) for k in range(self.n)])

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator='\n')
        writer.writerow(self.header())
        for k in range(self.T):
            row = np.concatenate([[self.times[k]], self.states[k], self.inputs[k], self.xdot[k]])
            writer.writerow([format_float(v) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, delta, metadata=None):
        """Parse the CSV layout written by to_csv

        Raises:
            ConfigException: malformed header or rows
        """
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigException('Empty dataset file')
        n = sum(1 for h in header if h.startswith('x') and not h.startswith('xdot'))
        m = sum(1 for h in header if h.startswith('u'))
        expected = (['t'] + ['x{}'.format(k + 1) for k in range(n)]
                    + ['u{}'.format(k + 1) for k in range(m)]
                    + ['xdot{}'.format(k + 1) for k in range(n)])
        if header != expected:
            raise ConfigException('Unexpected dataset header {}'.format(','.join(header)))
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ConfigException('Line {} has {} fields, expected {}'.format(
                    lineno, len(row), len(header)))
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise ConfigException('Line {} is not numeric'.format(lineno))
        if not rows:
            raise ConfigException('Dataset file has no samples')
        data = np.array(rows)
        metadata = dict(metadata or {})
        trajectory = metadata.pop('trajectory_index', None)
        return cls(data[:, 0], data[:, 1:1 + n], data[:, 1 + n:1 + n + m],
                   data[:, 1 + n + m:], delta, trajectory, metadata)

    def metadata_dict(self):
        data = dict(self.metadata)
        data.update({
            'delta': self.delta,
            'T': self.T,
            'trajectories': self.trajectory_count,
            'multi_trajectory': self.multi_trajectory,
            'trajectory_index': self.trajectory.tolist(),
            'dataset_hash': self.content_hash(),
        })
        return data

    def metadata_json(self):
        return json.dumps(self.metadata_dict(), indent=2, sort_keys=True)

    def content_hash(self):
        return sha256_text(self.to_csv() + format_float(self.delta))
