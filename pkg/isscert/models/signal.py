import numpy as np

from .. import settings
from ..exceptions import ConfigException

KINDS = ('interpolated_gaussian', 'interpolated_uniform_ball', 'constant', 'custom_samples')


class Signal(object):
    """Piecewise-linear signal through knots, held constant outside them"""

    def __repr__(self):
        return '<Signal - {} knots, dim {}>'.format(len(self.times), self.dim)

    def __init__(self, times, values):
        self.times = np.atleast_1d(np.asarray(times, dtype=float))
        values = np.asarray(values, dtype=float)
        self.values = values.reshape(len(self.times), -1) if values.size else \
            np.zeros((len(self.times), 0))
        if np.any(np.diff(self.times) <= 0):
            raise ConfigException('Signal knot times must be increasing')

    @property
    def dim(self):
        return self.values.shape[1]

    @classmethod
    def zero(cls, dim):
        return cls([0.0], np.zeros((1, dim)))

    def is_zero(self):
        return not np.any(self.values)

    def __call__(self, t):
        if self.dim == 0:
            return np.zeros(0)
        return np.array([np.interp(t, self.times, self.values[:, k]) for k in range(self.dim)])

    def evaluate_many(self, times):
        times = np.asarray(times, dtype=float)
        out = np.zeros((len(times), self.dim))
        for k in range(self.dim):
            out[:, k] = np.interp(times, self.times, self.values[:, k])
        return out

    def max_norm(self):
        if self.dim == 0:
            return 0.0
        return float(np.linalg.norm(self.values, axis=1).max())


class SignalSpec(object):
    """Recipe for a random or fixed exogenous signal

    ``interpolated_gaussian`` draws i.i.d. normal knots, ``interpolated_uniform_ball``
    draws knots uniformly from the ball of the given radius; both are linearly
    interpolated on a uniform knot grid, so ball signals stay in the ball.
    """

    def __repr__(self):
        return '<SignalSpec - {}>'.format(self.kind)

    def __init__(self, kind='constant', mean=0.0, variance=1.0, radius=1.0,
                 knot_spacing=settings.KNOT_SPACING, value=None, times=None, samples=None):
        if kind not in KINDS:
            raise ConfigException('Unknown signal kind {}; expected one of {}'.format(
                kind, ', '.join(KINDS)))
        if kind == 'custom_samples' and (times is None or samples is None):
            raise ConfigException('custom_samples signals need times and samples')
        if knot_spacing <= 0:
            raise ConfigException('knot_spacing must be positive')
        self.kind = kind
        self.mean = mean
        self.variance = variance
        self.radius = radius
        self.knot_spacing = knot_spacing
        self.value = value
        self.times = times
        self.samples = samples

    @classmethod
    def zero(cls):
        return cls('constant', value=0.0)

    def _knot_times(self, horizon):
        count = int(np.ceil(horizon / self.knot_spacing - 1e-9)) + 1
        return np.arange(count) * self.knot_spacing

    def realize(self, dim, horizon, rng):
        """Draw a Signal of dimension dim covering [0, horizon]

        Args:
            dim (int): signal dimension
            horizon (float): time span to cover
            rng (numpy.random.Generator): source of randomness

        Returns:
            Signal
        """
        if self.kind == 'constant':
            value = 0.0 if self.value is None else self.value
            value = np.broadcast_to(np.asarray(value, dtype=float), (dim,))
            return Signal([0.0], value.reshape(1, dim))
        if self.kind == 'custom_samples':
            samples = np.asarray(self.samples, dtype=float).reshape(len(self.times), -1)
            if samples.shape[1] != dim:
                raise ConfigException('custom samples have dimension {}, expected {}'.format(
                    samples.shape[1], dim))
            return Signal(self.times, samples)
        knots = self._knot_times(horizon)
        if self.kind == 'interpolated_gaussian':
            values = rng.normal(self.mean, np.sqrt(self.variance), size=(len(knots), dim))
        else:
            directions = rng.normal(size=(len(knots), dim))
            norms = np.linalg.norm(directions, axis=1, keepdims=True)
            norms[norms == 0] = 1.0
            radii = self.radius * rng.uniform(size=(len(knots), 1)) ** (1.0 / max(dim, 1))
            values = directions / norms * radii
        return Signal(knots, values)

    def to_dict(self):
        data = {'kind': self.kind}
        if self.kind == 'interpolated_gaussian':
            data.update(mean=self.mean, variance=self.variance, knot_spacing=self.knot_spacing)
        elif self.kind == 'interpolated_uniform_ball':
            data.update(radius=self.radius, knot_spacing=self.knot_spacing)
        elif self.kind == 'constant':
            data.update(value=self.value if self.value is not None else 0.0)
        else:
            data.update(times=list(self.times), samples=np.asarray(self.samples).tolist())
        return data

    @classmethod
    def from_dict(cls, data):
        if data is None:
            return cls.zero()
        return cls(**data)
