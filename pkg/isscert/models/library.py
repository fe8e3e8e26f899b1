import numpy as np

from ..exceptions import ConfigException, DimensionError
from .polynomial import Polynomial, PolyMatrix

FACTOR_TOL = 1e-12


class FunctionLibrary(object):
    """Known regressor functions of the drift and input channels

    The unknown dynamics are ``xdot = A Z(x) + B W(x) u``. Optionally the
    library carries a factorization ``Z = H Zhat`` used by the convex programs.
    """

    def __repr__(self):
        return '<FunctionLibrary - N={}, M={}, m={}, n={}>'.format(
            self.N, self.M, self.m, self.n)

    def __init__(self, Z, W, zhat=None, H=None, validate=True):
        """Instantiate a new FunctionLibrary

        Args:
            Z (list[Polynomial]): drift regressors, length N
            W (PolyMatrix): input regressors, M x m
            zhat (list[Polynomial]): optional vector of length Nhat
            H (PolyMatrix): optional N x Nhat factor with Z = H zhat
            validate (bool): run the library checks at construction
        """
        if not Z:
            raise DimensionError('Library needs at least one drift regressor')
        self.Z = list(Z)
        self.W = W
        self.zhat = list(zhat) if zhat is not None else None
        self.H = H
        self.n = self.Z[0].nvars
        if validate:
            self.validate()

    @property
    def N(self):
        return len(self.Z)

    @property
    def M(self):
        return self.W.rows

    @property
    def m(self):
        return self.W.cols

    @property
    def Nhat(self):
        return len(self.zhat) if self.zhat is not None else 0

    def has_factorization(self):
        return self.zhat is not None and self.H is not None

    def validate(self):
        """Check dimensions, Z(0) = 0 and, when present, Z = H zhat"""
        if any(p.nvars != self.n for p in self.Z) or self.W.nvars != self.n:
            raise DimensionError('Library entries must share {} variables'.format(self.n))
        for i, p in enumerate(self.Z):
            if p.coefficient((0,) * self.n) != 0.0:
                raise ConfigException('Z[{}] = {} does not vanish at the origin'.format(i, p))
        if (self.zhat is None) != (self.H is None):
            raise ConfigException('zhat and H must be given together')
        if not self.has_factorization():
            return
        if self.H.shape != (self.N, self.Nhat):
            raise DimensionError('H has shape {}, expected {}'.format(
                self.H.shape, (self.N, self.Nhat)))
        for i, p in enumerate(self.zhat):
            if p.coefficient((0,) * self.n) != 0.0:
                raise ConfigException('zhat[{}] does not vanish at the origin'.format(i))
        expanded = (self.H @ PolyMatrix.column(self.zhat)).column_vector()
        for i, (lhs, rhs) in enumerate(zip(expanded, self.Z)):
            gap = lhs.max_abs_difference(rhs)
            if gap > FACTOR_TOL:
                raise ConfigException(
                    'H zhat differs from Z in row {} by {:.3g}'.format(i, gap))

    def evaluate_z(self, x):
        return np.array([p.evaluate(x) for p in self.Z])

    def evaluate_w(self, x):
        return self.W.evaluate(x)

    def regressor(self, x, u):
        """Stacked vector (Z(x), W(x) u)"""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return np.concatenate([self.evaluate_z(x), self.evaluate_w(x) @ u])

    def embedded(self, nvars):
        """Copy of the library over nvars indeterminates (state first)"""
        return FunctionLibrary(
            [p.embed(nvars) for p in self.Z], self.W.embed(nvars),
            [p.embed(nvars) for p in self.zhat] if self.zhat is not None else None,
            self.H.embed(nvars) if self.H is not None else None,
            validate=False)

    def to_dict(self):
        data = {
            'nvars': self.n,
            'Z': [p.to_json() for p in self.Z],
            'W': self.W.to_json(),
        }
        if self.has_factorization():
            data['zhat'] = [p.to_json() for p in self.zhat]
            data['H'] = self.H.to_json()
        return data

    @classmethod
    def from_dict(cls, data):
        n = data['nvars']
        zhat = data.get('zhat')
        H = data.get('H')
        return cls(
            [Polynomial.from_json(p, n) for p in data['Z']],
            PolyMatrix.from_json(data['W'], n),
            [Polynomial.from_json(p, n) for p in zhat] if zhat is not None else None,
            PolyMatrix.from_json(H, n) if H is not None else None)
