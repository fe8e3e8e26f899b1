import numpy as np

from .. import settings
from ..exceptions import DimensionError
from ..utils import canonical_json, sha256_text, sym_sqrt


class SampleQuadric(object):
    """Quadratic constraint carried by one sample

    A pair zeta = [A B]^T is consistent with sample i iff
    C + B^T zeta + zeta^T B + zeta^T A zeta <= 0, with C = xdot xdot^T - delta I,
    B = -z xdot^T and A = z z^T for z = (Z(x), W(x) u).
    """

    def __repr__(self):
        return '<SampleQuadric - n={}, N+M={}>'.format(self.C.shape[0], self.A.shape[0])

    def __init__(self, C, B, A):
        self.C = np.asarray(C, dtype=float)
        self.B = np.asarray(B, dtype=float)
        self.A = np.asarray(A, dtype=float)

    @classmethod
    def from_sample(cls, z, xdot, delta):
        z = np.asarray(z, dtype=float)
        xdot = np.asarray(xdot, dtype=float)
        return cls(np.outer(xdot, xdot) - delta * np.eye(len(xdot)), -np.outer(z, xdot),
                   np.outer(z, z))

    def value(self, zeta):
        return self.C + self.B.T @ zeta + zeta.T @ self.B + zeta.T @ self.A @ zeta


class EllipsoidModel(object):
    """Matrix ellipsoid containing every pair [A B] consistent with the data

    Members are zeta^T with zeta = zeta_bar + Abar^-1/2 U Qbar^1/2, |U| <= 1.
    """

    def __repr__(self):
        return '<EllipsoidModel - n={}, N+M={}>'.format(self.n, self.size)

    def __init__(self, Abar, Bbar, taus=None, dataset_hash=None, logdet=None, stats=None):
        self.Abar = np.atleast_2d(np.asarray(Abar, dtype=float))
        self.Bbar = np.atleast_2d(np.asarray(Bbar, dtype=float))
        if self.Abar.shape != (self.Bbar.shape[0],) * 2:
            raise DimensionError('Abar {} and Bbar {} disagree'.format(
                self.Abar.shape, self.Bbar.shape))
        self.Abar = 0.5 * (self.Abar + self.Abar.T)
        self.taus = np.asarray(taus if taus is not None else [], dtype=float)
        self.dataset_hash = dataset_hash
        self.logdet = logdet
        self.stats = dict(stats or {})
        self.zeta_bar = -np.linalg.solve(self.Abar, self.Bbar)
        self.Qbar = np.eye(self.n)

    @property
    def n(self):
        return self.Bbar.shape[1]

    @property
    def size(self):
        return self.Abar.shape[0]

    @property
    def abar_inv_sqrt(self):
        return sym_sqrt(self.Abar, inverse=True, floor=settings.SQRT_EIG_FLOOR)

    @property
    def qbar_sqrt(self):
        return sym_sqrt(self.Qbar, floor=settings.SQRT_EIG_FLOOR)

    def center_pair(self):
        """The pair [A B] at the center, shape n x (N + M)"""
        return self.zeta_bar.T

    def member(self, upsilon):
        """zeta for a contraction U of shape (N + M) x n"""
        upsilon = np.asarray(upsilon, dtype=float)
        if upsilon.shape != (self.size, self.n):
            raise DimensionError('Upsilon has shape {}, expected {}'.format(
                upsilon.shape, (self.size, self.n)))
        return self.zeta_bar + self.abar_inv_sqrt @ upsilon @ self.qbar_sqrt

    def lhs(self, zeta):
        """Bbar^T Abar^-1 Bbar + Bbar^T zeta + zeta^T Bbar + zeta^T Abar zeta - I"""
        zeta = np.asarray(zeta, dtype=float)
        return (self.Bbar.T @ np.linalg.solve(self.Abar, self.Bbar) + self.Bbar.T @ zeta
                + zeta.T @ self.Bbar + zeta.T @ self.Abar @ zeta - np.eye(self.n))

    def centered_lhs(self, zeta):
        """Same matrix written as (zeta - zeta_bar)^T Abar (zeta - zeta_bar) - I"""
        delta = np.asarray(zeta, dtype=float) - self.zeta_bar
        return delta.T @ self.Abar @ delta - np.eye(self.n)

    def to_dict(self):
        return {
            'Abar': self.Abar.tolist(),
            'Bbar': self.Bbar.tolist(),
            'zeta_bar': self.zeta_bar.tolist(),
            'Qbar': self.Qbar.tolist(),
            'taus': self.taus.tolist(),
            'logdet': self.logdet,
            'dataset_hash': self.dataset_hash,
            'stats': self.stats,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data['Abar'], data['Bbar'], data.get('taus'), data.get('dataset_hash'),
                   data.get('logdet'), data.get('stats'))

    def content_hash(self):
        return sha256_text(canonical_json({'Abar': self.Abar, 'Bbar': self.Bbar,
                                           'dataset_hash': self.dataset_hash}))
