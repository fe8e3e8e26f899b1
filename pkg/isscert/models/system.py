import numpy as np

from ..exceptions import DimensionError
from .library import FunctionLibrary
from .polynomial import PolyEvaluator, PolyMatrix


class TrueSystem(object):
    """Ground-truth dynamics xdot = A Z(x) + B W(x) u (+ d)"""

    def __repr__(self):
        return '<TrueSystem - n={}, m={}>'.format(self.n, self.m)

    def __init__(self, A_star, B_star, library):
        """Instantiate a new TrueSystem

        Args:
            A_star (ndarray): n x N drift coefficients
            B_star (ndarray): n x M input coefficients
            library (FunctionLibrary): regressors Z, W
        """
        self.A_star = np.atleast_2d(np.asarray(A_star, dtype=float))
        self.B_star = np.atleast_2d(np.asarray(B_star, dtype=float))
        self.library = library
        n = library.n
        if self.A_star.shape != (n, library.N):
            raise DimensionError('A_star has shape {}, expected {}'.format(
                self.A_star.shape, (n, library.N)))
        if self.B_star.shape != (n, library.M):
            raise DimensionError('B_star has shape {}, expected {}'.format(
                self.B_star.shape, (n, library.M)))
        self._z = PolyEvaluator(library.Z, n)
        self._w = PolyEvaluator([e for row in library.W.entries() for e in row], n)

    @property
    def n(self):
        return self.library.n

    @property
    def m(self):
        return self.library.m

    @property
    def AB(self):
        return np.hstack([self.A_star, self.B_star])

    def drift(self):
        """Polynomial vector A Z(x)"""
        return (self.A_star @ PolyMatrix.column(self.library.Z)).column_vector()

    def input_matrix(self):
        """Polynomial matrix B W(x), n x m"""
        return self.B_star @ self.library.W

    def rhs(self, x, u, d=None):
        x = np.asarray(x, dtype=float)
        z = self._z(x)
        w = self._w(x).reshape(self.library.M, self.library.m)
        value = self.A_star @ z + self.B_star @ (w @ np.atleast_1d(u))
        if d is not None:
            value = value + d
        return value

    def to_dict(self):
        return {
            'A_star': self.A_star.tolist(),
            'B_star': self.B_star.tolist(),
            'library': self.library.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data['A_star'], data['B_star'], FunctionLibrary.from_dict(data['library']))
