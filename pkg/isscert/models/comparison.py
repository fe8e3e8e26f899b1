import numpy as np

from .. import settings
from ..exceptions import DimensionError
from .polynomial import Polynomial, PolyMatrix


class ClassKInfty(object):
    """Even polynomial alpha(r) = c_1 r^2 + c_2 r^4 + ... + c_N r^(2N)

    Such a function is of class K-infinity iff every c_k is nonnegative and
    at least one is positive.
    """

    def __repr__(self):
        return '<ClassKInfty - {}>'.format(self)

    def __init__(self, coeffs, label=None):
        self.coeffs = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if self.coeffs.ndim != 1 or not len(self.coeffs):
            raise DimensionError('ClassKInfty needs a nonempty coefficient vector')
        self.label = label

    def __str__(self):
        parts = ['{:.4g}r^{}'.format(c, 2 * (k + 1)) for k, c in enumerate(self.coeffs)
                 if c != 0.0]
        return ' + '.join(parts) if parts else '0'

    @property
    def terms(self):
        return len(self.coeffs)

    @property
    def degree(self):
        return 2 * self.terms

    def __call__(self, r):
        """Evaluate at a radius or an array of radii"""
        r2 = np.asarray(r, dtype=float) ** 2
        result = np.zeros_like(r2)
        power = np.ones_like(r2)
        for c in self.coeffs:
            power = power * r2
            result = result + c * power
        return result

    def of_norm(self, vectors):
        """alpha(|v|) for one vector or rows of vectors"""
        vectors = np.asarray(vectors, dtype=float)
        if vectors.ndim == 1:
            return float(self(np.linalg.norm(vectors)))
        return self(np.linalg.norm(vectors, axis=1))

    def polynomial(self, nvars, var_indices):
        """alpha(|v|) as a polynomial in the indeterminates var_indices"""
        base = Polynomial.norm_squared(nvars, var_indices)
        result = Polynomial.zero(nvars)
        power = base
        for c in self.coeffs:
            if c != 0.0:
                result = result + power.scale(c)
            power = power * base
        return result

    def violations(self, mu=0.0, tol=settings.EQ_TOL, samples=100, seed=0):
        """Reasons why this is not a valid class K-infinity function

        Checks coefficient signs, the coefficient sum against mu, alpha(0) = 0
        and strict monotonicity on sampled pairs 0 <= r1 < r2 <= 10.

        Returns:
            list[str]
        """
        problems = []
        if np.any(self.coeffs < -tol):
            problems.append('negative coefficient {:.3g}'.format(self.coeffs.min()))
        if self.coeffs.sum() < mu - tol:
            problems.append('coefficient sum {:.3g} below {:.3g}'.format(self.coeffs.sum(), mu))
        if self.coeffs.sum() <= 0:
            problems.append('all coefficients vanish')
        if self(0.0) != 0.0:
            problems.append('alpha(0) = {:.3g}'.format(float(self(0.0))))
        rng = np.random.default_rng(seed)
        pairs = np.sort(rng.uniform(0.0, 10.0, size=(samples, 2)), axis=1)
        pairs = pairs[pairs[:, 1] - pairs[:, 0] > 1e-6]
        if len(pairs) and np.any(self(pairs[:, 1]) <= self(pairs[:, 0])):
            problems.append('not strictly increasing on sampled radii')
        return problems

    def is_valid(self, mu=0.0, tol=settings.EQ_TOL, samples=100, seed=0):
        return not self.violations(mu, tol, samples, seed)

    def to_dict(self):
        return {'coeffs': self.coeffs.tolist(), 'label': self.label}

    @classmethod
    def from_dict(cls, data):
        return cls(data['coeffs'], data.get('label'))


class MatrixClassKInfty(object):
    """Gamma(r) = C_0 + C_1 r^2 + ... + C_N r^(2N) with symmetric PSD C_k"""

    def __repr__(self):
        return '<MatrixClassKInfty - {}x{}, N={}>'.format(self.size, self.size,
                                                          len(self.matrices) - 1)

    def __init__(self, matrices, label=None):
        self.matrices = [np.atleast_2d(np.asarray(c, dtype=float)) for c in matrices]
        if not self.matrices:
            raise DimensionError('MatrixClassKInfty needs at least C_0')
        size = self.matrices[0].shape[0]
        if any(c.shape != (size, size) for c in self.matrices):
            raise DimensionError('All C_k must be square of the same size')
        self.matrices = [0.5 * (c + c.T) for c in self.matrices]
        self.label = label

    def __str__(self):
        if all(np.allclose(c, c[0, 0] * np.eye(self.size)) for c in self.matrices):
            parts = ['{:.4g}'.format(c[0, 0]) if k == 0 else '{:.4g}r^{}'.format(c[0, 0], 2 * k)
                     for k, c in enumerate(self.matrices)]
            suffix = ' (times I)' if self.size > 1 else ''
            return ' + '.join(parts) + suffix
        return ' + '.join('C{}{}'.format(k, ' r^{}'.format(2 * k) if k else '')
                          for k in range(len(self.matrices)))

    @property
    def size(self):
        return self.matrices[0].shape[0]

    def __call__(self, r):
        r2 = float(r) ** 2
        return sum(c * r2 ** k for k, c in enumerate(self.matrices))

    def quadratic(self, v):
        """v^T Gamma(|v|) v"""
        v = np.asarray(v, dtype=float)
        return float(v @ self(np.linalg.norm(v)) @ v)

    def alpha4(self):
        """sum_{k=1}^{N+1} lambda_max(C_{k-1}) r^(2k), an upper bound of v^T Gamma(|v|) v"""
        return ClassKInfty([max(float(np.linalg.eigvalsh(c)[-1]), 0.0) for c in self.matrices],
                           label='alpha4')

    def polymatrix(self, nvars, var_indices):
        base = Polynomial.norm_squared(nvars, var_indices)
        result = PolyMatrix.zeros(self.size, self.size, nvars)
        power = Polynomial.constant(1.0, nvars)
        for c in self.matrices:
            result = result + PolyMatrix.from_array(c, nvars) * power
            power = power * base
        return result

    def violations(self, eps=0.0, tol=settings.PSD_TOL):
        problems = []
        for k, c in enumerate(self.matrices):
            low = np.linalg.eigvalsh(c)[0]
            if low < -tol * max(1.0, np.abs(c).max()):
                problems.append('C_{} has eigenvalue {:.3g}'.format(k, low))
        total = np.linalg.eigvalsh(sum(self.matrices))[0]
        if total < eps - tol or total <= 0:
            problems.append('sum of C_k has smallest eigenvalue {:.3g} below {:.3g}'.format(
                total, eps))
        return problems

    def is_valid(self, eps=0.0, tol=settings.PSD_TOL):
        return not self.violations(eps, tol)

    def to_dict(self):
        return {'matrices': [c.tolist() for c in self.matrices], 'label': self.label}

    @classmethod
    def from_dict(cls, data):
        return cls(data['matrices'], data.get('label'))
