"""Sparse multivariate polynomials and polynomial matrices

Coefficients are 64-bit floats keyed by exponent tuples. Terms are kept in
graded lexicographic order so serialization and coefficient matching are
reproducible.
"""
import itertools
import numbers

import numpy as np

from ..exceptions import DimensionError


def monomial_key(exponents):
    """Sort key for graded lexicographic order (1, x1, x2, x1^2, x1x2, ...)"""
    return (sum(exponents), tuple(-e for e in exponents))


def monomials(nvars, max_degree, min_degree=0, var_indices=None, max_per_var=None):
    """Enumerate monomials in graded lexicographic order

    Args:
        nvars (int): number of indeterminates
        max_degree (int): largest total degree
        min_degree (int): smallest total degree
        var_indices (list[int]): only use these indeterminates
        max_per_var (list[int]): optional cap on the degree in each indeterminate

    Returns:
        list[tuple]
    """
    if var_indices is None:
        var_indices = range(nvars)
    var_indices = list(var_indices)
    result = []
    for degree in range(max(min_degree, 0), max_degree + 1):
        for combo in itertools.combinations_with_replacement(var_indices, degree):
            exps = [0] * nvars
            for v in combo:
                exps[v] += 1
            if max_per_var is not None and any(
                    e > cap for e, cap in zip(exps, max_per_var)):
                continue
            result.append(tuple(exps))
    return sorted(result, key=monomial_key)


def monomial_str(exponents, names=None):
    factors = []
    for i, e in enumerate(exponents):
        if e == 0:
            continue
        name = names[i] if names else 'x{}'.format(i + 1)
        factors.append(name if e == 1 else '{}^{}'.format(name, e))
    return '*'.join(factors) if factors else '1'


def add_exponents(a, b):
    return tuple(i + j for i, j in zip(a, b))


def _is_scalar(value):
    return isinstance(value, numbers.Number) and not isinstance(value, bool)


class Polynomial(object):
    """Immutable sparse polynomial with real coefficients"""

    # numpy defers arithmetic with numpy scalars and arrays to our reflected operators
    __array_ufunc__ = None

    def __repr__(self):
        return '<Polynomial - {}>'.format(self)

    def __init__(self, terms=None, nvars=None):
        """Instantiate a new Polynomial

        Args:
            terms (dict): map from exponent tuple to coefficient
            nvars (int): number of indeterminates, inferred from terms if omitted
        """
        terms = terms or {}
        if nvars is None:
            if not terms:
                raise DimensionError('nvars is required for the zero polynomial')
            nvars = len(next(iter(terms)))
        self.nvars = int(nvars)
        self._terms = {}
        for exps, coeff in terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.nvars:
                raise DimensionError(
                    'Monomial {} does not have {} exponents'.format(exps, self.nvars))
            if any(e < 0 for e in exps):
                raise ValueError('Negative exponent in {}'.format(exps))
            coeff = float(coeff)
            if coeff != 0.0:
                self._terms[exps] = coeff

    @classmethod
    def zero(cls, nvars):
        return cls({}, nvars)

    @classmethod
    def constant(cls, value, nvars):
        return cls({(0,) * nvars: value}, nvars)

    @classmethod
    def variable(cls, index, nvars):
        exps = [0] * nvars
        exps[index] = 1
        return cls({tuple(exps): 1.0}, nvars)

    @classmethod
    def monomial(cls, exponents, coeff=1.0):
        return cls({tuple(exponents): coeff}, len(exponents))

    @classmethod
    def norm_squared(cls, nvars, var_indices):
        """Sum of squares of the selected indeterminates, i.e. |v|^2"""
        terms = {}
        for i in var_indices:
            exps = [0] * nvars
            exps[i] = 2
            terms[tuple(exps)] = 1.0
        return cls(terms, nvars)

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return [(m, self._terms[m]) for m in sorted(self._terms, key=monomial_key)]

    def monomials(self):
        return sorted(self._terms, key=monomial_key)

    def coefficient(self, exponents):
        return self._terms.get(tuple(exponents), 0.0)

    def is_zero(self):
        return not self._terms

    def degree(self):
        if not self._terms:
            return 0
        return max(sum(m) for m in self._terms)

    def min_degree(self):
        if not self._terms:
            return 0
        return min(sum(m) for m in self._terms)

    def degree_in(self, var):
        if not self._terms:
            return 0
        return max(m[var] for m in self._terms)

    def max_abs_coefficient(self):
        if not self._terms:
            return 0.0
        return max(abs(c) for c in self._terms.values())

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise DimensionError('Variable count mismatch: {} vs {}'.format(
                    self.nvars, other.nvars))
            return other
        if _is_scalar(other):
            return Polynomial.constant(other, self.nvars)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for m, c in other._terms.items():
            terms[m] = terms.get(m, 0.0) + c
        return Polynomial(terms, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = add_exponents(m1, m2)
                terms[m] = terms.get(m, 0.0) + c1 * c2
        return Polynomial(terms, self.nvars)

    __rmul__ = __mul__

    def __pow__(self, power):
        if not isinstance(power, numbers.Integral) or power < 0:
            raise ValueError('Only nonnegative integer powers are supported')
        result = Polynomial.constant(1.0, self.nvars)
        for _ in range(power):
            result = result * self
        return result

    def scale(self, factor):
        factor = float(factor)
        return Polynomial({m: c * factor for m, c in self._terms.items()}, self.nvars)

    def evaluate(self, points):
        """Evaluate at one point (shape (nvars,)) or many points (shape (K, nvars))

        Returns:
            float or ndarray of shape (K,)
        """
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[1] != self.nvars:
            raise DimensionError('Point has {} entries, polynomial has {} variables'.format(
                pts.shape[1], self.nvars))
        if not self._terms:
            values = np.zeros(pts.shape[0])
        else:
            exps = np.array(list(self._terms.keys()), dtype=float)
            coeffs = np.array(list(self._terms.values()))
            powers = np.prod(pts[:, None, :] ** exps[None, :, :], axis=2)
            values = powers @ coeffs
        return float(values[0]) if single else values

    __call__ = evaluate

    def diff(self, var):
        terms = {}
        for m, c in self._terms.items():
            if m[var] == 0:
                continue
            new = list(m)
            new[var] -= 1
            terms[tuple(new)] = terms.get(tuple(new), 0.0) + c * m[var]
        return Polynomial(terms, self.nvars)

    def subs_zero(self, var_indices):
        """Set the given indeterminates to zero"""
        var_indices = list(var_indices)
        return Polynomial(
            {m: c for m, c in self._terms.items() if all(m[v] == 0 for v in var_indices)},
            self.nvars)

    def embed(self, nvars):
        """Append trailing indeterminates that the polynomial does not depend on"""
        if nvars < self.nvars:
            raise DimensionError('Cannot embed into fewer variables')
        pad = (0,) * (nvars - self.nvars)
        return Polynomial({m + pad: c for m, c in self._terms.items()}, nvars)

    def restrict(self, nvars):
        """Drop trailing indeterminates; they must not appear in any term"""
        for m in self._terms:
            if any(m[nvars:]):
                raise DimensionError('Term {} depends on a dropped variable'.format(m))
        return Polynomial({m[:nvars]: c for m, c in self._terms.items()}, nvars)

    def chop(self, tol):
        return Polynomial({m: c for m, c in self._terms.items() if abs(c) > tol}, self.nvars)

    def max_abs_difference(self, other):
        other = self._coerce(other)
        keys = set(self._terms) | set(other._terms)
        if not keys:
            return 0.0
        return max(abs(self.coefficient(m) - other.coefficient(m)) for m in keys)

    def __str__(self):
        if not self._terms:
            return '0'
        parts = []
        for m, c in self.items():
            mono = monomial_str(m)
            if mono == '1':
                parts.append('{:.4g}'.format(c))
            else:
                parts.append('{:.4g}*{}'.format(c, mono))
        return ' + '.join(parts).replace('+ -', '- ')

    def to_json(self):
        return [{'exponents': list(m), 'coeff': c} for m, c in self.items()]

    @classmethod
    def from_json(cls, data, nvars=None):
        terms = {}
        for term in data:
            exps = tuple(term['exponents'])
            terms[exps] = terms.get(exps, 0.0) + float(term['coeff'])
        return cls(terms, nvars)


class PolyMatrix(object):
    """Dense grid of polynomials sharing the same indeterminates"""

    __array_ufunc__ = None

    def __repr__(self):
        return '<PolyMatrix - {}x{}>'.format(self.rows, self.cols)

    def __init__(self, entries, nvars=None):
        """Instantiate a new PolyMatrix

        Args:
            entries (list[list]): rows of Polynomial or numbers
            nvars (int): number of indeterminates, inferred if any entry is a Polynomial
        """
        if nvars is None:
            for row in entries:
                for entry in row:
                    if isinstance(entry, Polynomial):
                        nvars = entry.nvars
                        break
                if nvars is not None:
                    break
        if nvars is None:
            raise DimensionError('nvars is required for a numeric PolyMatrix')
        self.nvars = nvars
        self._entries = []
        width = None
        for row in entries:
            converted = []
            for entry in row:
                if isinstance(entry, Polynomial):
                    if entry.nvars != nvars:
                        raise DimensionError('Entry variable count mismatch')
                    converted.append(entry)
                else:
                    converted.append(Polynomial.constant(entry, nvars))
            if width is None:
                width = len(converted)
            elif width != len(converted):
                raise DimensionError('Ragged PolyMatrix rows')
            self._entries.append(converted)
        self.rows = len(self._entries)
        self.cols = width or 0

    @classmethod
    def from_array(cls, array, nvars):
        arr = np.atleast_2d(np.asarray(array, dtype=float))
        return cls([[float(v) for v in row] for row in arr], nvars)

    @classmethod
    def column(cls, polys):
        return cls([[p] for p in polys])

    @classmethod
    def identity(cls, size, nvars):
        return cls.from_array(np.eye(size), nvars)

    @classmethod
    def zeros(cls, rows, cols, nvars):
        return cls.from_array(np.zeros((rows, cols)), nvars)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __getitem__(self, index):
        i, j = index
        return self._entries[i][j]

    def entries(self):
        return [list(row) for row in self._entries]

    def column_vector(self):
        if self.cols != 1:
            raise DimensionError('Not a column vector')
        return [row[0] for row in self._entries]

    @property
    def T(self):
        return self.transpose()

    def transpose(self):
        return PolyMatrix([[self._entries[i][j] for i in range(self.rows)]
                           for j in range(self.cols)], self.nvars)

    def map(self, fn):
        return PolyMatrix([[fn(e) for e in row] for row in self._entries], self.nvars)

    def _check_same_shape(self, other):
        if other.shape != self.shape:
            raise DimensionError('Shape mismatch {} vs {}'.format(self.shape, other.shape))

    def __add__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        self._check_same_shape(other)
        return PolyMatrix([[a + b for a, b in zip(r1, r2)]
                           for r1, r2 in zip(self._entries, other._entries)], self.nvars)

    def __sub__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        self._check_same_shape(other)
        return PolyMatrix([[a - b for a, b in zip(r1, r2)]
                           for r1, r2 in zip(self._entries, other._entries)], self.nvars)

    def __neg__(self):
        return self.map(lambda p: -p)

    def __mul__(self, factor):
        if isinstance(factor, Polynomial) or _is_scalar(factor):
            return self.map(lambda p: p * factor)
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, np.ndarray):
            other = PolyMatrix.from_array(other, self.nvars)
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise DimensionError('Cannot multiply {} by {}'.format(self.shape, other.shape))
        result = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = Polynomial.zero(self.nvars)
                for k in range(self.cols):
                    if self._entries[i][k].is_zero() or other._entries[k][j].is_zero():
                        continue
                    acc = acc + self._entries[i][k] * other._entries[k][j]
                row.append(acc)
            result.append(row)
        return PolyMatrix(result, self.nvars)

    def __rmatmul__(self, other):
        if isinstance(other, np.ndarray):
            return PolyMatrix.from_array(other, self.nvars) @ self
        return NotImplemented

    def evaluate(self, point):
        """Evaluate every entry at one point, returning an ndarray of shape (rows, cols)"""
        return np.array([[e.evaluate(point) for e in row] for row in self._entries])

    def evaluate_many(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros((pts.shape[0], self.rows, self.cols))
        for i, row in enumerate(self._entries):
            for j, e in enumerate(row):
                if not e.is_zero():
                    out[:, i, j] = e.evaluate(pts)
        return out

    def is_symmetric(self, tol=0.0):
        if self.rows != self.cols:
            return False
        for i in range(self.rows):
            for j in range(i + 1, self.cols):
                if self._entries[i][j].max_abs_difference(self._entries[j][i]) > tol:
                    return False
        return True

    def degree(self):
        return max([e.degree() for row in self._entries for e in row] or [0])

    def max_abs_coefficient(self):
        return max([e.max_abs_coefficient() for row in self._entries for e in row] or [0.0])

    def max_abs_difference(self, other):
        self._check_same_shape(other)
        return max([a.max_abs_difference(b) for r1, r2 in zip(self._entries, other._entries)
                    for a, b in zip(r1, r2)] or [0.0])

    def subs_zero(self, var_indices):
        return self.map(lambda p: p.subs_zero(var_indices))

    def embed(self, nvars):
        return PolyMatrix([[e.embed(nvars) for e in row] for row in self._entries], nvars)

    def restrict(self, nvars):
        return PolyMatrix([[e.restrict(nvars) for e in row] for row in self._entries], nvars)

    def to_json(self):
        return [[e.to_json() for e in row] for row in self._entries]

    @classmethod
    def from_json(cls, data, nvars):
        return cls([[Polynomial.from_json(e, nvars) for e in row] for row in data], nvars)


class PolyEvaluator(object):
    """Fast repeated evaluation of a fixed vector of polynomials"""

    def __repr__(self):
        return '<PolyEvaluator - {} polynomials>'.format(self.coeffs.shape[0])

    def __init__(self, polys, nvars=None):
        polys = list(polys)
        if nvars is None:
            nvars = polys[0].nvars
        monos = sorted({m for p in polys for m in p.terms})
        self.nvars = nvars
        self.exps = np.array(monos, dtype=float).reshape(len(monos), nvars)
        index = {m: k for k, m in enumerate(monos)}
        self.coeffs = np.zeros((len(polys), len(monos)))
        for row, p in enumerate(polys):
            for m, c in p.terms.items():
                self.coeffs[row, index[m]] = c

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[1] != self.nvars:
            raise DimensionError('Point has {} entries, expected {}'.format(
                pts.shape[1], self.nvars))
        powers = np.prod(pts[:, None, :] ** self.exps[None, :, :], axis=2)
        values = powers @ self.coeffs.T
        return values[0] if single else values
