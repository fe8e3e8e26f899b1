"""Polynomials whose coefficients are affine in SDP decision variables

A coefficient is a dict mapping a variable key to its weight, the key ``None``
holding the constant part. Variable keys are scalar names (str) or PSD block
entries ``(block, i, j)`` with ``i <= j``.
"""
import numbers

import numpy as np

from ..exceptions import BilinearError, DimensionError
from .polynomial import Polynomial, PolyMatrix, add_exponents, monomial_key

CONST = None


def affine_add(target, other, scale=1.0):
    """Accumulate ``scale * other`` into ``target`` in place"""
    for key, value in other.items():
        new = target.get(key, 0.0) + scale * value
        if new == 0.0:
            target.pop(key, None)
        else:
            target[key] = new
    return target


def affine_scale(expr, factor):
    if factor == 0.0:
        return {}
    return {k: v * factor for k, v in expr.items()}


def affine_value(expr, values):
    total = expr.get(CONST, 0.0)
    for key, weight in expr.items():
        if key is CONST:
            continue
        total += weight * lookup(values, key)
    return total


def lookup(values, key):
    if hasattr(values, 'value'):
        return values.value(key)
    return values[key]


def _is_scalar(value):
    return isinstance(value, numbers.Number) and not isinstance(value, bool)


class LinearPoly(object):
    """Polynomial in the indeterminates whose coefficients are affine expressions"""

    __array_ufunc__ = None

    def __repr__(self):
        return '<LinearPoly - {} terms, {} unknowns>'.format(
            len(self._terms), len(self.unknowns()))

    def __init__(self, terms, nvars):
        """Instantiate a new LinearPoly

        Args:
            terms (dict): map from exponent tuple to affine dict
            nvars (int): number of indeterminates
        """
        self.nvars = nvars
        self._terms = {}
        for exps, expr in terms.items():
            if len(exps) != nvars:
                raise DimensionError('Monomial {} does not have {} exponents'.format(
                    exps, nvars))
            expr = {k: float(v) for k, v in expr.items() if v != 0.0}
            if expr:
                self._terms[tuple(exps)] = expr

    @classmethod
    def zero(cls, nvars):
        return cls({}, nvars)

    @classmethod
    def constant(cls, value, nvars):
        return cls({(0,) * nvars: {CONST: value}}, nvars)

    @classmethod
    def from_polynomial(cls, poly):
        return cls({m: {CONST: c} for m, c in poly.terms.items()}, poly.nvars)

    @classmethod
    def from_variables(cls, names, nvars):
        """Build sum of name_m * x^m from a map of monomial to variable name"""
        return cls({m: {name: 1.0} for m, name in names.items()}, nvars)

    @classmethod
    def coerce(cls, value, nvars):
        if isinstance(value, LinearPoly):
            return value
        if isinstance(value, Polynomial):
            return cls.from_polynomial(value)
        if _is_scalar(value):
            return cls.constant(value, nvars)
        raise TypeError('Cannot use {!r} as a LinearPoly'.format(value))

    def items(self):
        return [(m, dict(self._terms[m])) for m in sorted(self._terms, key=monomial_key)]

    def monomials(self):
        return sorted(self._terms, key=monomial_key)

    def coefficient(self, exps):
        return dict(self._terms.get(tuple(exps), {}))

    def unknowns(self):
        keys = set()
        for expr in self._terms.values():
            keys.update(k for k in expr if k is not CONST)
        return keys

    def is_constant(self):
        return all(set(expr) <= {CONST} for expr in self._terms.values())

    def is_zero(self):
        return not self._terms

    def degree(self):
        return max([sum(m) for m in self._terms] or [0])

    def min_degree(self):
        return min([sum(m) for m in self._terms] or [0])

    def degree_in(self, var):
        return max([m[var] for m in self._terms] or [0])

    def _coerce(self, other):
        if isinstance(other, (LinearPoly, Polynomial)) or _is_scalar(other):
            other = LinearPoly.coerce(other, self.nvars)
            if other.nvars != self.nvars:
                raise DimensionError('Variable count mismatch: {} vs {}'.format(
                    self.nvars, other.nvars))
            return other
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = {m: dict(e) for m, e in self._terms.items()}
        for m, expr in other._terms.items():
            affine_add(terms.setdefault(m, {}), expr)
        return LinearPoly(terms, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + other.scale(-1.0)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def scale(self, factor):
        factor = float(factor)
        return LinearPoly({m: affine_scale(e, factor) for m, e in self._terms.items()},
                          self.nvars)

    def _mul_numeric(self, poly):
        terms = poly.terms
        zero = (0,) * self.nvars
        if len(terms) == 1 and zero in terms:
            return self.scale(terms[zero])
        out = {}
        for m1, expr in self._terms.items():
            for m2, c in terms.items():
                affine_add(out.setdefault(add_exponents(m1, m2), {}), expr, c)
        return LinearPoly(out, self.nvars)

    def __mul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise DimensionError('Variable count mismatch')
            return self._mul_numeric(other)
        if isinstance(other, LinearPoly):
            if other.is_constant():
                return self._mul_numeric(other.to_polynomial())
            if self.is_constant():
                return other._mul_numeric(self.to_polynomial())
            raise BilinearError('Product of two expressions that both carry unknowns')
        return NotImplemented

    __rmul__ = __mul__

    def diff(self, var):
        out = {}
        for m, expr in self._terms.items():
            if m[var] == 0:
                continue
            new = list(m)
            new[var] -= 1
            affine_add(out.setdefault(tuple(new), {}), expr, m[var])
        return LinearPoly(out, self.nvars)

    def subs_zero(self, var_indices):
        var_indices = list(var_indices)
        return LinearPoly({m: e for m, e in self._terms.items()
                           if all(m[v] == 0 for v in var_indices)}, self.nvars)

    def embed(self, nvars):
        pad = (0,) * (nvars - self.nvars)
        return LinearPoly({m + pad: e for m, e in self._terms.items()}, nvars)

    def to_polynomial(self):
        if not self.is_constant():
            raise BilinearError('Expression still depends on unknowns')
        return Polynomial({m: e.get(CONST, 0.0) for m, e in self._terms.items()}, self.nvars)

    def instantiate(self, values, chop=0.0):
        """Substitute numeric values for every unknown

        Args:
            values: SdpSolution or dict from variable key to float
            chop (float): drop resulting coefficients with magnitude <= chop

        Returns:
            Polynomial
        """
        terms = {}
        for m, expr in self._terms.items():
            c = affine_value(expr, values)
            if abs(c) > chop:
                terms[m] = c
        return Polynomial(terms, self.nvars)


class LinearPolyMatrix(object):
    """Dense grid of LinearPoly entries"""

    __array_ufunc__ = None

    def __repr__(self):
        return '<LinearPolyMatrix - {}x{}>'.format(self.rows, self.cols)

    def __init__(self, entries, nvars):
        self.nvars = nvars
        self._entries = [[LinearPoly.coerce(e, nvars) for e in row] for row in entries]
        self.rows = len(self._entries)
        self.cols = len(self._entries[0]) if self._entries else 0
        if any(len(row) != self.cols for row in self._entries):
            raise DimensionError('Ragged LinearPolyMatrix rows')

    @classmethod
    def coerce(cls, value, nvars):
        if isinstance(value, LinearPolyMatrix):
            return value
        if isinstance(value, PolyMatrix):
            return cls(value.entries(), value.nvars)
        if isinstance(value, np.ndarray):
            return cls.from_array(value, nvars)
        raise TypeError('Cannot use {!r} as a LinearPolyMatrix'.format(value))

    @classmethod
    def from_array(cls, array, nvars):
        arr = np.atleast_2d(np.asarray(array, dtype=float))
        return cls([[LinearPoly.constant(v, nvars) if v != 0.0 else LinearPoly.zero(nvars)
                     for v in row] for row in arr], nvars)

    @classmethod
    def zeros(cls, rows, cols, nvars):
        return cls([[LinearPoly.zero(nvars) for _ in range(cols)] for _ in range(rows)], nvars)

    @classmethod
    def column(cls, entries, nvars):
        return cls([[e] for e in entries], nvars)

    @classmethod
    def block(cls, grid, nvars):
        """Assemble a block matrix; ``None`` stands for a zero block"""
        heights = []
        for row in grid:
            sizes = [b.rows for b in row if b is not None]
            if not sizes:
                raise DimensionError('Block row without a sized block')
            heights.append(sizes[0])
        widths = []
        for j in range(len(grid[0])):
            sizes = [row[j].cols for row in grid if row[j] is not None]
            if not sizes:
                raise DimensionError('Block column without a sized block')
            widths.append(sizes[0])
        entries = []
        for bi, row in enumerate(grid):
            for i in range(heights[bi]):
                line = []
                for bj, blk in enumerate(row):
                    if blk is None:
                        line.extend(LinearPoly.zero(nvars) for _ in range(widths[bj]))
                        continue
                    if blk.shape != (heights[bi], widths[bj]):
                        raise DimensionError('Block ({}, {}) has shape {}'.format(
                            bi, bj, blk.shape))
                    line.extend(blk._entries[i])
                entries.append(line)
        return cls(entries, nvars)

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
        return LinearPolyMatrix([[self._entries[i][j] for i in range(self.rows)]
                                 for j in range(self.cols)], self.nvars)

    def map(self, fn):
        return LinearPolyMatrix([[fn(e) for e in row] for row in self._entries], self.nvars)

    def _other(self, other):
        other = LinearPolyMatrix.coerce(other, self.nvars)
        if other.shape != self.shape:
            raise DimensionError('Shape mismatch {} vs {}'.format(self.shape, other.shape))
        return other

    def __add__(self, other):
        other = self._other(other)
        return LinearPolyMatrix([[a + b for a, b in zip(r1, r2)]
                                 for r1, r2 in zip(self._entries, other._entries)], self.nvars)

    def __sub__(self, other):
        other = self._other(other)
        return LinearPolyMatrix([[a - b for a, b in zip(r1, r2)]
                                 for r1, r2 in zip(self._entries, other._entries)], self.nvars)

    def __radd__(self, other):
        return self._other(other) + self

    def __rsub__(self, other):
        return self._other(other) - self

    def __neg__(self):
        return self.map(lambda e: -e)

    def __mul__(self, factor):
        if isinstance(factor, (LinearPoly, Polynomial)) or _is_scalar(factor):
            return self.map(lambda e: e * factor)
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        other = LinearPolyMatrix.coerce(other, self.nvars)
        if self.cols != other.rows:
            raise DimensionError('Cannot multiply {} by {}'.format(self.shape, other.shape))
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = LinearPoly.zero(self.nvars)
                for k in range(self.cols):
                    a = self._entries[i][k]
                    b = other._entries[k][j]
                    if a.is_zero() or b.is_zero():
                        continue
                    acc = acc + a * b
                row.append(acc)
            out.append(row)
        return LinearPolyMatrix(out, self.nvars)

    def __rmatmul__(self, other):
        return LinearPolyMatrix.coerce(other, self.nvars) @ self

    def sym_part(self):
        """Return X + X^T"""
        return self + self.transpose()

    def unknowns(self):
        keys = set()
        for row in self._entries:
            for e in row:
                keys.update(e.unknowns())
        return keys

    def is_constant(self):
        return all(e.is_constant() for row in self._entries for e in row)

    def subs_zero(self, var_indices):
        return self.map(lambda e: e.subs_zero(var_indices))

    def to_polymatrix(self):
        return PolyMatrix([[e.to_polynomial() for e in row] for row in self._entries],
                          self.nvars)

    def instantiate(self, values, chop=0.0):
        return PolyMatrix([[e.instantiate(values, chop) for e in row] for row in self._entries],
                          self.nvars)
