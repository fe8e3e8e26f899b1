"""Polynomial operations shared by the synthesis programs"""
from math import comb

import numpy as np

from .exceptions import DimensionError
from .models.polynomial import PolyEvaluator, Polynomial, PolyMatrix  # NOQA

ARITH_OPS = ('add', 'sub', 'mul', 'scale')


def poly_arith(a, b, op):
    """Combine two polynomials

    Args:
        a (Polynomial): left operand
        b (Polynomial or float): right operand, a number for ``scale``
        op (str): one of add, sub, mul, scale

    Returns:
        Polynomial
    """
    if op == 'scale':
        return a.scale(b)
    if a.nvars != b.nvars:
        raise DimensionError('Variable count mismatch: {} vs {}'.format(a.nvars, b.nvars))
    if op == 'add':
        return a + b
    if op == 'sub':
        return a - b
    if op == 'mul':
        return a * b
    raise ValueError('Unknown operation {}; expected one of {}'.format(op, ARITH_OPS))


def poly_eval(p, point):
    point = np.asarray(point, dtype=float)
    if point.shape != (p.nvars,):
        raise DimensionError('Point of shape {} for a polynomial in {} variables'.format(
            point.shape, p.nvars))
    return p.evaluate(point)


def jacobian(v, nvars=None, var_indices=None):
    """Matrix of partial derivatives d v_i / d x_j

    Args:
        v (list[Polynomial]): vector of polynomials
        nvars (int): number of indeterminates, needed only when v is empty
        var_indices (list[int]): differentiate only in these indeterminates

    Returns:
        PolyMatrix of shape (len(v), len(var_indices))
    """
    if nvars is None:
        nvars = v[0].nvars
    if var_indices is None:
        var_indices = range(nvars)
    return PolyMatrix([[p.diff(j) for j in var_indices] for p in v], nvars)


def gradient(p, var_indices=None):
    if var_indices is None:
        var_indices = range(p.nvars)
    return [p.diff(j) for j in var_indices]


def quadratic_form(zhat, matrix):
    """z^T M z for a vector of polynomials z and a constant symmetric matrix M"""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (len(zhat), len(zhat)):
        raise DimensionError('Matrix of shape {} for a vector of length {}'.format(
            matrix.shape, len(zhat)))
    nvars = zhat[0].nvars
    result = Polynomial.zero(nvars)
    for i, zi in enumerate(zhat):
        for j, zj in enumerate(zhat):
            if matrix[i, j] != 0.0:
                result = result + (zi * zj).scale(matrix[i, j])
    return result


def gradient_of_quadratic_form(zhat, pinv, var_indices=None):
    """Gradient of V = z^T P^-1 z, i.e. 2 (dz/dx)^T P^-1 z

    Args:
        zhat (list[Polynomial]): the vector z
        pinv (ndarray): symmetric matrix P^-1
        var_indices (list[int]): state indeterminates, all of them by default

    Returns:
        list[Polynomial]
    """
    pinv = np.asarray(pinv, dtype=float)
    if pinv.shape != (len(zhat), len(zhat)):
        raise DimensionError('Matrix of shape {} for a vector of length {}'.format(
            pinv.shape, len(zhat)))
    if not np.allclose(pinv, pinv.T, atol=1e-12 * (1 + np.abs(pinv).max())):
        raise DimensionError('P^-1 must be symmetric')
    jac = jacobian(zhat, var_indices=var_indices)
    weighted = pinv @ PolyMatrix.column(zhat)
    return (jac.T @ weighted * 2.0).column_vector()


def count_coefficients(nvars, max_degree, min_degree=0):
    """Number of monomials in nvars variables with total degree in [min_degree, max_degree]"""
    if max_degree < min_degree:
        return 0
    below = comb(nvars + min_degree - 1, min_degree - 1) if min_degree > 0 else 0
    return comb(nvars + max_degree, max_degree) - below


def norm_power_sum(nvars, var_indices, coeffs, start=1):
    """sum_k coeffs[k] |v|^{2(k + start)} as a polynomial"""
    base = Polynomial.norm_squared(nvars, var_indices)
    result = Polynomial.zero(nvars)
    power = base ** start
    for c in coeffs:
        if c != 0.0:
            result = result + power.scale(c)
        power = power * base
    return result
