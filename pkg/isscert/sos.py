"""Compile SOS constraints into SdpProblem fragments and verify Gram certificates

A polynomial matrix S(x) is an SOS matrix when y^T S(x) y is SOS in (x, y).
The Gram basis of that scalar polynomial is kept in row-tagged form: element
``(i, m)`` is ``y_i x^m``, so only monomials of degree exactly one in y occur.
"""
import logging

from . import settings
from .exceptions import CompilationError
from .models.certificate import SosCertificate, SosReport
from .models.expression import LinearPoly, LinearPolyMatrix
from .models.polynomial import Polynomial, PolyMatrix, add_exponents, monomials, monomial_str

logger = logging.getLogger(__name__)

STRUCTURES = ('full', 'even_only')


class SosConstraint(object):
    """An SOS constraint compiled into a problem"""

    def __repr__(self):
        return '<SosConstraint - {} ({} rows, basis {})>'.format(
            self.label, self.rows, len(self.basis))

    def __init__(self, label, target, basis, block, nvars):
        self.label = label
        self.target = target
        self.basis = basis
        self.block = block
        self.nvars = nvars

    @property
    def rows(self):
        return self.target.rows

    @property
    def is_matrix(self):
        return self.target.rows > 1


def gram_basis_for(target_degree, variables, structure='full', min_degree=None):
    """Monomials of degree at most target_degree / 2

    Args:
        target_degree (int): even degree of the target polynomial
        variables (int): number of indeterminates
        structure (str): ``full`` or ``even_only``; the latter drops monomials
            below half the smallest target degree (default 2), for targets
            whose terms all have positive even degree
        min_degree (int): smallest degree present in the target

    Returns:
        list[tuple]
    """
    if structure not in STRUCTURES:
        raise ValueError('Unknown basis structure {}'.format(structure))
    if target_degree % 2:
        raise CompilationError(
            'Odd target degree {} cannot be SOS'.format(target_degree))
    low = 0
    if structure == 'even_only':
        low = ((2 if min_degree is None else min_degree) + 1) // 2
    return monomials(variables, target_degree // 2, min_degree=low)


def _as_matrix(target, nvars=None):
    if isinstance(target, LinearPolyMatrix):
        return target
    if isinstance(target, PolyMatrix):
        return LinearPolyMatrix.coerce(target, target.nvars)
    if isinstance(target, Polynomial):
        return LinearPolyMatrix([[LinearPoly.from_polynomial(target)]], target.nvars)
    if isinstance(target, LinearPoly):
        return LinearPolyMatrix([[target]], target.nvars)
    raise TypeError('Cannot compile {!r} as an SOS target'.format(target))


def row_basis(diagonal, nvars):
    """Half-degree monomials for one diagonal entry

    Degrees lie in [ceil(mindeg / 2), floor(deg / 2)] with each variable
    capped at half its degree in the diagonal entry. A structurally zero
    diagonal gets the constant monomial alone.
    """
    if diagonal.is_zero():
        return [(0,) * nvars]
    low = (diagonal.min_degree() + 1) // 2
    high = diagonal.degree() // 2
    caps = [diagonal.degree_in(v) // 2 for v in range(nvars)]
    basis = monomials(nvars, high, min_degree=low, max_per_var=caps)
    return basis or [(0,) * nvars]


def matrix_basis(S):
    basis = []
    for i in range(S.rows):
        basis.extend((i, m) for m in row_basis(S[i, i], S.nvars))
    return basis


def compile_matrix_sos(problem, target, label=None, basis=None):
    """Add a Gram block and coefficient-matching equalities for an SOS matrix

    Only the upper triangle of the target is read; callers pass symmetric
    matrices.

    Args:
        problem (SdpProblem): problem receiving the fragment
        target (LinearPolyMatrix, PolyMatrix, LinearPoly or Polynomial): S(x)
        label (str): name used in logs, errors and reports
        basis (list): optional row-tagged basis [(row, monomial)]

    Returns:
        SosConstraint
    """
    S = _as_matrix(target)
    if S.rows != S.cols:
        raise CompilationError('{}: SOS target must be square, got {}'.format(label, S.shape))
    label = label or 'sos_{}'.format(len(problem.blocks))
    if basis is None:
        basis = matrix_basis(S)
    basis = sorted(basis, key=lambda item: item[0])
    block = problem.add_block(len(basis), prefix='gram')

    reach = {}
    for p, (rp, mp) in enumerate(basis):
        for q in range(p, len(basis)):
            rq, mq = basis[q]
            weight = 2.0 if (p != q and rp == rq) else 1.0
            key = (rp, rq, add_exponents(mp, mq))
            expr = reach.setdefault(key, {})
            gram_key = problem.entry(block, p, q)
            expr[gram_key] = expr.get(gram_key, 0.0) + weight

    targets = {}
    for i in range(S.rows):
        for j in range(i, S.cols):
            for m, expr in S[i, j].items():
                targets[(i, j, m)] = expr

    forced = 0
    for key in sorted(set(reach) | set(targets), key=lambda k: (k[0], k[1], sum(k[2]), k[2])):
        expr = dict(targets.get(key, {}))
        if key not in reach:
            unknown = any(k is not None for k in expr)
            if unknown:
                forced += 1
                problem.add_affine_equality(expr, '{}{}'.format(label, key))
            elif abs(expr.get(None, 0.0)) > settings.COMPILE_ZERO_TOL:
                raise CompilationError(
                    '{}: basis cannot express monomial {} in entry ({}, {})'.format(
                        label, monomial_str(key[2]), key[0], key[1]))
            continue
        for gram_key, weight in reach[key].items():
            expr[gram_key] = expr.get(gram_key, 0.0) - weight
        problem.add_affine_equality(expr, '{}{}'.format(label, key))
    logger.debug('%s: %dx%d target, gram %d, %d unreachable coefficients forced to zero',
                 label, S.rows, S.cols, len(basis), forced)
    return SosConstraint(label, S, basis, block, S.nvars)


def compile_scalar_sos(problem, target, label=None, basis=None):
    """Scalar case of compile_matrix_sos; basis may be plain monomials"""
    S = _as_matrix(target)
    if S.shape != (1, 1):
        raise CompilationError('{}: scalar SOS target expected'.format(label))
    if basis is not None:
        basis = [b if isinstance(b[-1], tuple) else (0, tuple(b)) for b in basis]
    return compile_matrix_sos(problem, S, label, basis)


def extract_certificate(constraint, solution):
    gram = solution.block_values[constraint.block]
    return SosCertificate(gram, constraint.basis, constraint.nvars, constraint.rows,
                          constraint.label)


def instantiate_target(constraint, solution, chop=0.0):
    return constraint.target.instantiate(solution, chop)


def verify_certificate(target_instance, cert, label=None):
    """Re-expand a Gram certificate against a numeric target

    PASS iff the max coefficient mismatch is at most
    1e-6 * (1 + largest target coefficient) and the normalized Gram minimum
    eigenvalue is at least -1e-7.

    Returns:
        SosReport
    """
    if isinstance(target_instance, Polynomial):
        target_instance = PolyMatrix([[target_instance]], target_instance.nvars)
    expanded = cert.expand()
    if expanded.shape != target_instance.shape:
        residual = float('inf')
    else:
        # only the upper triangle is compiled
        sym = PolyMatrix([[expanded[i, j] + expanded[j, i] if i != j else expanded[i, i]
                           for j in range(expanded.cols)] for i in range(expanded.rows)],
                         expanded.nvars)
        residual = 0.0
        for i in range(target_instance.rows):
            for j in range(i, target_instance.cols):
                want = target_instance[i, j]
                have = sym[i, j] if i == j else sym[i, j].scale(0.5)
                residual = max(residual, have.max_abs_difference(want))
    tolerance = settings.SOS_RESIDUAL_TOL * (1.0 + target_instance.max_abs_coefficient())
    return SosReport(label or cert.label, residual, tolerance, cert.min_eigenvalue())
