"""Polynomial decision variables and SOS constraints on top of SdpProblem"""
import logging

import numpy as np

from .. import settings
from ..exceptions import CertificateRejectedException, InfeasibleException, SolverException
from ..models.expression import CONST, LinearPoly, LinearPolyMatrix
from ..models.polynomial import Polynomial, monomial_str, monomials
from ..sdp import INFEASIBLE, SdpProblem, solve
from ..sos import compile_matrix_sos, extract_certificate, verify_certificate

logger = logging.getLogger(__name__)


def constant_entry(expr, nvars):
    """LinearPoly equal to the affine expression expr for every x"""
    return LinearPoly({(0,) * nvars: expr}, nvars)


class ProgramBuilder(object):
    """One synthesis program under construction

    Keeps the compiled SOS constraints together with the range of equality
    rows each one added, so that the program can be re-solved without a
    constraint when diagnosing infeasibility.
    """

    def __repr__(self):
        return '<ProgramBuilder - {} ({} SOS constraints)>'.format(
            self.problem.name, len(self.constraints))

    def __init__(self, name, nvars, config):
        self.problem = SdpProblem(name)
        self.nvars = nvars
        self.config = config
        self.constraints = []
        self._rows = {}

    @property
    def name(self):
        return self.problem.name

    def poly_variable(self, name, max_degree, min_degree=0, var_indices=None):
        """Polynomial with one free scalar per monomial"""
        names = {}
        for m in monomials(self.nvars, max_degree, min_degree, var_indices):
            names[m] = self.problem.add_scalar('{}[{}]'.format(name, monomial_str(m)))
        return LinearPoly.from_variables(names, self.nvars)

    def poly_matrix_variable(self, name, rows, cols, max_degree, min_degree=0,
                             var_indices=None, symmetric=False):
        entries = [[None] * cols for _ in range(rows)]
        for i in range(rows):
            for j in range(cols):
                if symmetric and j < i:
                    entries[i][j] = entries[j][i]
                    continue
                entries[i][j] = self.poly_variable('{}_{}{}'.format(name, i, j), max_degree,
                                                   min_degree, var_indices)
        return LinearPolyMatrix(entries, self.nvars)

    def psd_matrix(self, name, dim, margin=0.0):
        """Constant symmetric matrix X with X - margin I PSD

        Returns:
            (block name, LinearPolyMatrix)
        """
        block = self.problem.add_block(dim, name=name)
        entries = []
        for i in range(dim):
            row = []
            for j in range(dim):
                expr = {self.problem.entry(block, i, j): 1.0}
                if i == j and margin:
                    expr[CONST] = margin
                row.append(constant_entry(expr, self.nvars))
            entries.append(row)
        return block, LinearPolyMatrix(entries, self.nvars)

    def class_k(self, name, terms, var_indices, mu):
        """alpha(|v|) = sum_k c_k |v|^2k with c_k >= 0 and sum c_k >= mu

        Returns:
            (list of coefficient keys, LinearPoly)
        """
        keys = [self.problem.add_scalar('{}_c{}'.format(name, k + 1), lower=0.0)
                for k in range(terms)]
        total = {key: 1.0 for key in keys}
        total[CONST] = -mu
        self.problem.add_affine_inequality(total, '{}_sum'.format(name))
        base = Polynomial.norm_squared(self.nvars, var_indices)
        power = base
        result = LinearPoly.zero(self.nvars)
        for key in keys:
            result = result + LinearPoly({m: {key: c} for m, c in power.terms.items()},
                                         self.nvars)
            power = power * base
        return keys, result

    def matrix_class_k(self, name, size, terms, var_indices, eps, structure='matrix'):
        """Gamma(|v|) = sum_{k=0}^{terms} C_k |v|^2k with C_k PSD and sum C_k - eps I PSD

        Returns:
            (list of C_k as LinearPolyMatrix constants, LinearPolyMatrix Gamma(|v|))
        """
        coefficient_matrices = []
        for k in range(terms + 1):
            if structure == 'scalar':
                key = self.problem.add_scalar('{}_c{}'.format(name, k), lower=0.0)
                entries = [[constant_entry({key: 1.0}, self.nvars) if i == j
                            else LinearPoly.zero(self.nvars) for j in range(size)]
                           for i in range(size)]
                coefficient_matrices.append(LinearPolyMatrix(entries, self.nvars))
            else:
                _, mat = self.psd_matrix('{}_C{}'.format(name, k), size)
                coefficient_matrices.append(mat)
        total = coefficient_matrices[0]
        for mat in coefficient_matrices[1:]:
            total = total + mat
        self.add_psd(total - np.eye(size) * eps, '{}_sum'.format(name))
        base = Polynomial.norm_squared(self.nvars, var_indices)
        power = Polynomial.constant(1.0, self.nvars)
        gamma = LinearPolyMatrix.zeros(size, size, self.nvars)
        for mat in coefficient_matrices:
            gamma = gamma + mat * power
            power = power * base
        return coefficient_matrices, gamma

    def add_psd(self, matrix, label):
        """Constrain a constant (x-independent) LinearPolyMatrix to be PSD"""
        zero = (0,) * self.nvars
        rows = []
        for i in range(matrix.rows):
            row = []
            for j in range(matrix.cols):
                entry = matrix[i, j]
                if any(m != zero for m in entry.monomials()):
                    raise ValueError('{}: entry ({}, {}) depends on x'.format(label, i, j))
                row.append(entry.coefficient(zero))
            rows.append(row)
        return self.problem.add_psd(rows, label=label)

    def add_inequality(self, expr, label):
        return self.problem.add_affine_inequality(expr, label)

    def add_sos(self, target, label, basis=None):
        """Compile an SOS (matrix) constraint and remember its equality rows"""
        start = len(self.problem.equalities)
        constraint = compile_matrix_sos(self.problem, target, label, basis)
        self._rows[label] = (start, len(self.problem.equalities))
        self.constraints.append(constraint)
        if self.config.feasibility_mode == 'regularized':
            dim = self.problem.blocks[constraint.block]
            self.problem.add_objective(
                {self.problem.entry(constraint.block, i, i): 1.0 for i in range(dim)},
                weight=self.config.gram_trace_weight)
        return constraint

    def solve(self, objective=None):
        logger.info('%s: %s', self.name, self.problem.stats())
        return solve(self.problem, self.config.solver, objective)

    def solve_or_raise(self, objective=None, diagnose=True):
        solution = self.solve(objective)
        if solution.status == INFEASIBLE:
            diagnostics = self.diagnose() if diagnose else []
            raise InfeasibleException(
                '{} is infeasible{}'.format(
                    self.name, '; feasible without: ' + ', '.join(diagnostics)
                    if diagnostics else ''),
                diagnostics=diagnostics)
        if not solution.ok:
            raise SolverException('{} failed: {}'.format(self.name, solution.message))
        return solution

    def diagnose(self):
        """Labels of SOS constraints whose removal alone makes the program feasible"""
        culprits = []
        for constraint in self.constraints:
            start, end = self._rows[constraint.label]
            trial = self.problem.copy()
            trial.name = '{}-without-{}'.format(self.name, constraint.label)
            trial.equalities = trial.equalities[:start] + trial.equalities[end:]
            result = solve(trial, self.config.solver)
            logger.debug('%s: %s', trial.name, result.status)
            if result.ok:
                culprits.append(constraint.label)
        return culprits

    def verify(self, solution):
        """Re-expand every Gram certificate against its instantiated target

        Returns:
            (list[SosReport], dict label -> SosCertificate)
        """
        reports = []
        grams = {}
        for constraint in self.constraints:
            cert = extract_certificate(constraint, solution)
            target = constraint.target.instantiate(solution)
            report = verify_certificate(target, cert, constraint.label)
            if not report.passed:
                logger.warning('%s: SOS constraint %s residual %.3g (tol %.3g), min eig %.3g',
                               self.name, constraint.label, report.residual, report.tolerance,
                               report.min_eig)
            reports.append(report)
            grams[constraint.label] = cert
        return reports, grams

    def verify_or_raise(self, solution):
        reports, grams = self.verify(solution)
        failed = [r for r in reports if not r.passed]
        if failed:
            raise CertificateRejectedException(
                '{}: SOS certificates failed re-verification: {}'.format(
                    self.name, ', '.join(r.label for r in failed)), reports)
        return reports, grams

    def instantiate(self, solution, value, chop=settings.COEFF_CHOP):
        """Numeric counterpart of a LinearPoly or LinearPolyMatrix"""
        return value.instantiate(solution, chop)
