"""Standard-form semidefinite programs and their cvxpy backend

A problem holds named scalar variables (optionally bounded below), named PSD
blocks, sparse linear equalities and a linear objective to minimize. Affine
expressions are dicts from variable key to weight: a scalar is keyed by its
name, a block entry by ``(block, i, j)`` with ``i <= j``, and ``None`` holds a
constant.
"""
from collections import OrderedDict
import copy
import itertools
import logging

import cvxpy as cp
import numpy as np
from scipy import sparse
from scipy.optimize import minimize_scalar

from . import settings
from .exceptions import InfeasibleException, SolverException

logger = logging.getLogger(__name__)

OPTIMAL = 'optimal'
FEASIBLE = 'feasible'
INFEASIBLE = 'infeasible'
NUMERICAL_FAILURE = 'numerical_failure'


class SolverConfig(object):
    """Backend choice and acceptance tolerances"""

    def __repr__(self):
        return '<SolverConfig - {}>'.format(self.solver)

    def __init__(self, solver=None, fallback_solver=None, eq_tol=None, psd_tol=None,
                 maxdet_tol=None, maxdet_max_iters=None, verbose=False):
        self.solver = solver or settings.SDP_SOLVER
        self.fallback_solver = fallback_solver or settings.FALLBACK_SOLVER
        self.eq_tol = settings.EQ_TOL if eq_tol is None else eq_tol
        self.psd_tol = settings.PSD_TOL if psd_tol is None else psd_tol
        self.maxdet_tol = settings.MAXDET_TOL if maxdet_tol is None else maxdet_tol
        self.maxdet_max_iters = (settings.MAXDET_MAX_ITERS if maxdet_max_iters is None
                                 else maxdet_max_iters)
        self.verbose = verbose

    def to_dict(self):
        return {
            'solver': self.solver,
            'fallback_solver': self.fallback_solver,
            'eq_tol': self.eq_tol,
            'psd_tol': self.psd_tol,
            'maxdet_tol': self.maxdet_tol,
            'maxdet_max_iters': self.maxdet_max_iters,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**(data or {}))


class SdpProblem(object):
    """Conic program assembled by the compilers"""

    def __repr__(self):
        return '<SdpProblem - {}>'.format(self.name)

    def __init__(self, name='sdp'):
        self.name = name
        self.blocks = OrderedDict()
        self.scalars = OrderedDict()
        self.equalities = []
        self.objective = {}
        self.maxdet_block = None
        self._names = itertools.count()

    def _fresh(self, prefix):
        while True:
            name = '{}_{}'.format(prefix, next(self._names))
            if name not in self.blocks and name not in self.scalars:
                return name

    def add_scalar(self, name=None, lower=None, prefix='s'):
        """Declare a scalar variable and return its key"""
        name = name or self._fresh(prefix)
        if name in self.scalars or name in self.blocks:
            raise ValueError('Variable {} already declared'.format(name))
        self.scalars[name] = lower
        return name

    def add_block(self, dim, name=None, prefix='G'):
        """Declare a PSD block of size dim and return its name"""
        if dim < 1:
            raise ValueError('PSD block dimension must be at least 1')
        name = name or self._fresh(prefix)
        if name in self.scalars or name in self.blocks:
            raise ValueError('Variable {} already declared'.format(name))
        self.blocks[name] = int(dim)
        return name

    @staticmethod
    def entry(block, i, j):
        return (block, i, j) if i <= j else (block, j, i)

    def block_exprs(self, block):
        """Block entries as a nested list of affine dicts"""
        dim = self.blocks[block]
        return [[{self.entry(block, i, j): 1.0} for j in range(dim)] for i in range(dim)]

    def _check_key(self, key):
        if key is None:
            return
        if isinstance(key, tuple):
            block, i, j = key
            if block not in self.blocks or not 0 <= i <= j < self.blocks[block]:
                raise KeyError('Unknown block entry {}'.format(key))
        elif key not in self.scalars:
            raise KeyError('Unknown scalar {}'.format(key))

    def add_equality(self, coeffs, rhs=0.0, label=None):
        """Add sum(coeffs[k] * var_k) == rhs"""
        coeffs = {k: float(v) for k, v in coeffs.items() if v != 0.0}
        for key in coeffs:
            if key is None:
                raise KeyError('Constant term in equality coefficients')
            self._check_key(key)
        self.equalities.append((coeffs, float(rhs), label))

    def add_affine_equality(self, expr, label=None):
        """Add expr == 0 for an affine dict with an optional constant"""
        coeffs = {k: v for k, v in expr.items() if k is not None}
        rhs = -expr.get(None, 0.0)
        if not coeffs:
            if abs(rhs) > settings.COMPILE_ZERO_TOL:
                self.equalities.append(({}, rhs, label))
            return
        self.add_equality(coeffs, rhs, label)

    def add_affine_inequality(self, expr, label=None):
        """Add expr >= 0 through a nonnegative slack"""
        slack = self.add_scalar(lower=0.0, prefix='slack')
        expr = dict(expr)
        expr[slack] = expr.get(slack, 0.0) - 1.0
        self.add_affine_equality(expr, label)
        return slack

    def add_psd(self, matrix, label=None, prefix='L'):
        """Constrain a symmetric matrix of affine dicts to be PSD

        A slack block is declared and tied to the upper triangle entrywise.

        Returns:
            str: name of the slack block
        """
        dim = len(matrix)
        block = self.add_block(dim, prefix=prefix)
        for i in range(dim):
            for j in range(i, dim):
                expr = dict(matrix[i][j])
                key = self.entry(block, i, j)
                expr[key] = expr.get(key, 0.0) - 1.0
                self.add_affine_equality(expr, '{}[{},{}]'.format(label or block, i, j))
        return block

    def add_objective(self, expr, weight=1.0):
        """Add weight * expr to the minimized objective"""
        for key, value in expr.items():
            if key is None:
                continue
            self._check_key(key)
            self.objective[key] = self.objective.get(key, 0.0) + weight * value

    def set_maxdet(self, block):
        if block not in self.blocks:
            raise KeyError('Unknown block {}'.format(block))
        self.maxdet_block = block

    def copy(self):
        return copy.deepcopy(self)

    def validate(self):
        for coeffs, _, label in self.equalities:
            for key in coeffs:
                self._check_key(key)
        for key in self.objective:
            self._check_key(key)

    def num_variables(self):
        return len(self.scalars) + sum(d * (d + 1) // 2 for d in self.blocks.values())

    def stats(self):
        return {
            'scalars': len(self.scalars),
            'blocks': len(self.blocks),
            'block_sizes': sorted(self.blocks.values(), reverse=True),
            'variables': self.num_variables(),
            'equalities': len(self.equalities),
        }

    def dump(self):
        """Sparse text listing, one nonzero per line

        Columns are constraint-id, block-id, row, col, value. Constraint 0 is
        the objective and block 0 holds the scalars on its diagonal; indices
        are 1-based.
        """
        block_ids = {name: k + 1 for k, name in enumerate(self.blocks)}
        scalar_ids = {name: k + 1 for k, name in enumerate(self.scalars)}

        def locate(key):
            if isinstance(key, tuple):
                block, i, j = key
                return block_ids[block], i + 1, j + 1
            return 0, scalar_ids[key], scalar_ids[key]

        lines = [
            '# {}'.format(self.name),
            '# equalities {}'.format(len(self.equalities)),
            '# blocks 0:{} {}'.format(
                len(self.scalars),
                ' '.join('{}:{}'.format(block_ids[b], d) for b, d in self.blocks.items())),
            '# rhs {}'.format(' '.join('{:.17g}'.format(rhs) for _, rhs, _ in self.equalities)),
        ]
        rows = [(0, coeffs) for coeffs in [self.objective]]
        rows += [(k + 1, coeffs) for k, (coeffs, _, _) in enumerate(self.equalities)]
        for cid, coeffs in rows:
            for key in sorted(coeffs, key=lambda k: locate(k)):
                block, row, col = locate(key)
                lines.append('{} {} {} {} {:.17g}'.format(cid, block, row, col, coeffs[key]))
        return '\n'.join(lines) + '\n'


class SdpSolution(object):
    """Values and status returned by solve and solve_maxdet"""

    def __repr__(self):
        return '<SdpSolution - {}>'.format(self.status)

    def __init__(self, status, scalar_values=None, block_values=None, objective_value=None,
                 residuals=None, solver=None, message=''):
        self.status = status
        self.scalar_values = scalar_values or {}
        self.block_values = block_values or {}
        self.objective_value = objective_value
        self.residuals = residuals or {}
        self.solver = solver
        self.message = message
        self.stats = {}

    @property
    def ok(self):
        return self.status in (OPTIMAL, FEASIBLE)

    def value(self, key):
        if key is None:
            return 1.0
        if isinstance(key, tuple):
            block, i, j = key
            return float(self.block_values[block][i, j])
        return float(self.scalar_values[key])

    def affine_value(self, expr):
        return sum(w * self.value(k) for k, w in expr.items())

    def raise_for_status(self, context=''):
        if self.status == INFEASIBLE:
            raise InfeasibleException('{} is infeasible{}'.format(
                context or 'Program', ': ' + self.message if self.message else ''))
        if not self.ok:
            raise SolverException('{} failed numerically: {}'.format(
                context or 'Program', self.message))


def _installed(solver):
    return solver in cp.installed_solvers()


def _equality_matrices(problem, scalar_index):
    """Sparse A_s, {block: A_b} and b for all equalities"""
    rows = len(problem.equalities)
    s_data, s_rows, s_cols = [], [], []
    b_parts = {name: ([], [], []) for name in problem.blocks}
    rhs = np.zeros(rows)
    for r, (coeffs, value, _) in enumerate(problem.equalities):
        rhs[r] = value
        for key, weight in coeffs.items():
            if isinstance(key, tuple):
                block, i, j = key
                dim = problem.blocks[block]
                data, row_idx, col_idx = b_parts[block]
                data.append(weight)
                row_idx.append(r)
                # column-major position of entry (i, j)
                col_idx.append(j * dim + i)
            else:
                s_data.append(weight)
                s_rows.append(r)
                s_cols.append(scalar_index[key])
    a_s = sparse.csr_matrix((s_data, (s_rows, s_cols)), shape=(rows, len(scalar_index)))
    a_b = {}
    for name, (data, row_idx, col_idx) in b_parts.items():
        dim = problem.blocks[name]
        if data:
            a_b[name] = sparse.csr_matrix((data, (row_idx, col_idx)), shape=(rows, dim * dim))
    return a_s, a_b, rhs


def _linear_expression(problem, coeffs, svar, bvars, scalar_index):
    terms = []
    scalar_w = np.zeros(len(scalar_index))
    block_w = {}
    for key, weight in coeffs.items():
        if isinstance(key, tuple):
            block, i, j = key
            dim = problem.blocks[block]
            w = block_w.setdefault(block, np.zeros((dim, dim)))
            if i == j:
                w[i, i] += weight
            else:
                w[i, j] += 0.5 * weight
                w[j, i] += 0.5 * weight
        else:
            scalar_w[scalar_index[key]] += weight
    if svar is not None and np.any(scalar_w):
        terms.append(scalar_w @ svar)
    for block, w in block_w.items():
        terms.append(cp.trace(w @ bvars[block]))
    if not terms:
        return cp.Constant(0.0)
    return cp.sum(cp.hstack(terms)) if len(terms) > 1 else terms[0]


def _build(problem, objective):
    scalar_index = {name: k for k, name in enumerate(problem.scalars)}
    svar = cp.Variable(len(scalar_index)) if scalar_index else None
    bvars = OrderedDict()
    constraints = []
    for name, dim in problem.blocks.items():
        if dim == 1:
            var = cp.Variable((1, 1))
            constraints.append(var >= 0)
        else:
            var = cp.Variable((dim, dim), symmetric=True)
            constraints.append(var >> 0)
        bvars[name] = var
    bounded = [(scalar_index[k], lb) for k, lb in problem.scalars.items() if lb is not None]
    if bounded:
        idx = np.array([k for k, _ in bounded])
        constraints.append(svar[idx] >= np.array([lb for _, lb in bounded]))
    if problem.equalities:
        a_s, a_b, rhs = _equality_matrices(problem, scalar_index)
        parts = []
        if svar is not None and a_s.nnz:
            parts.append(a_s @ svar)
        for name, mat in a_b.items():
            dim = problem.blocks[name]
            parts.append(mat @ cp.reshape(bvars[name], (dim * dim,), order='F'))
        if parts:
            lhs = parts[0]
            for part in parts[1:]:
                lhs = lhs + part
            constraints.append(lhs == rhs)
        elif np.any(np.abs(rhs) > 0):
            constraints.append(cp.Constant(0.0) == 1.0)
    obj = _linear_expression(problem, objective, svar, bvars, scalar_index)
    return cp.Problem(cp.Minimize(obj), constraints), svar, bvars


def check_solution(problem, scalar_values, block_values, config):
    """Recompute residuals independently of the solver

    Equality rows are measured relative to max(1, largest row entry). PSD
    blocks are measured by their minimum eigenvalue relative to max(1,
    largest entry).

    Returns:
        (bool, dict)
    """
    def value(key):
        if isinstance(key, tuple):
            block, i, j = key
            return block_values[block][i, j]
        return scalar_values[key]

    eq_residual = 0.0
    for coeffs, rhs, _ in problem.equalities:
        lhs = sum(w * value(k) for k, w in coeffs.items())
        scale = max([1.0, abs(rhs)] + [abs(w) for w in coeffs.values()])
        eq_residual = max(eq_residual, abs(lhs - rhs) / scale)
    min_eig = np.inf
    for name, mat in block_values.items():
        norm = max(1.0, np.abs(mat).max())
        min_eig = min(min_eig, np.linalg.eigvalsh(mat)[0] / norm)
    bound_violation = 0.0
    for name, lb in problem.scalars.items():
        if lb is not None:
            bound_violation = max(bound_violation, lb - scalar_values[name])
    residuals = {
        'equality': float(eq_residual),
        'psd_min_eig': float(min_eig) if np.isfinite(min_eig) else 0.0,
        'bound': float(bound_violation),
    }
    ok = (eq_residual <= config.eq_tol and residuals['psd_min_eig'] >= -config.psd_tol
          and bound_violation <= config.eq_tol)
    return ok, residuals


def _run(cvx_problem, solver, config):
    kwargs = {'verbose': config.verbose}
    cvx_problem.solve(solver=solver, **kwargs)
    return cvx_problem.status


def solve(problem, config=None, objective=None):
    """Solve an SdpProblem with a linear objective

    Args:
        problem (SdpProblem): the program
        config (SolverConfig): backend and tolerances
        objective (dict): optional objective replacing problem.objective

    Returns:
        SdpSolution
    """
    config = config or SolverConfig()
    problem.validate()
    objective = problem.objective if objective is None else objective
    solvers = [s for s in (config.solver, config.fallback_solver) if _installed(s)]
    if not solvers:
        solvers = [None]
    status = None
    message = ''
    used = None
    for solver in solvers:
        cvx_problem, svar, bvars = _build(problem, objective)
        try:
            status = _run(cvx_problem, solver, config)
            used = solver
        except cp.error.SolverError as e:
            logger.warning('Solver %s failed on %s: %s', solver, problem.name, e)
            message = str(e)
            status = None
            continue
        if status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE, cp.INFEASIBLE):
            break
    if status is None:
        return SdpSolution(NUMERICAL_FAILURE, solver=used, message=message or 'solver error')
    if status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        logger.debug('%s infeasible (%s)', problem.name, status)
        return SdpSolution(INFEASIBLE, solver=used, message=status)
    if status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        return SdpSolution(NUMERICAL_FAILURE, solver=used, message=status)

    scalar_values = OrderedDict()
    if svar is not None:
        for k, name in enumerate(problem.scalars):
            scalar_values[name] = float(svar.value[k])
    block_values = OrderedDict()
    for name, var in bvars.items():
        mat = np.asarray(var.value, dtype=float).reshape(problem.blocks[name],
                                                         problem.blocks[name])
        block_values[name] = 0.5 * (mat + mat.T)
    ok, residuals = check_solution(problem, scalar_values, block_values, config)
    objective_value = sum(
        w * (scalar_values[k] if not isinstance(k, tuple) else block_values[k[0]][k[1], k[2]])
        for k, w in objective.items())
    if not ok:
        logger.warning('%s: solver reported %s but recheck failed %s',
                       problem.name, status, residuals)
        return SdpSolution(NUMERICAL_FAILURE, scalar_values, block_values, objective_value,
                           residuals, used, 'residual recheck failed')
    result = OPTIMAL if status == cp.OPTIMAL else FEASIBLE
    logger.debug('%s solved by %s: %s, objective %.6g', problem.name, used, result,
                 objective_value)
    return SdpSolution(result, scalar_values, block_values, objective_value, residuals, used)


def _logdet(mat):
    sign, value = np.linalg.slogdet(mat)
    return value if sign > 0 else -np.inf


def _interpolate(start, end, theta):
    scalars = OrderedDict(
        (k, (1 - theta) * v + theta * end.scalar_values[k]) for k, v in start.scalar_values.items())
    blocks = OrderedDict(
        (k, (1 - theta) * v + theta * end.block_values[k]) for k, v in start.block_values.items())
    return scalars, blocks


def _line_search(current, direction):
    """Best step in [0, 1] for log det(current + t direction)"""
    chol = np.linalg.cholesky(current)
    inv_chol = np.linalg.inv(chol)
    mus = np.linalg.eigvalsh(inv_chol @ direction @ inv_chol.T)

    def negative_gain(t):
        shifted = 1.0 + t * mus
        if np.any(shifted <= 0):
            return np.inf
        return -np.sum(np.log(shifted))

    res = minimize_scalar(negative_gain, bounds=(0.0, 1.0), method='bounded',
                          options={'xatol': 1e-10})
    theta = float(res.x)
    if negative_gain(1.0) < negative_gain(theta):
        theta = 1.0
    return theta, -negative_gain(theta)


def solve_maxdet(problem, config=None):
    """Maximize log det of the marked block over the feasible set

    Starts from the point maximizing the smallest eigenvalue of the block and
    improves it by linearizing log det (maximize trace(X_k^-1 X)) followed by
    an exact line search towards the linearized optimum. The log det sequence
    is non-decreasing; a decrease is reported as a numerical failure.
    """
    config = config or SolverConfig()
    block = problem.maxdet_block
    if block is None:
        raise ValueError('Problem {} has no log det block'.format(problem.name))
    dim = problem.blocks[block]

    start = problem.copy()
    t = start.add_scalar(name='__maxdet_t')
    shifted = [[dict({start.entry(block, i, j): 1.0}, **({t: -1.0} if i == j else {}))
                for j in range(dim)] for i in range(dim)]
    start.add_psd(shifted, label='maxdet_start')
    initial = solve(start, config, objective={t: -1.0})
    if initial.status == INFEASIBLE:
        return initial
    if not initial.ok:
        return initial
    if initial.value(t) <= settings.MAXDET_MIN_EIG:
        return SdpSolution(INFEASIBLE, solver=initial.solver,
                           message='no point with {} positive definite'.format(block))

    keep = list(problem.scalars)
    current = SdpSolution(
        FEASIBLE,
        OrderedDict((k, initial.scalar_values[k]) for k in keep),
        OrderedDict((k, initial.block_values[k]) for k in problem.blocks),
        solver=initial.solver)
    logdet = _logdet(current.block_values[block])
    history = [logdet]
    logger.info('%s: log det start %.6g', problem.name, logdet)

    for iteration in range(config.maxdet_max_iters):
        weight = np.linalg.inv(current.block_values[block])
        objective = {}
        for i in range(dim):
            for j in range(i, dim):
                objective[problem.entry(block, i, j)] = -weight[i, j] * (1.0 if i == j else 2.0)
        step = solve(problem, config, objective=objective)
        if not step.ok:
            logger.warning('%s: linearized step %d returned %s', problem.name, iteration,
                           step.status)
            break
        direction = step.block_values[block] - current.block_values[block]
        theta, gain = _line_search(current.block_values[block], direction)
        if gain <= config.maxdet_tol or theta <= 0.0:
            break
        scalars, blocks = _interpolate(current, step, theta)
        new_logdet = _logdet(blocks[block])
        if new_logdet < logdet - 1e-12:
            return SdpSolution(NUMERICAL_FAILURE, current.scalar_values, current.block_values,
                               logdet, solver=step.solver,
                               message='log det decreased at iteration {}'.format(iteration))
        current = SdpSolution(FEASIBLE, scalars, blocks, solver=step.solver)
        logdet = new_logdet
        history.append(logdet)
        logger.info('%s: iteration %d log det %.6g (step %.3g)', problem.name, iteration + 1,
                    logdet, theta)

    ok, residuals = check_solution(problem, current.scalar_values, current.block_values, config)
    status = FEASIBLE if ok else NUMERICAL_FAILURE
    result = SdpSolution(status, current.scalar_values, current.block_values, logdet,
                         residuals, current.solver,
                         '' if ok else 'residual recheck failed')
    result.stats['logdet_history'] = history
    return result
