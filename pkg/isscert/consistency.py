"""Data-consistent uncertainty sets

Each sample restricts the unknown pair [A B] to a matrix quadric; the
intersection is overapproximated by a single matrix ellipsoid of maximal
log det (smallest set), and membership and rank diagnostics are provided.
"""
import logging

import numpy as np

from . import settings
from .data import regressor_matrices
from .decorators import timed
from .exceptions import InfeasibleException, SolverException
from .models.ellipsoid import EllipsoidModel, SampleQuadric
from .sdp import INFEASIBLE, SdpProblem, solve_maxdet

logger = logging.getLogger(__name__)

ABAR = 'Abar'


def build_sample_quadrics(dataset, library):
    """One SampleQuadric per sample"""
    quadrics = []
    for i in range(dataset.T):
        z = library.regressor(dataset.states[i], dataset.inputs[i])
        quadrics.append(SampleQuadric.from_sample(z, dataset.xdot[i], dataset.delta))
    return quadrics


def overapproximation_problem(quadrics):
    """Max-det program whose solution gives the ellipsoid (Abar, Bbar)

    The constraint is
        [[-I - sum tau C,   *,                 *    ],
         [Bbar - sum tau B, Abar - sum tau A,  *    ],
         [Bbar,             0,                 -Abar]]  <= 0
    with tau >= 0; it is added as a PSD slack equal to the negated matrix.

    Returns:
        (SdpProblem, list of Bbar keys, list of tau keys)
    """
    n = quadrics[0].C.shape[0]
    size = quadrics[0].A.shape[0]
    problem = SdpProblem('overapproximation')
    problem.add_block(size, name=ABAR)
    problem.set_maxdet(ABAR)
    bbar = [[problem.add_scalar('Bbar_{}_{}'.format(i, j)) for j in range(n)]
            for i in range(size)]
    taus = [problem.add_scalar('tau_{}'.format(k), lower=0.0) for k in range(len(quadrics))]

    dim = n + 2 * size
    neg = [[{} for _ in range(dim)] for _ in range(dim)]

    def put(i, j, key, weight):
        if i > j:
            i, j = j, i
        entry = neg[i][j]
        entry[key] = entry.get(key, 0.0) + weight

    for i in range(n):
        put(i, i, None, 1.0)
    for k, quad in enumerate(quadrics):
        tau = taus[k]
        for i in range(n):
            for j in range(i, n):
                if quad.C[i, j] != 0.0:
                    put(i, j, tau, quad.C[i, j])
        for i in range(size):
            for j in range(n):
                if quad.B[i, j] != 0.0:
                    put(n + i, j, tau, quad.B[i, j])
            for j in range(i, size):
                if quad.A[i, j] != 0.0:
                    put(n + i, n + j, tau, quad.A[i, j])
    for i in range(size):
        for j in range(n):
            put(n + i, j, bbar[i][j], -1.0)
            put(n + size + i, j, bbar[i][j], -1.0)
        for j in range(i, size):
            key = problem.entry(ABAR, i, j)
            put(n + i, n + j, key, -1.0)
            put(n + size + i, n + size + j, key, 1.0)
    for i in range(dim):
        for j in range(i):
            neg[i][j] = neg[j][i]
    problem.add_psd(neg, label='overapproximation_lmi')
    return problem, bbar, taus


@timed
def solve_overapproximation(quadrics, config=None, dataset_hash=None):
    """Solve the max-det program and return the EllipsoidModel

    Raises:
        InfeasibleException: the data cannot pin down a bounded ellipsoid;
            [Z0; W0] should have full row rank, so collect more informative data
    """
    if not quadrics:
        raise ValueError('At least one sample quadric is required')
    problem, bbar, taus = overapproximation_problem(quadrics)
    logger.info('Overapproximation: %d samples, %s', len(quadrics), problem.stats())
    solution = solve_maxdet(problem, config)
    if solution.status == INFEASIBLE:
        raise InfeasibleException(
            'Overapproximation program is infeasible; check that the stacked regressor '
            'matrix [Z0; W0] has full row rank and collect more data if it does not',
            diagnostics=['rank'])
    if not solution.ok:
        raise SolverException('Overapproximation failed: {}'.format(solution.message))
    abar = solution.block_values[ABAR]
    if np.linalg.eigvalsh(abar)[0] <= 0:
        raise InfeasibleException('Abar is not positive definite; collect more data')
    bbar_value = np.array([[solution.value(k) for k in row] for row in bbar])
    model = EllipsoidModel(abar, bbar_value, [solution.value(t) for t in taus],
                           dataset_hash, solution.objective_value,
                           {'iterations': len(solution.stats.get('logdet_history', [])),
                            'variables': problem.num_variables()})
    logger.info('Overapproximation log det Abar = %.6g', solution.objective_value)
    return model


def membership_exact(AB, dataset, library):
    """True iff every sample satisfies |xdot_i - AB z_i|^2 <= delta"""
    AB = np.atleast_2d(np.asarray(AB, dtype=float))
    for i in range(dataset.T):
        z = library.regressor(dataset.states[i], dataset.inputs[i])
        residual = dataset.xdot[i] - AB @ z
        if residual @ residual > dataset.delta + settings.EXACT_MEMBERSHIP_SLACK:
            return False
    return True


def membership_margin(AB, model):
    """Largest eigenvalue of the ellipsoid inequality and the tolerance it is held to"""
    zeta = np.atleast_2d(np.asarray(AB, dtype=float)).T
    delta = zeta - model.zeta_bar
    quad = delta.T @ model.Abar @ delta
    lhs = quad - np.eye(model.n)
    worst = float(np.linalg.eigvalsh(0.5 * (lhs + lhs.T))[-1])
    return worst, settings.MEMBERSHIP_TOL * (1.0 + np.linalg.norm(quad, 2))


def membership_ellipsoid(AB, model):
    """True iff the pair AB (n x (N + M)) lies in the ellipsoid"""
    worst, tol = membership_margin(AB, model)
    return worst <= tol


def rank_check(dataset, library):
    """Singular values of [Z0; W0] and whether it has full row rank"""
    z0, w0 = regressor_matrices(dataset, library)
    stacked = np.vstack([z0, w0])
    sv = np.linalg.svd(stacked, compute_uv=False)
    rows = stacked.shape[0]
    full = (dataset.T >= rows and len(sv) >= rows and sv[0] > 0
            and sv[rows - 1] > settings.RANK_TOL * sv[0])
    if not full:
        logger.warning('[Z0; W0] (%dx%d) is rank deficient; singular values %s',
                       rows, dataset.T, np.array2string(sv, precision=3))
    return {'full_row_rank': bool(full), 'singular_values': sv.tolist(),
            'rows': rows, 'samples': dataset.T}
