"""One-shot convex programs built on the factorization Z = H zhat

The controller is k = Y P^-1 zhat and the ISS-Lyapunov function
V = zhat^T P^-1 zhat, so that the dissipation inequality becomes linear in
(P, Y, Theta, Gamma, lambda) after a congruence.
"""
import logging
import time

import numpy as np

from ..exceptions import CertificateRejectedException, ConfigException
from ..models.certificate import (ACTUATOR, CHANNELS, ISS_ACTUATOR_CONVEX, ISS_PROCESS_CONVEX,
                                  MODEL_BASED, Certificate)
from ..models.comparison import MatrixClassKInfty
from ..models.expression import LinearPoly, LinearPolyMatrix
from ..models.polynomial import PolyMatrix
from ..poly import quadratic_form
from ..verify import b_function, check_pd_ru
from .biconvex import _program_stats
from .comparison import extract_comparison_functions
from .dissipation import convex_dissipation, modelbased_dissipation
from .program import ProgramBuilder

logger = logging.getLogger(__name__)

DISSIPATION = 'dissipation'
LAMBDA = 'lambda'
THETA = 'Theta'


def default_xi(library):
    """zhat zhat^T, for which b = |P^-1/2 zhat|^4"""
    z = PolyMatrix.column(library.zhat)
    return z @ z.T


def _check_library(kind, library):
    if not library.has_factorization():
        raise ConfigException('{} needs a library with zhat and H (Z = H zhat)'.format(kind))


def _constant(matrix, nvars):
    return np.asarray(matrix.evaluate(np.zeros(nvars)), dtype=float)


def _theta_degree(config, xi):
    if config.theta_degree is not None:
        return int(config.theta_degree)
    degree = xi.degree() + 2
    return degree + degree % 2


def _convex_program(kind, library, config, model=None, AB=None):
    """Assemble, solve and post-process one convex program

    Returns:
        Certificate
    """
    _check_library(kind, library)
    n, m, nhat = library.n, library.m, library.Nhat
    channel = CHANNELS[kind]
    exo_dim = m if channel == ACTUATOR else n
    nvars = n + exo_dim
    state_vars = list(range(n))
    exo_vars = list(range(n, nvars))
    embedded = library.embedded(nvars)
    gamma_hat = config.theta_mode == 'gamma_hat'
    xi = config.xi if config.xi is not None else default_xi(library)
    if not gamma_hat and xi.shape != (nhat, nhat):
        raise ConfigException('Xi has shape {}, expected {}'.format(xi.shape, (nhat, nhat)))

    builder = ProgramBuilder(kind, nvars, config)
    _, P = builder.psd_matrix('P', nhat, config.p_margin)
    Y = builder.poly_matrix_variable('Y', m, nhat, config.y_degree, 0, state_vars)
    gamma_coeffs, Gamma = builder.matrix_class_k('Gamma', exo_dim, config.gamma_terms, exo_vars,
                                                 config.eps, config.gamma_structure)
    eta = None
    if gamma_hat:
        theta_coeffs, Theta = builder.matrix_class_k(THETA, nhat, config.theta_terms,
                                                     state_vars, config.eps, 'matrix')
    else:
        eta = builder.problem.add_scalar('eta', lower=config.eta_min)
        Theta = builder.poly_matrix_variable(THETA, nhat, nhat, _theta_degree(config, xi), 0,
                                             state_vars, symmetric=True)
        builder.add_sos(Theta - _scaled(xi.embed(nvars), eta, nvars), THETA)
    lam = None
    if kind == MODEL_BASED:
        M = modelbased_dissipation(AB, embedded, n, P, Y, Theta, Gamma)
    else:
        lam_vars = state_vars if config.lambda_state_only(True) else None
        lam = builder.poly_variable('lambda', config.lambda_degree[1], config.lambda_degree[0],
                                    lam_vars)
        builder.add_sos(lam - config.eps, LAMBDA)
        M = convex_dissipation(model, embedded, n, P, Y, Theta, Gamma, lam, channel)
    builder.add_sos(-M, DISSIPATION)

    start = time.time()
    solution = builder.solve_or_raise()
    elapsed = time.time() - start
    reports, grams = builder.verify_or_raise(solution)

    P_num = _constant(builder.instantiate(solution, P), nvars)
    P_num = 0.5 * (P_num + P_num.T)
    Y_num = builder.instantiate(solution, Y).restrict(n)
    gamma = MatrixClassKInfty([_constant(builder.instantiate(solution, C), nvars)
                               for C in gamma_coeffs], label='Gamma')
    if gamma_hat:
        theta_fn = MatrixClassKInfty([_constant(builder.instantiate(solution, C), nvars)
                                      for C in theta_coeffs], label=THETA)
        Theta_num = theta_fn.polymatrix(n, state_vars)
        xi = Theta_num
        eta_num = 1.0
    else:
        Theta_num = builder.instantiate(solution, Theta).restrict(n)
        eta_num = solution.value(eta)

    zhat = library.zhat
    pinv = np.linalg.inv(P_num)
    z = PolyMatrix.column(zhat)
    k = (Y_num @ pinv @ z).column_vector()
    V = quadratic_form(zhat, pinv)
    a = (z.T @ ((pinv @ Theta_num) @ pinv) @ z)[0, 0]
    b = b_function(zhat, P_num, xi)

    pd_ru = check_pd_ru(zhat, P_num, xi, config.solver)
    if not pd_ru.passed:
        raise CertificateRejectedException(
            '{}: b(x) = zhat^T P^-1 Xi P^-1 zhat is not shown positive definite and radially '
            'unbounded ({}); choose Xi = zhat zhat^T'.format(kind, pd_ru.message), reports)

    multipliers = {'P': P_num, 'Y': Y_num, 'Theta': Theta_num, 'Gamma': gamma, 'eta': eta_num}
    if lam is not None:
        multipliers['lambda'] = builder.instantiate(solution, lam)
    stats = {
        'programs': [_program_stats(builder, elapsed)],
        'time': elapsed,
        'pd_ru': pd_ru.to_dict(),
    }
    cert = Certificate(
        kind, n, k, V, {}, exo_dim, multipliers=multipliers, sos_reports=reports, grams=grams,
        a=a, b=b, stats=stats, config=config.to_dict(),
        dataset_hash=model.dataset_hash if model is not None else None,
        model_hash=model.content_hash() if model is not None else None)
    alphas, alpha_reports, alpha_grams = extract_comparison_functions(cert, config)
    cert.alphas = alphas
    cert.sos_reports.extend(alpha_reports)
    cert.grams.update(alpha_grams)
    logger.info('%s certificate: %s', kind, 'PASS' if cert.passed else 'FAIL')
    return cert


def _scaled(matrix, key, nvars):
    """matrix * key for a numeric PolyMatrix and a scalar decision variable"""
    return LinearPolyMatrix([[LinearPoly({mono: {key: c} for mono, c in e.terms.items()}, nvars)
                              for e in row] for row in matrix.entries()], nvars)


def synth_iss_actuator_convex(model, library, config):
    """Controller and ISS-Lyapunov function for actuator disturbances, in one SDP"""
    return _convex_program(ISS_ACTUATOR_CONVEX, library, config, model=model)


def synth_iss_process_convex(model, library, config):
    return _convex_program(ISS_PROCESS_CONVEX, library, config, model=model)


def synth_modelbased_convex(system, library, config):
    """Convex actuator program with the true pair [A B] in place of the ellipsoid"""
    if system is None:
        raise ConfigException('The model-based program needs the true system')
    return _convex_program(MODEL_BASED, library, config, AB=system.AB)
