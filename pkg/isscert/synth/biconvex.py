"""Alternating solution of the GAS and biconvex ISS programs

Each round solves two linear SDPs: the Lyapunov step fixes the controller
and searches V, lambda and the comparison functions; the controller step
fixes V and lambda and searches k together with alpha3 and alpha4. After
every step the whole constraint set is re-verified from the merged numeric
values.
"""
import logging
import time

from .. import settings
from ..exceptions import (CertificateRejectedException, ConfigException, InfeasibleException,
                          SolverException)
from ..models.certificate import (ACTUATOR, CHANNELS, GAS, ISS_ACTUATOR_BICONVEX,
                                  ISS_PROCESS_BICONVEX, PROCESS, Certificate, SosCertificate)
from ..models.comparison import ClassKInfty
from ..sos import verify_certificate
from .dissipation import lyapunov_dissipation
from .program import ProgramBuilder

logger = logging.getLogger(__name__)

V_LOWER = 'V_lower'
V_UPPER = 'V_upper'
LAMBDA = 'lambda'
DISSIPATION = 'dissipation'


def exogenous_dim(kind, library):
    channel = CHANNELS[kind]
    if channel == ACTUATOR:
        return library.m
    if channel == PROCESS:
        return library.n
    return 0


class AlternationState(object):
    """Numeric values of every decision polynomial after a step"""

    def __repr__(self):
        return '<AlternationState - round {} {}>'.format(self.round, self.step)

    def __init__(self, V, lam, k, alphas, grams, round_index=0, step=None):
        self.V = V
        self.lam = lam
        self.k = list(k)
        self.alphas = dict(alphas)
        self.grams = dict(grams)
        self.round = round_index
        self.step = step

    def merged(self, **changes):
        state = AlternationState(self.V, self.lam, self.k, self.alphas, self.grams,
                                 self.round, self.step)
        for key, value in changes.items():
            if key in ('alphas', 'grams'):
                getattr(state, key).update(value)
            else:
                setattr(state, key, value)
        return state


def _alpha_poly(alpha, nvars, var_indices):
    return alpha.polynomial(nvars, var_indices)


def numeric_targets(kind, model, library, n, state, mu):
    """SOS targets of the program evaluated at numeric values

    Returns:
        dict label -> PolyMatrix, each required to be an SOS matrix
    """
    nvars = state.V.nvars
    exo = list(range(n, nvars))
    state_vars = list(range(n))
    alpha4 = state.alphas.get('alpha4')
    dissipation = lyapunov_dissipation(
        model, library, n, state.V, state.k, state.lam,
        _alpha_poly(state.alphas['alpha3'], nvars, state_vars),
        _alpha_poly(alpha4, nvars, exo) if alpha4 is not None and exo else None,
        CHANNELS[kind])
    return {
        V_LOWER: state.V - _alpha_poly(state.alphas['alpha1'], nvars, state_vars),
        V_UPPER: _alpha_poly(state.alphas['alpha2'], nvars, state_vars) - state.V,
        LAMBDA: state.lam - mu,
        DISSIPATION: (-dissipation).to_polymatrix(),
    }


def verify_state(kind, model, library, n, state, mu):
    """Re-verify all constraints of the program against the state's Gram certificates"""
    targets = numeric_targets(kind, model, library, n, state, mu)
    return [verify_certificate(targets[label], state.grams[label], label)
            for label in (V_LOWER, V_UPPER, LAMBDA, DISSIPATION)]


def _program_stats(builder, elapsed):
    stats = builder.problem.stats()
    stats.update({
        'name': builder.name,
        'sos_constraints': len(builder.constraints),
        'matrix_constraints': sum(1 for c in builder.constraints if c.is_matrix),
        'time': elapsed,
    })
    return stats


def _alphas_from(solution, keys):
    return {name: ClassKInfty([solution.value(key) for key in coeff_keys], label=name)
            for name, coeff_keys in keys.items()}


def lyapunov_step(kind, model, library, n, k, config, round_index):
    """Fix k; search V, lambda, alpha1..alpha4 and the SOS multipliers"""
    nvars = library.Z[0].nvars
    exo = list(range(n, nvars))
    state_vars = list(range(n))
    builder = ProgramBuilder('{}-round{}-lyapunov'.format(kind, round_index + 1), nvars, config)
    V = builder.poly_variable('V', config.v_degree[1], config.v_degree[0], state_vars)
    lam_vars = state_vars if config.lambda_state_only(False) else None
    lam = builder.poly_variable('lambda', config.lambda_degree[1], config.lambda_degree[0],
                                lam_vars)
    keys = {}
    polys = {}
    for index in (1, 2, 3):
        name = 'alpha{}'.format(index)
        keys[name], polys[name] = builder.class_k(name, config.alpha_terms[name], state_vars,
                                                  config.mu)
    if exo:
        keys['alpha4'], polys['alpha4'] = builder.class_k('alpha4', config.alpha_terms['alpha4'],
                                                          exo, config.mu)
    builder.add_sos(V - polys['alpha1'], V_LOWER)
    builder.add_sos(polys['alpha2'] - V, V_UPPER)
    builder.add_sos(lam - config.mu, LAMBDA)
    M = lyapunov_dissipation(model, library, n, V, k, lam, polys['alpha3'],
                             polys.get('alpha4'), CHANNELS[kind])
    builder.add_sos(-M, DISSIPATION)
    start = time.time()
    solution = builder.solve_or_raise()
    elapsed = time.time() - start
    _, grams = builder.verify(solution)
    state = AlternationState(builder.instantiate(solution, V), builder.instantiate(solution, lam),
                             k, _alphas_from(solution, keys), grams, round_index, 'lyapunov')
    return state, _program_stats(builder, elapsed)


def controller_step(kind, model, library, n, previous, config, round_index):
    """Fix V and lambda; search k, alpha3, alpha4 and the dissipation multiplier"""
    nvars = previous.V.nvars
    exo = list(range(n, nvars))
    state_vars = list(range(n))
    builder = ProgramBuilder('{}-round{}-controller'.format(kind, round_index + 1), nvars,
                             config)
    k = [builder.poly_variable('k{}'.format(i + 1), config.k_degree[1], config.k_degree[0],
                               state_vars) for i in range(library.m)]
    keys = {}
    alpha3_keys, alpha3 = builder.class_k('alpha3', config.alpha_terms['alpha3'], state_vars,
                                          config.mu)
    keys['alpha3'] = alpha3_keys
    alpha4 = None
    if exo:
        keys['alpha4'], alpha4 = builder.class_k('alpha4', config.alpha_terms['alpha4'], exo,
                                                 config.mu)
    M = lyapunov_dissipation(model, library, n, previous.V, k, previous.lam, alpha3, alpha4,
                             CHANNELS[kind])
    builder.add_sos(-M, DISSIPATION)
    start = time.time()
    solution = builder.solve_or_raise()
    elapsed = time.time() - start
    _, grams = builder.verify(solution)
    state = previous.merged(k=[builder.instantiate(solution, p) for p in k],
                            alphas=_alphas_from(solution, keys), grams=grams,
                            round=round_index, step='controller')
    return state, _program_stats(builder, elapsed)


def _certificate(kind, library, n, state, reports, config, programs, rounds, model):
    exo_dim = state.V.nvars - n
    alphas = dict(state.alphas)
    if not exo_dim:
        alphas.pop('alpha4', None)
    return Certificate(
        kind, n, [p.restrict(n) for p in state.k], state.V.restrict(n), alphas, exo_dim,
        multipliers={'lambda': state.lam}, sos_reports=reports, grams=state.grams,
        stats={'rounds': rounds, 'programs': programs,
               'time': sum(p['time'] for p in programs)},
        config=config.to_dict(), dataset_hash=model.dataset_hash,
        model_hash=model.content_hash())


def alternate(kind, model, library, config):
    """Run the alternation and return the last fully verified certificate

    Raises:
        ConfigException: no initial controller guess
        InfeasibleException: no step produced a verified certificate; the
            diagnostics list one entry per attempted step
    """
    if config.initial_k is None:
        raise ConfigException('{} needs an initial controller guess (initial_k)'.format(kind))
    n = library.n
    if len(config.initial_k) != library.m:
        raise ConfigException('initial_k has {} entries, the system has {} inputs'.format(
            len(config.initial_k), library.m))
    nvars = n + exogenous_dim(kind, library)
    embedded = library.embedded(nvars)
    k = [p.embed(nvars) for p in config.initial_k]
    best = None
    best_reports = None
    history = []
    programs = []
    rounds = 0
    state = None
    for round_index in range(config.max_rounds):
        for step in ('lyapunov', 'controller'):
            try:
                if step == 'lyapunov':
                    candidate, stats = lyapunov_step(kind, model, embedded, n, k, config,
                                                     round_index)
                else:
                    candidate, stats = controller_step(kind, model, embedded, n, state, config,
                                                       round_index)
            except (InfeasibleException, SolverException) as e:
                logger.warning('%s round %d %s step failed: %s', kind, round_index + 1, step, e)
                history.append({'round': round_index + 1, 'step': step, 'status': 'failed',
                                'message': str(e),
                                'diagnostics': getattr(e, 'diagnostics', [])})
                return _finish(kind, library, n, best, best_reports, config, programs, rounds,
                               model, history)
            programs.append(stats)
            reports = verify_state(kind, model, embedded, n, candidate, config.mu)
            failed = [r.label for r in reports if not r.passed]
            history.append({'round': round_index + 1, 'step': step,
                            'status': 'rejected' if failed else 'verified', 'failed': failed})
            if failed:
                logger.warning('%s round %d %s step regressed on %s; stopping', kind,
                               round_index + 1, step, ', '.join(failed))
                if best is None:
                    raise CertificateRejectedException(
                        '{}: certificate failed re-verification ({})'.format(
                            kind, ', '.join(failed)), reports)
                return _finish(kind, library, n, best, best_reports, config, programs, rounds,
                               model, history)
            state = candidate
            best, best_reports = candidate, reports
            k = candidate.k
            logger.info('%s round %d %s step verified', kind, round_index + 1, step)
        rounds = round_index + 1
    return _finish(kind, library, n, best, best_reports, config, programs, rounds, model,
                   history)


def _finish(kind, library, n, best, reports, config, programs, rounds, model, history):
    if best is None:
        raise InfeasibleException(
            '{} is infeasible from the initial controller guess'.format(kind),
            diagnostics=history)
    cert = _certificate(kind, library, n, best, reports, config, programs, rounds, model)
    cert.stats['history'] = history
    return cert


def synth_gas(model, library, config):
    """Controller and Lyapunov function making the closed loop GAS for every
    pair in the ellipsoid"""
    return alternate(GAS, model, library, config)


def synth_iss_actuator_biconvex(model, library, config):
    return alternate(ISS_ACTUATOR_BICONVEX, model, library, config)


def synth_iss_process_biconvex(model, library, config):
    return alternate(ISS_PROCESS_BICONVEX, model, library, config)


def _restrict_gram(cert, n):
    keep = [i for i, (_, m) in enumerate(cert.basis) if not any(m[n:])]
    restricted = cert.restricted(keep)
    return SosCertificate(restricted.gram, [(r, m[:n]) for r, m in restricted.basis], n,
                          cert.rows, cert.label)


def freeze_exogenous(cert, model, library, mu=None):
    """Set the exogenous input of an ISS certificate to zero and re-verify it as a GAS one

    lambda(., 0) and S(., 0) are obtained by substitution; the Gram matrices
    keep only basis elements free of exogenous indeterminates.

    Returns:
        Certificate of kind gas whose sos_reports hold the re-verification
    """
    if cert.kind not in (ISS_ACTUATOR_BICONVEX, ISS_PROCESS_BICONVEX):
        raise ValueError('Only biconvex ISS certificates can be frozen, got {}'.format(cert.kind))
    n = cert.n
    if mu is None:
        mu = (cert.config or {}).get('mu', settings.MU)
    exo = range(n, cert.nvars)
    lam = cert.multipliers['lambda'].subs_zero(exo).restrict(n)
    grams = {label: _restrict_gram(gram, n) for label, gram in cert.grams.items()}
    alphas = {name: alpha for name, alpha in cert.alphas.items() if name != 'alpha4'}
    state = AlternationState(cert.V, lam, cert.k, alphas, grams)
    reports = verify_state(GAS, model, library, n, state, mu)
    return Certificate(GAS, n, cert.k, cert.V, alphas, 0, multipliers={'lambda': lam},
                       sos_reports=reports, grams=grams,
                       stats={'frozen_from': cert.kind}, config=cert.config,
                       dataset_hash=cert.dataset_hash, model_hash=cert.model_hash,
                       config_hash=cert.config_hash)

