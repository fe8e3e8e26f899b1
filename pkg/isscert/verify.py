"""Independent checks of synthesized certificates

Nothing here trusts the solver: dissipation is evaluated pointwise from the
certificate polynomials, either along simulated closed-loop trajectories of
the true system or at sampled members of the uncertainty ellipsoid.
"""
import csv
import io
import logging

import numpy as np

from . import settings
from .data import rk4
from .exceptions import (CertificateRejectedException, CompilationError, ConfigException,
                         DimensionError, SolverException)
from .models.certificate import ACTUATOR, PROCESS
from .models.dataset import Trajectory
from .models.expression import LinearPoly
from .models.polynomial import PolyEvaluator, Polynomial, PolyMatrix
from .models.signal import Signal
from .sdp import SdpProblem, SolverConfig, solve
from .sos import compile_scalar_sos, extract_certificate, verify_certificate
from .utils import format_float

logger = logging.getLogger(__name__)

SOS_SUFFICIENT = 'sos_sufficient'
SAMPLING_FALLBACK = 'sampling_fallback'


def exogenous_dim(cert, system):
    if cert.channel == ACTUATOR:
        return system.m
    if cert.channel == PROCESS:
        return system.n
    return 0


class _CertificateEvaluator(object):
    """Vectorized k(x), grad V(x) and the comparison bound of a certificate"""

    def __init__(self, cert):
        n = cert.n
        self.cert = cert
        self.k = PolyEvaluator(cert.k, n)
        self.grad = PolyEvaluator([cert.V.diff(j) for j in range(n)], n)
        self.alpha3 = cert.alpha(3)
        self.alpha4 = cert.alpha(4)
        if self.alpha3 is None:
            raise CertificateRejectedException('Certificate has no alpha3')

    def bound(self, states, exogenous=None):
        """-alpha3(|x|) + alpha4(|exo|) for rows of states"""
        result = -self.alpha3(np.linalg.norm(states, axis=1))
        if self.alpha4 is not None and exogenous is not None and exogenous.shape[1]:
            result = result + self.alpha4(np.linalg.norm(exogenous, axis=1))
        return result


class DissipationTrace(object):
    """Pointwise V-dot against -alpha3(|x|) + alpha4(|exo|) along a trajectory"""

    def __repr__(self):
        return '<DissipationTrace - {} points, min margin {:.3g}>'.format(
            len(self.times), self.min_margin)

    def __init__(self, times, vdot, bound):
        self.times = np.asarray(times, dtype=float)
        self.vdot = np.asarray(vdot, dtype=float)
        self.bound = np.asarray(bound, dtype=float)

    @property
    def margin(self):
        return self.bound - self.vdot

    @property
    def min_margin(self):
        return float(self.margin.min()) if len(self.times) else 0.0

    def tolerances(self, tol=settings.DISSIPATION_TOL, relative=False):
        """Allowed violation per point: tol, or tol * max(1, |Vdot|, |bound|) when relative"""
        if not relative:
            return np.full(len(self.times), tol)
        return tol * np.maximum(1.0, np.maximum(np.abs(self.vdot), np.abs(self.bound)))

    def violations(self, tol=settings.DISSIPATION_TOL, relative=False):
        return int(np.sum(self.margin < -self.tolerances(tol, relative)))

    def passed(self, tol=settings.DISSIPATION_TOL, relative=False):
        return self.violations(tol, relative) == 0

    def to_csv(self, config_hash=None):
        """CSV of the trace, preceded by a ``# config_hash`` line when one is given"""
        buf = io.StringIO()
        if config_hash is not None:
            buf.write('# config_hash {}\n'.format(config_hash))
        writer = csv.writer(buf, lineterminator='\n')
        writer.writerow(['t', 'Vdot', 'bound', 'margin'])
        for row in zip(self.times, self.vdot, self.bound, self.margin):
            writer.writerow([format_float(v) for v in row])
        return buf.getvalue()


def simulate_closed_loop(system, cert, disturbance=None, x0=None, horizon=10.0,
                         step=settings.INTEGRATION_STEP, seed=0):
    """RK4 integration of the true system under the certificate's controller

    Actuator disturbances enter as B W(x) (k(x) + w); process disturbances are
    added to the state derivative.

    Args:
        system (TrueSystem): ground truth
        cert (Certificate): controller to close the loop with
        disturbance (SignalSpec or Signal): exogenous input, zero if omitted
        x0 (array): initial state
        horizon (float): final time
        step (float): integration step
        seed (int): seed for the disturbance realization

    Returns:
        Trajectory with the applied inputs and the disturbance in ``exogenous``
    """
    if x0 is None:
        raise ConfigException('Closed-loop simulation needs an initial state')
    if cert.n != system.n or len(cert.k) != system.m:
        raise DimensionError('Certificate for n={}, m={} used on a system with n={}, m={}'.format(
            cert.n, len(cert.k), system.n, system.m))
    dim = exogenous_dim(cert, system)
    rng = np.random.default_rng(seed)
    if disturbance is None or dim == 0:
        signal = Signal.zero(max(dim, 1))
    elif isinstance(disturbance, Signal):
        signal = disturbance
    else:
        signal = disturbance.realize(dim, horizon, rng)
    controller = PolyEvaluator(cert.k, system.n)

    def field(t, x):
        exo = signal(t)
        u = controller(x)
        if cert.channel == ACTUATOR:
            return system.rhs(x, u + exo)
        if cert.channel == PROCESS:
            return system.rhs(x, u, exo)
        return system.rhs(x, u)

    times, states, diverged = rk4(field, np.asarray(x0, dtype=float), horizon, step)
    exogenous = signal.evaluate_many(times) if dim else np.zeros((len(times), 0))
    controls = controller(states)
    if cert.channel == ACTUATOR:
        controls = controls + exogenous
    noise = exogenous if cert.channel == PROCESS else np.zeros_like(states)
    return Trajectory(times, states, controls, noise, diverged, noise_signal=signal,
                      exogenous=exogenous)


def dissipation_trace(trajectory, system, cert):
    """V-dot of the true closed loop against the certified bound at every step"""
    evaluator = _CertificateEvaluator(cert)
    states = trajectory.states
    exogenous = trajectory.exogenous
    if exogenous is None:
        exogenous = np.zeros((len(states), 0))
    rates = np.zeros(len(states))
    grads = evaluator.grad(states)
    controls = evaluator.k(states)
    for i, x in enumerate(states):
        if cert.channel == ACTUATOR:
            f = system.rhs(x, controls[i] + exogenous[i])
        elif cert.channel == PROCESS:
            f = system.rhs(x, controls[i], exogenous[i])
        else:
            f = system.rhs(x, controls[i])
        rates[i] = grads[i] @ f
    return DissipationTrace(trajectory.times, rates, evaluator.bound(states, exogenous))


def _ball(rng, count, dim, radius):
    if dim == 0:
        return np.zeros((count, 0))
    directions = rng.standard_normal((count, dim))
    directions /= np.maximum(np.linalg.norm(directions, axis=1, keepdims=True), 1e-300)
    radii = radius * rng.uniform(0.0, 1.0, size=(count, 1)) ** (1.0 / dim)
    return directions * radii


class RobustReport(object):
    """Worst dissipation margin over sampled states, disturbances and ellipsoid members"""

    def __repr__(self):
        return '<RobustReport - {} samples, worst {:.3g}, {}>'.format(
            self.samples, self.worst_margin, 'PASS' if self.passed else 'FAIL')

    def __init__(self, worst_margin, violations, samples, upsilon_norm, tol, relative=False):
        self.worst_margin = float(worst_margin)
        self.violations = int(violations)
        self.samples = int(samples)
        self.upsilon_norm = upsilon_norm
        self.tol = tol
        self.relative = relative

    @property
    def counted(self):
        """Samples outside the ellipsoid may violate the bound without failing"""
        return self.upsilon_norm is None or self.upsilon_norm <= 1.0

    @property
    def passed(self):
        return not self.counted or self.violations == 0

    def to_dict(self):
        return {
            'worst_margin': self.worst_margin,
            'violations': self.violations,
            'samples': self.samples,
            'upsilon_norm': self.upsilon_norm,
            'counted': self.counted,
            'passed': self.passed,
            'tol': self.tol,
            'relative': self.relative,
        }


def robust_sample_check(cert, model, library, n_points=settings.SAMPLE_POINTS, n_upsilons=1,
                        radius_x=settings.SAMPLE_RADIUS_X, radius_exo=settings.SAMPLE_RADIUS_EXO,
                        upsilon_norm=1.0, seed=0, tol=settings.DISSIPATION_TOL, AB=None,
                        relative=False):
    """Dissipation inequality at sampled (x, exo, [A B]) with [A B] in the ellipsoid

    Members are zeta = zeta_bar + Abar^-1/2 U Qbar^1/2; every other sample
    takes |U| = upsilon_norm exactly, the rest a uniform fraction of it.
    With ``model=None`` the single pair ``AB`` is used instead. A sample
    violates when its margin is below -tol, or below -tol * max(1, |Vdot|,
    |bound|) with ``relative``.

    Returns:
        RobustReport
    """
    if model is None and AB is None:
        raise ConfigException('robust_sample_check needs an ellipsoid model or a pair AB')
    rng = np.random.default_rng(seed)
    evaluator = _CertificateEvaluator(cert)
    n = cert.n
    exo_dim = library.m if cert.channel == ACTUATOR else n if cert.channel == PROCESS else 0
    states = _ball(rng, n_points, n, radius_x)
    exogenous = _ball(rng, n_points, exo_dim, radius_exo)
    z = PolyEvaluator(library.Z, n)(states)
    w = PolyEvaluator([e for row in library.W.entries() for e in row], n)(states)
    w = w.reshape(n_points, library.M, library.m)
    controls = evaluator.k(states)
    if cert.channel == ACTUATOR:
        controls = controls + exogenous
    phi = np.hstack([z, np.einsum('kij,kj->ki', w, controls)])
    grads = evaluator.grad(states)
    bound = evaluator.bound(states, exogenous)
    worst = np.inf
    violations = 0
    total = 0
    for j in range(n_upsilons):
        if model is None:
            pairs = [np.atleast_2d(AB)] * n_points
            used_norm = None
        else:
            used_norm = upsilon_norm
            pairs = []
            for i in range(n_points):
                g = rng.standard_normal((model.size, model.n))
                spectral = np.linalg.norm(g, 2)
                scale = upsilon_norm if i % 2 == 0 else upsilon_norm * rng.uniform()
                upsilon = g / spectral * scale if spectral > 0 else g
                pairs.append(model.member(upsilon).T)
        for i in range(n_points):
            f = pairs[i] @ phi[i]
            if cert.channel == PROCESS:
                f = f + exogenous[i]
            vdot = grads[i] @ f
            margin = bound[i] - vdot
            limit = tol * max(1.0, abs(vdot), abs(bound[i])) if relative else tol
            worst = min(worst, margin)
            total += 1
            if margin < -limit:
                violations += 1
    report = RobustReport(worst, violations, total, used_norm, tol, relative)
    logger.info('Robust sampling of %s: %s', cert.kind, report.to_dict())
    return report


class PdRuReport(object):
    """Outcome of the positive definite and radially unbounded test of b"""

    def __repr__(self):
        return '<PdRuReport - {} via {}>'.format('PASS' if self.passed else 'FAIL', self.method)

    def __init__(self, passed, method, eps=None, b=None, message=''):
        self.passed = bool(passed)
        self.method = method
        self.eps = eps
        self.b = b
        self.message = message

    @property
    def conclusive(self):
        return self.method == SOS_SUFFICIENT

    def to_dict(self):
        return {'passed': self.passed, 'method': self.method, 'eps': self.eps,
                'conclusive': self.conclusive, 'message': self.message}


def b_function(zhat, P, xi):
    """b(x) = zhat^T P^-1 Xi(x) P^-1 zhat"""
    pinv = np.linalg.inv(P)
    z = PolyMatrix.column(zhat)
    return (z.T @ ((pinv @ xi) @ pinv) @ z)[0, 0]


def comparator(zhat, degree):
    """(zhat^T zhat)^2 when it has the degree of b, otherwise sum_j x_j^degree"""
    n = zhat[0].nvars
    square = sum((p * p for p in zhat), Polynomial.zero(n))
    quartic = square * square
    if quartic.degree() == degree:
        return quartic
    return Polynomial({tuple(degree if i == j else 0 for i in range(n)): 1.0
                       for j in range(n)}, n)


def _shell_sampling(b, n, seed):
    rng = np.random.default_rng(seed)
    minima = []
    for radius in settings.PD_RU_SHELLS:
        directions = rng.standard_normal((settings.SAMPLE_POINTS, n))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        minima.append(float(np.min(b(directions * radius))))
    positive = all(v > 0 for v in minima)
    growing = all(a < b_ for a, b_ in zip(minima, minima[1:]))
    return positive and growing, minima


def check_pd_ru(zhat, P, xi, solver=None, seed=0):
    """Test that b = zhat^T P^-1 Xi P^-1 zhat is positive definite and radially unbounded

    Sufficient test: b - eps c is SOS for some eps >= 1e-6 with the comparator
    c from ``comparator``. When the SOS test is inconclusive, b is sampled on
    shells of increasing radius and the result is marked as sampled.

    Raises:
        CertificateRejectedException: P is not positive definite
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    P = 0.5 * (P + P.T)
    if np.linalg.eigvalsh(P)[0] <= 0:
        raise CertificateRejectedException('P is not positive definite')
    b = b_function(zhat, P, xi).chop(settings.COEFF_CHOP)
    n = zhat[0].nvars
    if b.is_zero():
        return PdRuReport(False, SOS_SUFFICIENT, b=b, message='b vanishes identically')
    degree = b.degree()
    if degree % 2 == 0:
        problem = SdpProblem('pd-ru')
        eps = problem.add_scalar('eps', lower=settings.PD_RU_MIN_EPS)
        target = LinearPoly.from_polynomial(b) - \
            LinearPoly({m: {eps: c} for m, c in comparator(zhat, degree).terms.items()}, n)
        problem.add_objective({eps: -1.0})
        try:
            constraint = compile_scalar_sos(problem, target, 'b_pd_ru')
            solution = solve(problem, solver or SolverConfig())
        except (CompilationError, SolverException) as e:
            logger.debug('SOS test of b not compiled: %s', e)
            solution = None
        if solution is not None and solution.ok:
            report = verify_certificate(constraint.target.instantiate(solution),
                                        extract_certificate(constraint, solution))
            if report.passed:
                return PdRuReport(True, SOS_SUFFICIENT, solution.value(eps), b)
    passed, minima = _shell_sampling(b, n, seed)
    logger.warning('SOS test of b inconclusive; shell sampling minima %s', minima)
    return PdRuReport(passed, SAMPLING_FALLBACK, b=b,
                      message='shell minima {}'.format(['{:.3g}'.format(v) for v in minima]))


def energy_consistency(trajectory, system, cert, trace=None, tol=settings.ENERGY_TOL):
    """Compare symbolic V-dot with central differences of V along a trajectory

    The central difference is second-order accurate, so the gap is held to
    tol * step * (1 + max |V-dot|).

    Returns:
        dict with the largest absolute gap, the largest |V-dot|, the step,
        the tolerance and ``passed``
    """
    if trace is None:
        trace = dissipation_trace(trajectory, system, cert)
    values = cert.V.evaluate(trajectory.states)
    times = trajectory.times
    if len(times) < 3:
        return {'max_error': 0.0, 'scale': 0.0, 'step': 0.0, 'tolerance': 0.0, 'passed': True}
    finite = (values[2:] - values[:-2]) / (times[2:] - times[:-2])
    gap = np.abs(finite - trace.vdot[1:-1])
    scale = float(np.abs(trace.vdot).max())
    step = float(np.median(np.diff(times)))
    tolerance = tol * step * (1.0 + scale)
    max_error = float(gap.max())
    return {
        'max_error': max_error,
        'scale': scale,
        'step': step,
        'tolerance': tolerance,
        'passed': max_error <= tolerance,
    }
