import numpy as np
import pytest

from isscert.consistency import membership_ellipsoid
from isscert.exceptions import CertificateRejectedException, ConfigException, DimensionError
from isscert.models import (Certificate, ClassKInfty, EllipsoidModel, Polynomial, PolyMatrix,
                            SignalSpec)
from isscert.models.certificate import GAS, ISS_ACTUATOR_BICONVEX
from isscert.synth import sontag_redesign
from isscert.verify import (SAMPLING_FALLBACK, SOS_SUFFICIENT, DissipationTrace, b_function,
                            check_pd_ru, comparator, dissipation_trace, energy_consistency,
                            robust_sample_check, simulate_closed_loop)


@pytest.fixture
def x1():
    return Polynomial.variable(0, 2)


@pytest.fixture
def x2():
    return Polynomial.variable(1, 2)


@pytest.fixture
def controller(x1, x2):
    # closes the loop to Vdot = -2 (x1^4 + x2^4) for V = |x|^2
    return [-(x2 ** 3) - x1 * x2 ** 2]


@pytest.fixture
def gas_certificate(controller, x1, x2):
    alphas = {'alpha1': ClassKInfty([1.0]), 'alpha2': ClassKInfty([1.0]),
              'alpha3': ClassKInfty([0.0, 1.0])}
    return Certificate(GAS, 2, controller, x1 ** 2 + x2 ** 2, alphas)


@pytest.fixture
def weak_certificate(controller, x1, x2):
    """Actuator certificate whose alpha4 is far too small"""
    alphas = {'alpha1': ClassKInfty([1.0]), 'alpha2': ClassKInfty([1.0]),
              'alpha3': ClassKInfty([0.0, 1.0]), 'alpha4': ClassKInfty([1e-6])}
    return Certificate(ISS_ACTUATOR_BICONVEX, 2, controller, x1 ** 2 + x2 ** 2, alphas,
                       exo_dim=1)


@pytest.fixture
def tight_model(system):
    """Ellipsoid centered on the true pair"""
    abar = 1e4 * np.eye(5)
    return EllipsoidModel(abar, -abar @ system.AB.T)


def test_closed_loop_trace(system, gas_certificate):
    traj = simulate_closed_loop(system, gas_certificate, x0=[1.0, -1.0], horizon=1.0,
                                step=0.001)
    assert not traj.diverged
    assert traj.exogenous.shape == (len(traj.times), 0)
    assert np.linalg.norm(traj.states[-1]) < np.linalg.norm(traj.states[0])
    trace = dissipation_trace(traj, system, gas_certificate)
    assert trace.passed()
    assert trace.min_margin >= -1e-9
    assert trace.to_csv().splitlines()[0] == 't,Vdot,bound,margin'


def test_energy_consistency(system, gas_certificate):
    traj = simulate_closed_loop(system, gas_certificate, x0=[1.0, -1.0], horizon=0.5,
                                step=0.001)
    energy = energy_consistency(traj, system, gas_certificate)
    assert energy['step'] == pytest.approx(0.001)
    assert energy['tolerance'] == pytest.approx(1e-2 * (1.0 + energy['scale']))
    assert energy['passed']
    assert energy['max_error'] <= 1e-3 * (1.0 + energy['scale'])


def test_closed_loop_needs_x0(system, gas_certificate):
    with pytest.raises(ConfigException):
        simulate_closed_loop(system, gas_certificate)


def test_closed_loop_dimension_mismatch(system, x1):
    cert = Certificate(GAS, 2, [x1, x1], x1 ** 2, {'alpha3': ClassKInfty([1.0])})
    with pytest.raises(DimensionError):
        simulate_closed_loop(system, cert, x0=[1.0, 1.0])


def test_actuator_disturbance_recorded(system, weak_certificate):
    traj = simulate_closed_loop(system, weak_certificate,
                                SignalSpec('interpolated_uniform_ball', radius=0.5),
                                x0=[1.0, 1.0], horizon=1.0, step=0.01, seed=5)
    assert traj.exogenous.shape == (len(traj.times), 1)
    assert np.all(np.abs(traj.exogenous) <= 0.5)
    applied = traj.inputs - np.array([[p.evaluate(x) for p in weak_certificate.k]
                                      for x in traj.states])
    np.testing.assert_allclose(applied, traj.exogenous, atol=1e-12)


def test_trace_violation_counting():
    trace = DissipationTrace([0.0, 1.0, 2.0], [-1.0, 0.5, -2.0], [-0.5, 0.0, -2.0])
    np.testing.assert_allclose(trace.margin, [0.5, -0.5, 0.0])
    assert trace.violations() == 1
    assert not trace.passed()
    assert trace.min_margin == -0.5


def test_trace_tolerance_is_absolute():
    trace = DissipationTrace([0.0, 1.0], [1000.0, -3.0], [999.9995, -3.0])
    assert trace.min_margin == pytest.approx(-5e-4)
    assert trace.violations() == 1
    assert not trace.passed()
    assert trace.passed(relative=True)
    np.testing.assert_allclose(trace.tolerances(), [1e-6, 1e-6])


def test_trace_csv_carries_config_hash():
    trace = DissipationTrace([0.0], [-1.0], [-0.5])
    lines = trace.to_csv(config_hash='abc123').splitlines()
    assert lines[:2] == ['# config_hash abc123', 't,Vdot,bound,margin']
    assert lines[2] == '0,-1,-0.5,0.5'


def test_robust_exact_pair(gas_certificate, base_library, system):
    report = robust_sample_check(gas_certificate, None, base_library, n_points=200,
                                 AB=system.AB)
    assert report.passed
    assert report.counted
    assert report.samples == 200
    assert report.worst_margin >= -1e-9


def test_robust_needs_model_or_pair(gas_certificate, base_library):
    with pytest.raises(ConfigException):
        robust_sample_check(gas_certificate, None, base_library)


def test_robust_detects_violation(weak_certificate, base_library, tight_model):
    report = robust_sample_check(weak_certificate, tight_model, base_library, n_points=500,
                                 n_upsilons=2)
    assert report.samples == 1000
    assert report.violations > 0
    assert not report.passed


def test_robust_relative_tolerance_is_looser(weak_certificate, base_library, tight_model):
    absolute = robust_sample_check(weak_certificate, tight_model, base_library, n_points=300)
    relative = robust_sample_check(weak_certificate, tight_model, base_library, n_points=300,
                                   relative=True)
    assert relative.worst_margin == absolute.worst_margin
    assert relative.violations <= absolute.violations
    assert relative.to_dict()['relative'] is True
    assert absolute.to_dict()['relative'] is False


def test_robust_outside_ellipsoid_not_counted(weak_certificate, base_library, tight_model):
    report = robust_sample_check(weak_certificate, tight_model, base_library, n_points=200,
                                 upsilon_norm=2.0)
    assert report.violations > 0
    assert not report.counted
    assert report.passed
    assert report.to_dict()['counted'] is False


def test_missing_alpha3(base_library, system, x1, x2):
    cert = Certificate(GAS, 2, [x1], x1 ** 2, {})
    with pytest.raises(CertificateRejectedException):
        robust_sample_check(cert, None, base_library, AB=system.AB)


def test_b_function_identity(x1, x2):
    zhat = [x1, x2]
    z = PolyMatrix.column(zhat)
    b = b_function(zhat, np.eye(2), z @ z.T)
    assert b.max_abs_difference((x1 ** 2 + x2 ** 2) ** 2) < 1e-12


def test_comparator(x1, x2):
    assert comparator([x1, x2], 4).max_abs_difference((x1 ** 2 + x2 ** 2) ** 2) == 0.0
    sixth = comparator([x1 ** 2, x2 ** 2], 6)
    assert sixth.max_abs_difference(x1 ** 6 + x2 ** 6) == 0.0


def test_pd_ru_sos(x1, x2, solver_config):
    zhat = [x1, x2]
    z = PolyMatrix.column(zhat)
    report = check_pd_ru(zhat, np.diag([1.0, 2.0]), z @ z.T, solver_config)
    assert report.passed
    assert report.method == SOS_SUFFICIENT
    assert report.conclusive
    assert report.eps >= 1e-6


def test_pd_ru_negative(x1, x2, solver_config):
    zhat = [x1, x2]
    z = PolyMatrix.column(zhat)
    report = check_pd_ru(zhat, np.eye(2), -(z @ z.T), solver_config)
    assert not report.passed
    assert report.method == SAMPLING_FALLBACK
    assert not report.conclusive


def test_pd_ru_zero(x1, x2):
    report = check_pd_ru([x1, x2], np.eye(2), PolyMatrix.zeros(2, 2, 2))
    assert not report.passed


def test_pd_ru_rejects_indefinite_p(x1, x2):
    z = PolyMatrix.column([x1, x2])
    with pytest.raises(CertificateRejectedException):
        check_pd_ru([x1, x2], np.diag([1.0, -1.0]), z @ z.T)


def test_sontag_redesign(system, base_library, controller, x1, x2):
    V = x1 ** 2 + x2 ** 2
    redesigned = sontag_redesign(system.AB, base_library, controller, V)
    expected = controller[0] - 2.0 * x2 * (x1 ** 4 + x2 ** 4)
    assert redesigned[0].max_abs_difference(expected) < 1e-12
    with pytest.raises(DimensionError):
        sontag_redesign(system.AB[:, :4], base_library, controller, V)


def test_robust_pass_implies_true_trace_pass(system, base_library, tight_model, controller,
                                              x1, x2):
    alphas = {'alpha1': ClassKInfty([1.0]), 'alpha2': ClassKInfty([1.0]),
              'alpha3': ClassKInfty([0.0, 0.5])}
    cert = Certificate(GAS, 2, controller, x1 ** 2 + x2 ** 2, alphas)
    assert membership_ellipsoid(system.AB, tight_model)
    robust = robust_sample_check(cert, tight_model, base_library, n_points=500)
    assert robust.passed
    assert robust.worst_margin >= -robust.tol
    for x0 in ([1.0, -1.0], [-2.0, 0.5], [0.3, 2.5]):
        traj = simulate_closed_loop(system, cert, x0=x0, horizon=1.0, step=0.005)
        trace = dissipation_trace(traj, system, cert)
        assert trace.passed()
        assert trace.min_margin >= -robust.tol
