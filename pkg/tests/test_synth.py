import numpy as np
import pytest

from isscert.api import PROCESS_LIBRARY, Pipeline, default_experiment
from isscert.exceptions import ConfigException
from isscert.models import Certificate, Polynomial, PolyMatrix
from isscert.models.certificate import (GAS, ISS_ACTUATOR_CONVEX, ISS_PROCESS_BICONVEX,
                                        ISS_PROCESS_CONVEX, MODEL_BASED)
from isscert.synth import (SynthConfig, freeze_exogenous, synth_gas, synth_iss_actuator_convex,
                           synth_iss_process_convex, synth_modelbased_convex)
from isscert.synth.convex import default_xi


@pytest.fixture
def x1():
    return Polynomial.variable(0, 2)


def test_config_defaults():
    config = SynthConfig()
    assert config.v_degree == (2, 4)
    assert config.lambda_state_only(True)
    assert not config.lambda_state_only(False)
    assert SynthConfig(lambda_x_only=False).lambda_state_only(True) is False


@pytest.mark.parametrize('options', [
    {'v_degree': (1, 4)},
    {'v_degree': (2, 3)},
    {'k_degree': (0, 3)},
    {'lambda_degree': (0, 3)},
    {'mu': 0.0},
    {'theta_mode': 'exact'},
    {'gamma_structure': 'diagonal'},
    {'feasibility_mode': 'lazy'},
    {'max_rounds': 0},
    {'alpha_terms': {'alpha3': 0}},
])
def test_config_rejects(options):
    with pytest.raises(ConfigException):
        SynthConfig(**options)


def test_config_rejects_constant_controller():
    with pytest.raises(ConfigException):
        SynthConfig(initial_k=[Polynomial.constant(1.0, 2)])


def test_config_dict(x1):
    xi = PolyMatrix([[x1 * x1]])
    config = SynthConfig(xi=xi, initial_k=[-x1], gamma_terms=2)
    copy = SynthConfig.from_dict(config.to_dict())
    assert copy.gamma_terms == 2
    assert copy.xi.max_abs_difference(xi) == 0.0
    assert copy.initial_k[0].max_abs_difference(-x1) == 0.0
    with pytest.raises(ConfigException):
        SynthConfig.from_dict({'degree': 4})


def test_config_copy():
    config = SynthConfig()
    assert config.copy(max_rounds=5).max_rounds == 5
    with pytest.raises(ConfigException):
        config.copy(rounds=5)


def test_default_xi(actuator_library):
    xi = default_xi(actuator_library)
    assert xi.shape == (2, 2)
    assert xi.is_symmetric()


def test_convex_needs_factorization(base_library):
    with pytest.raises(ConfigException):
        synth_iss_actuator_convex(None, base_library, SynthConfig())


def test_modelbased_needs_system(actuator_library):
    with pytest.raises(ConfigException):
        synth_modelbased_convex(None, actuator_library, SynthConfig())


def test_alternation_needs_initial_controller(base_library, x1):
    with pytest.raises(ConfigException):
        synth_gas(None, base_library, SynthConfig())
    with pytest.raises(ConfigException):
        synth_gas(None, base_library, SynthConfig(initial_k=[x1, x1]))


def test_freeze_needs_biconvex_iss(x1):
    cert = Certificate(GAS, 2, [x1], x1 * x1, {})
    with pytest.raises(ValueError):
        freeze_exogenous(cert, None, None)


@pytest.fixture(scope='module')
def fitted(tmpdir_factory):
    """Pipeline with the dataset and the ellipsoid of the built-in example"""
    config = default_experiment(str(tmpdir_factory.mktemp('synth')), seed=1)
    pipeline = Pipeline(config)
    pipeline.collect()
    pipeline.overapprox()
    return pipeline


@pytest.mark.slow
def test_convex_actuator(fitted):
    cert = fitted.synth('iss-w-convex')
    assert cert.kind == ISS_ACTUATOR_CONVEX
    assert cert.passed
    assert sorted(cert.alphas) == ['alpha1', 'alpha2', 'alpha3', 'alpha4']
    assert all(alpha.is_valid() for alpha in cert.alphas.values())
    assert cert.stats['pd_ru']['passed']
    assert np.linalg.eigvalsh(cert.multipliers['P'])[0] > 0
    assert cert.multipliers['eta'] >= 1e-4 - 1e-9
    assert all(p.evaluate(np.zeros(2)) == 0.0 for p in cert.k)
    assert cert.V.evaluate(np.zeros(2)) == 0.0


@pytest.mark.slow
def test_gas(fitted):
    cert = fitted.synth('gas')
    assert cert.kind == GAS
    assert cert.passed
    assert cert.stats['rounds'] >= 1
    assert 'alpha4' not in cert.alphas
    assert cert.stats['history'][0]['status'] == 'verified'


@pytest.mark.slow
def test_biconvex_actuator_freezes_to_gas(fitted):
    cert = fitted.synth('iss-w-biconvex')
    assert cert.passed
    assert cert.exo_dim == 1
    frozen = freeze_exogenous(cert, fitted.load_model(), fitted.config.library('base'))
    assert frozen.kind == GAS
    assert frozen.passed


@pytest.mark.slow
def test_model_based(fitted):
    cert = fitted.synth('model-based')
    assert cert.kind == MODEL_BASED
    assert cert.passed
    assert 'lambda' not in cert.multipliers


def _check_convex(cert, kind):
    assert cert.kind == kind
    assert cert.passed
    assert cert.stats['pd_ru']['passed']
    assert sorted(cert.alphas) == ['alpha1', 'alpha2', 'alpha3', 'alpha4']
    assert all(alpha.is_valid() for alpha in cert.alphas.values())
    assert np.linalg.eigvalsh(cert.multipliers['P'])[0] > 0
    assert all(p.evaluate(np.zeros(2)) == 0.0 for p in cert.k)


@pytest.mark.slow
def test_convex_process(fitted):
    cert = fitted.synth('iss-d-convex')
    _check_convex(cert, ISS_PROCESS_CONVEX)
    assert cert.exo_dim == 2
    for c in cert.multipliers['Gamma'].matrices:
        np.testing.assert_allclose(c, c[0, 0] * np.eye(2), atol=1e-9)


@pytest.mark.slow
def test_convex_process_gamma_hat(fitted):
    config = fitted.config.synth_config('iss-d-convex').copy(theta_mode='gamma_hat')
    cert = synth_iss_process_convex(fitted.load_model(), fitted.config.library(PROCESS_LIBRARY),
                                    config)
    _check_convex(cert, ISS_PROCESS_CONVEX)
    assert cert.multipliers['eta'] == 1.0


@pytest.mark.slow
def test_biconvex_process_freezes_to_gas(fitted):
    cert = fitted.synth('iss-d-biconvex')
    assert cert.kind == ISS_PROCESS_BICONVEX
    assert cert.passed
    assert cert.exo_dim == 2
    assert all(alpha.is_valid() for alpha in cert.alphas.values())
    frozen = freeze_exogenous(cert, fitted.load_model(), fitted.config.library('base'))
    assert frozen.kind == GAS
    assert frozen.passed
    assert frozen.stats['frozen_from'] == ISS_PROCESS_BICONVEX
    assert all(alpha.is_valid() for alpha in frozen.alphas.values())
