import json

import numpy as np
import pytest

from ..certificate import (GAS, ISS_ACTUATOR_CONVEX, Certificate, SosCertificate, SosReport)
from ..comparison import ClassKInfty, MatrixClassKInfty
from ..polynomial import Polynomial


@pytest.fixture
def gram():
    return SosCertificate([[1.0, 0.5], [0.5, 1.0]], [(0, (1, 0)), (0, (0, 1))], 2,
                          label='dissipation')


@pytest.fixture
def certificate(gram):
    x1 = Polynomial.variable(0, 2)
    x2 = Polynomial.variable(1, 2)
    reports = [SosReport('dissipation', 1e-9, 1e-6, 0.5), SosReport('lambda', 0.0, 1e-6, 0.1)]
    return Certificate(
        ISS_ACTUATOR_CONVEX, 2, [-x2 ** 3], x1 ** 2 + x2 ** 2,
        {'alpha1': ClassKInfty([1.0]), 'alpha2': ClassKInfty([1.0])}, exo_dim=1,
        multipliers={'P': np.eye(2), 'eta': 0.5,
                     'Gamma': MatrixClassKInfty([np.eye(1)], label='Gamma')},
        sos_reports=reports, grams={'dissipation': gram}, dataset_hash='abc')


def test_gram_expand(gram):
    poly = gram.expand()[0, 0]
    assert poly.coefficient((2, 0)) == 1.0
    assert poly.coefficient((1, 1)) == 1.0
    assert gram.min_eigenvalue() == pytest.approx(0.5)


def test_gram_restricted(gram):
    small = gram.restricted([1])
    assert small.basis == [(0, (0, 1))]
    np.testing.assert_allclose(small.gram, [[1.0]])


def test_report_pass_fail():
    assert SosReport('x', 1e-7, 1e-6, 0.0).passed
    assert not SosReport('x', 1e-3, 1e-6, 0.0).passed
    assert not SosReport('x', 0.0, 1e-6, -1e-3).passed


def test_certificate_properties(certificate):
    assert certificate.passed
    assert certificate.is_convex
    assert certificate.nvars == 3
    assert certificate.channel == 'actuator'
    np.testing.assert_allclose(certificate.controller([0.0, 2.0]), [-8.0])
    assert certificate.alpha(3) is None


def test_failed_report(certificate):
    certificate.sos_reports.append(SosReport('alpha3', 1.0, 1e-6, 0.0))
    assert not certificate.passed
    assert [r.label for r in certificate.failed_reports()] == ['alpha3']


def test_summary(certificate):
    text = certificate.summary_text()
    assert text.startswith('iss_actuator_convex certificate')
    assert '2/2 PASS' in text
    names = [name for name, _ in certificate.summary()]
    assert names[:2] == ['k', 'V']
    assert 'eta' in names and 'P' in names
    assert 'config_hash' not in text
    certificate.config_hash = 'f00d'
    assert certificate.summary_text().splitlines()[1] == 'config_hash f00d'


def test_dict_survives_json(certificate):
    data = json.loads(json.dumps(certificate.to_dict()))
    copy = Certificate.from_dict(data)
    assert copy.kind == ISS_ACTUATOR_CONVEX
    assert copy.V.max_abs_difference(certificate.V) == 0.0
    np.testing.assert_allclose(copy.multipliers['P'], np.eye(2))
    assert copy.multipliers['eta'] == 0.5
    assert isinstance(copy.multipliers['Gamma'], MatrixClassKInfty)
    assert copy.grams['dissipation'].basis == certificate.grams['dissipation'].basis
    assert copy.dataset_hash == 'abc'
    assert copy.passed


def test_unknown_kind():
    with pytest.raises(ValueError):
        Certificate('lqr', 1, [], Polynomial.zero(1), {})


def test_gas_has_no_channel():
    cert = Certificate(GAS, 1, [], Polynomial.zero(1), {})
    assert cert.channel is None
    assert not cert.is_convex
