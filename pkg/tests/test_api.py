import json
import os

import pytest

from isscert.api import (MODEL_JSON, PROGRAM_ORDER, REPORT_CSV, REPORT_TXT, ExperimentConfig,
                         Pipeline, decision_coefficients, default_experiment)
from isscert.data import DATASET_CSV
from isscert.exceptions import ConfigException, ProvenanceException
from isscert.models import Certificate, Polynomial
from isscert.models.certificate import GAS


@pytest.fixture
def config_dict(experiment):
    return experiment.to_dict()


@pytest.fixture
def pipeline(experiment):
    return Pipeline(experiment)


def test_default_experiment(experiment):
    assert experiment.seed == 1
    assert experiment.n == 2
    assert experiment.samples == 50
    assert experiment.delta == 1.0
    assert set(experiment.libraries) == {'base', 'actuator', 'process'}
    assert experiment.library('actuator').has_factorization()
    assert experiment.synth_config('iss-d-convex').gamma_structure == 'scalar'
    assert experiment.synth_config('gas').initial_k is not None


@pytest.mark.parametrize('change', [
    {'seed': None},
    {'system': None, 'dataset': None},
    {'samples': 0},
    {'delta': -1.0},
    {'colour': 'blue'},
])
def test_config_rejects(config_dict, change):
    config_dict.update(change)
    with pytest.raises(ConfigException):
        ExperimentConfig(config_dict)


def test_missing_library(experiment):
    with pytest.raises(ConfigException):
        experiment.library('quartic')


def test_hash_ignores_output_dir(experiment):
    moved = experiment.with_overrides(output_dir='/tmp/elsewhere')
    assert moved.hash == experiment.hash
    assert experiment.with_overrides(seed=2).hash != experiment.hash


def test_load(tmpdir, config_dict):
    path = tmpdir.join('experiment.json')
    path.write(json.dumps(config_dict))
    loaded = ExperimentConfig.load(str(path))
    assert loaded.hash == ExperimentConfig(config_dict).hash
    bad = tmpdir.join('bad.json')
    bad.write('{seed: 1')
    with pytest.raises(ConfigException):
        ExperimentConfig.load(str(bad))
    with pytest.raises(ConfigException):
        ExperimentConfig.load(str(tmpdir.join('missing.json')))


def test_collect_writes_dataset(pipeline):
    dataset = pipeline.collect()
    assert os.path.isfile(os.path.join(pipeline.out, DATASET_CSV))
    loaded = pipeline.load_dataset()
    assert loaded.T == dataset.T
    assert loaded.metadata['config_hash'] == pipeline.config.hash


def test_dataset_provenance(pipeline, experiment):
    pipeline.collect()
    other = Pipeline(experiment.with_overrides(seed=7))
    with pytest.raises(ProvenanceException):
        other.load_dataset()


def test_collect_needs_experiments(config_dict):
    config_dict['experiments'] = []
    with pytest.raises(ConfigException):
        Pipeline(ExperimentConfig(config_dict)).collect()


def test_unknown_program(pipeline):
    with pytest.raises(ConfigException):
        pipeline.synth('lqr')


def test_empty_report(pipeline):
    with pytest.raises(ConfigException):
        pipeline.report()


def test_certificate_provenance(pipeline, experiment):
    x1 = Polynomial.variable(0, 2)
    cert = Certificate(GAS, 2, [-x1], x1 * x1, {}, config_hash='stale')
    path = pipeline.certificate_uri('gas')
    os.makedirs(os.path.dirname(path))
    with open(path, 'w') as f:
        f.write(json.dumps(cert.to_dict()))
    with pytest.raises(ProvenanceException):
        pipeline.load_certificate('gas')


def test_partial_report(pipeline):
    x1 = Polynomial.variable(0, 2)
    cert = Certificate(GAS, 2, [-x1], x1 * x1, {}, config_hash=pipeline.config.hash)
    path = pipeline.certificate_uri('gas')
    os.makedirs(os.path.dirname(path))
    with open(path, 'w') as f:
        f.write(json.dumps(cert.to_dict()))
    rows = pipeline.report()
    assert [row['program'] for row in rows] == list(PROGRAM_ORDER)
    assert rows[0]['coefficients'] == 36
    assert rows[0]['status'] == '-'
    assert all(row['coefficients'] == '-' for row in rows[1:])
    lines = open(os.path.join(pipeline.out, REPORT_CSV)).read().splitlines()
    assert lines[0] == '# config_hash {}'.format(pipeline.config.hash)
    assert lines[1].startswith('program,coefficients')
    assert len(lines) == 2 + len(PROGRAM_ORDER)


def test_decision_coefficients():
    x1 = Polynomial.variable(0, 2)
    cert = Certificate(GAS, 2, [-x1], x1 * x1, {},
                       config={'v_degree': [2, 4], 'k_degree': [1, 3], 'lambda_degree': [0, 4]})
    # lambda: 15, V: 12, k: 9
    assert decision_coefficients(cert) == 15 + 12 + 9


@pytest.mark.slow
def test_full_pipeline(tmpdir):
    pipeline = Pipeline(default_experiment(str(tmpdir), seed=1))
    pipeline.collect()
    model, rank = pipeline.overapprox()
    assert rank['full_row_rank']
    assert os.path.isfile(str(tmpdir.join(MODEL_JSON)))
    assert pipeline.load_model().content_hash() == model.content_hash()
    cert = pipeline.synth('iss-w-convex')
    assert cert.config_hash == pipeline.config.hash
    assert os.path.isfile(str(tmpdir.join('certificates', 'iss-w-convex.txt')))
    result = pipeline.verify('iss-w-convex')
    assert result['passed']
    assert result['robust']['violations'] == 0
    assert os.path.isfile(str(tmpdir.join('traces', 'iss-w-convex.csv')))
    assert tmpdir.join('traces', 'iss-w-convex.csv').read().startswith('# config_hash')
    rows = {row['program']: row for row in pipeline.report()}
    assert set(rows) == set(PROGRAM_ORDER)
    assert rows['iss-w-convex']['status'] == 'PASS'
    assert rows['gas']['status'] == '-'
    table = tmpdir.join(REPORT_TXT).read().splitlines()
    assert table[0] == '# config_hash {}'.format(pipeline.config.hash)
    assert table[1].split()[0] == 'program'
    csv_lines = tmpdir.join(REPORT_CSV).read().splitlines()
    assert csv_lines[2 + PROGRAM_ORDER.index('iss-w-convex')].startswith('iss-w-convex,')
