import json
import os

import pytest

from isscert import cli
from isscert.api import Pipeline, default_experiment
from isscert.exceptions import (CertificateRejectedException, InfeasibleException,
                                SolverException)


@pytest.fixture
def out(tmpdir):
    return str(tmpdir.join('out'))


def test_parser_requires_command():
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args([])


def test_parser_rejects_unknown_program():
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(['synth', 'lqr'])


def test_overrides(out):
    args = cli.build_parser().parse_args(['collect', '--seed', '9', '--out', out])
    config = cli.load_config(args)
    assert config.seed == 9
    assert config.output_dir == out


def test_collect(out, capsys):
    assert cli.main(['collect', '--out', out]) == cli.EXIT_OK
    assert os.path.isfile(os.path.join(out, 'dataset.csv'))
    assert 'dataset: 50 samples' in capsys.readouterr().out


def test_config_file(tmpdir, out):
    path = tmpdir.join('experiment.json')
    path.write(json.dumps(default_experiment(out, seed=4).to_dict()))
    assert cli.main(['collect', '--config', str(path)]) == cli.EXIT_OK
    meta = json.loads(open(os.path.join(out, 'dataset.json')).read())
    assert meta['seed'] == 4


def test_bad_config(tmpdir):
    path = tmpdir.join('experiment.json')
    path.write(json.dumps({'seed': 1}))
    assert cli.main(['collect', '--config', str(path)]) == cli.EXIT_CONFIG
    assert cli.main(['collect', '--config', str(tmpdir.join('nope.json'))]) == cli.EXIT_CONFIG


def test_missing_model(out):
    assert cli.main(['synth', 'gas', '--out', out]) == cli.EXIT_CONFIG


def test_empty_report(out):
    assert cli.main(['report', '--out', out]) == cli.EXIT_CONFIG


@pytest.mark.parametrize('error, code', [
    (InfeasibleException('no certificate', diagnostics=['dissipation']), cli.EXIT_INFEASIBLE),
    (SolverException('stalled'), cli.EXIT_INFEASIBLE),
    (CertificateRejectedException('b is not positive'), cli.EXIT_REJECTED),
])
def test_exit_codes(monkeypatch, out, error, code):
    def fail(self, program):
        raise error

    monkeypatch.setattr(Pipeline, 'synth', fail)
    assert cli.main(['synth', 'iss-w-convex', '--out', out]) == code


def test_failed_verification(monkeypatch, out):
    monkeypatch.setattr(Pipeline, 'verify', lambda self, program: {'passed': False})
    assert cli.main(['verify', 'gas', '--out', out]) == cli.EXIT_REJECTED
