import copy
import json
import logging

import numpy as np

from . import settings
from .aws.s3 import file_exists, file_to_str, join_uri, str_to_file
from .consistency import build_sample_quadrics, rank_check, solve_overapproximation
from .data import DATASET_CSV, load_dataset, run_experiment, save_dataset
from .decorators import timed
from .exceptions import ConfigException, ProvenanceException
from .models import (Certificate, EllipsoidModel, FunctionLibrary, Polynomial, PolyMatrix,
                     SignalSpec, TrueSystem)
from .poly import count_coefficients
from .sdp import SolverConfig
from .synth import (SynthConfig, synth_gas, synth_iss_actuator_biconvex,
                    synth_iss_actuator_convex, synth_iss_process_biconvex,
                    synth_iss_process_convex, synth_modelbased_convex)
from .utils import config_hash, to_jsonable
from .verify import dissipation_trace, energy_consistency, robust_sample_check, \
    simulate_closed_loop

logger = logging.getLogger(__name__)

MODEL_JSON = 'model.json'
REPORT_TXT = 'report.txt'
REPORT_CSV = 'report.csv'

BASE = 'base'
ACTUATOR_LIBRARY = 'actuator'
PROCESS_LIBRARY = 'process'

# program name -> (synthesis function, library key)
PROGRAMS = {
    'gas': (synth_gas, BASE),
    'iss-w-biconvex': (synth_iss_actuator_biconvex, BASE),
    'iss-d-biconvex': (synth_iss_process_biconvex, BASE),
    'iss-w-convex': (synth_iss_actuator_convex, ACTUATOR_LIBRARY),
    'iss-d-convex': (synth_iss_process_convex, PROCESS_LIBRARY),
    'model-based': (synth_modelbased_convex, ACTUATOR_LIBRARY),
}
PROGRAM_ORDER = ('gas', 'iss-w-biconvex', 'iss-d-biconvex', 'iss-w-convex', 'iss-d-convex',
                 'model-based')

DEFAULT_VERIFY = {
    'x0': None,
    'horizon': 10.0,
    'step': settings.INTEGRATION_STEP,
    'disturbance': {'kind': 'interpolated_uniform_ball', 'radius': 1.0,
                    'knot_spacing': settings.KNOT_SPACING},
    'n_points': settings.SAMPLE_POINTS,
    'n_upsilons': 1,
    'radius_x': settings.SAMPLE_RADIUS_X,
    'radius_exo': settings.SAMPLE_RADIUS_EXO,
    'upsilon_norm': 1.0,
}

KNOWN_KEYS = ('seed', 'system', 'dataset', 'delta', 'samples', 'horizon', 'step',
              'experiments', 'noise', 'libraries', 'synth', 'verify', 'solver', 'output_dir')


class ExperimentConfig(object):
    """Everything a pipeline run depends on, read from one JSON document

    Exactly one of ``system`` (ground truth to simulate) or ``dataset`` (path to
    an existing dataset CSV) drives the data stage; ``seed`` is mandatory.
    """

    def __repr__(self):
        return '<ExperimentConfig - seed {}, out {}>'.format(self.seed, self.output_dir)

    def __init__(self, data):
        data = copy.deepcopy(data)
        unknown = set(data) - set(KNOWN_KEYS)
        if unknown:
            raise ConfigException('Unknown experiment keys: {}'.format(
                ', '.join(sorted(unknown))))
        if data.get('seed') is None:
            raise ConfigException('The experiment configuration needs a seed')
        if data.get('system') is None and data.get('dataset') is None:
            raise ConfigException('The experiment needs a system spec or a dataset path')
        self.data = data
        self.seed = int(data['seed'])
        self.output_dir = data.get('output_dir') or 'out'
        self.delta = float(data.get('delta', 1.0))
        self.samples = int(data.get('samples', 50))
        self.horizon = float(data.get('horizon', settings.HORIZON))
        self.step = float(data.get('step', settings.INTEGRATION_STEP))
        if self.samples < 1:
            raise ConfigException('samples must be at least 1, got {}'.format(self.samples))
        if self.delta <= 0:
            raise ConfigException('delta must be positive')
        self.dataset_uri = data.get('dataset')
        self.system = TrueSystem.from_dict(data['system']) if data.get('system') else None
        self.experiments = [
            {'x0': np.asarray(exp['x0'], dtype=float),
             'input': SignalSpec.from_dict(exp.get('input'))}
            for exp in data.get('experiments', [])]
        self.noise = SignalSpec.from_dict(data.get('noise'))
        self.libraries = {name: FunctionLibrary.from_dict(lib)
                          for name, lib in (data.get('libraries') or {}).items()}
        if self.system is not None:
            self.libraries.setdefault(BASE, self.system.library)
        if BASE not in self.libraries:
            raise ConfigException('Without a system spec, libraries.base is required')
        self.solver = SolverConfig.from_dict(data.get('solver'))
        self.verify_options = dict(DEFAULT_VERIFY)
        self.verify_options.update(data.get('verify') or {})

    @classmethod
    def load(cls, uri):
        try:
            data = json.loads(file_to_str(uri))
        except ValueError as e:
            raise ConfigException('Malformed configuration {}: {}'.format(uri, e))
        except IOError as e:
            raise ConfigException('Cannot read configuration {}: {}'.format(uri, e))
        return cls(data)

    def with_overrides(self, seed=None, output_dir=None):
        data = copy.deepcopy(self.data)
        if seed is not None:
            data['seed'] = seed
        if output_dir is not None:
            data['output_dir'] = output_dir
        return ExperimentConfig(data)

    @property
    def hash(self):
        return config_hash(self.to_dict())

    @property
    def n(self):
        return self.libraries[BASE].n

    def library(self, key):
        if key not in self.libraries:
            raise ConfigException('No {} library (with zhat and H) in the configuration'.format(
                key))
        return self.libraries[key]

    def synth_config(self, program):
        options = dict((self.data.get('synth') or {}).get(program) or {})
        options.setdefault('solver', self.solver.to_dict())
        return SynthConfig.from_dict(options, nvars=self.n)

    def to_dict(self):
        return to_jsonable(self.data)


def default_experiment(output_dir='out', seed=1):
    """Two-state cubic system with one input, 50 noisy samples and delta = 1

    Drift library (x1^3, x1^2 x2, x1 x2^2, x2^3), W = 1, x(0) = (2, -2), a
    Gaussian interpolated input and measurement noise uniform in the unit
    ball. The convex programs use zhat = (x1, x2) for actuator and
    zhat = (x1^2, x2^2) for process disturbances.
    """
    Z = [Polynomial.monomial(exps) for exps in ((3, 0), (2, 1), (1, 2), (0, 3))]
    W = PolyMatrix([[Polynomial.constant(1.0, 2)]], 2)
    x1, x2 = Polynomial.variable(0, 2), Polynomial.variable(1, 2)
    zero = Polynomial.zero(2)
    base = FunctionLibrary(Z, W)
    actuator = FunctionLibrary(
        Z, W, [x1, x2],
        PolyMatrix([[x1 * x1, zero], [x1 * x2, zero], [zero, x1 * x2], [zero, x2 * x2]], 2))
    process = FunctionLibrary(
        Z, W, [x1 * x1, x2 * x2],
        PolyMatrix([[x1, zero], [x2, zero], [zero, x1], [zero, x2]], 2))
    system = TrueSystem([[-1.0, 0.0, 1.0, 0.0], [0.0, -1.0, 1.0, 0.0]], [[0.0], [1.0]], base)
    initial_k = [Polynomial.monomial((0, 3), -1.0) + Polynomial.monomial((1, 2), -1.0)]
    biconvex = SynthConfig(v_degree=(2, 4), k_degree=(1, 3), lambda_degree=(0, 4),
                           initial_k=initial_k, max_rounds=3).to_dict()
    convex_actuator = SynthConfig(lambda_degree=(0, 4), y_degree=2).to_dict()
    xi_process = PolyMatrix([[x1 * x1, zero], [zero, x2 * x2]], 2)
    convex_process = SynthConfig(lambda_degree=(0, 4), y_degree=2, xi=xi_process,
                                 gamma_structure='scalar', gamma_terms=0).to_dict()
    return ExperimentConfig({
        'seed': seed,
        'system': system.to_dict(),
        'dataset': None,
        'delta': 1.0,
        'samples': 50,
        'horizon': settings.HORIZON,
        'step': settings.INTEGRATION_STEP,
        'experiments': [{'x0': [2.0, -2.0],
                         'input': SignalSpec('interpolated_gaussian', 0.0, 1.0).to_dict()}],
        'noise': SignalSpec('interpolated_uniform_ball', radius=1.0).to_dict(),
        'libraries': {ACTUATOR_LIBRARY: actuator.to_dict(), PROCESS_LIBRARY: process.to_dict()},
        'synth': {
            'gas': biconvex,
            'iss-w-biconvex': biconvex,
            'iss-d-biconvex': biconvex,
            'iss-w-convex': convex_actuator,
            'iss-d-convex': convex_process,
            'model-based': convex_actuator,
        },
        'verify': dict(DEFAULT_VERIFY, x0=[2.0, -2.0]),
        'output_dir': output_dir,
    })


def decision_coefficients(cert):
    """Number of coefficients of the decision polynomials of a certificate's program"""
    config = cert.config or {}
    n, m = cert.n, len(cert.k)
    lam_nvars = n if cert.is_convex else cert.nvars
    lam = config.get('lambda_degree', [0, 4])
    total = 0 if cert.kind == 'model_based' else count_coefficients(lam_nvars, lam[1], lam[0])
    if cert.is_convex:
        y = config.get('y_degree', 2)
        P = cert.multipliers.get('P')
        nhat = P.shape[0] if P is not None else n
        return total + m * nhat * count_coefficients(n, y)
    v = config.get('v_degree', [2, 4])
    k = config.get('k_degree', [1, 3])
    return total + count_coefficients(n, v[1], v[0]) + m * count_coefficients(n, k[1], k[0])


class Pipeline(object):
    """Stages collect -> overapprox -> synth -> verify -> report over one output directory"""

    def __repr__(self):
        return '<Pipeline - {}>'.format(self.config.output_dir)

    def __init__(self, config):
        """Instantiate a new Pipeline

        Args:
            config (ExperimentConfig): experiment definition; output_dir may be
                a local directory or an s3:// prefix
        """
        self.config = config

    @property
    def out(self):
        return self.config.output_dir

    def _uri(self, *parts):
        uri = self.out
        for part in parts:
            uri = join_uri(uri, part)
        return uri

    def certificate_uri(self, program):
        return self._uri('certificates', '{}.json'.format(program))

    def _check_program(self, program):
        if program not in PROGRAMS:
            raise ConfigException('Unknown program {}; expected one of {}'.format(
                program, ', '.join(PROGRAM_ORDER)))

    @timed
    def collect(self):
        """Simulate the configured experiments and write dataset CSV and metadata

        Returns:
            Dataset
        """
        config = self.config
        if config.system is None:
            raise ConfigException('collect needs a system spec')
        if config.dataset_uri is not None:
            raise ConfigException('collect needs a system spec, not a dataset path')
        if not config.experiments:
            raise ConfigException('collect needs at least one experiment')
        dataset = run_experiment(config.system, config.experiments, config.delta,
                                 config.samples, config.horizon, config.step, config.seed,
                                 config.noise)
        dataset.metadata['config_hash'] = config.hash
        uri = save_dataset(dataset, self.out)
        logger.info('Wrote %d samples to %s', dataset.T, uri)
        return dataset

    def load_dataset(self):
        if self.config.dataset_uri is not None:
            return load_dataset(self.config.dataset_uri)
        dataset = load_dataset(self._uri(DATASET_CSV))
        recorded = dataset.metadata.get('config_hash')
        if recorded is not None and recorded != self.config.hash:
            raise ProvenanceException('Dataset was produced by config {}, not {}'.format(
                recorded, self.config.hash))
        return dataset

    @timed
    def overapprox(self):
        """Rank check, then the max-det ellipsoid of the data-consistent pairs

        Returns:
            (EllipsoidModel, dict from rank_check)
        """
        dataset = self.load_dataset()
        library = self.config.library(BASE)
        rank = rank_check(dataset, library)
        logger.info('Rank check: %s', 'full row rank' if rank['full_row_rank']
                    else 'rank deficient')
        model = solve_overapproximation(build_sample_quadrics(dataset, library),
                                        self.config.solver, dataset.content_hash())
        model.stats.update({'config_hash': self.config.hash, 'rank': rank})
        str_to_file(json.dumps(to_jsonable(model.to_dict()), indent=2, sort_keys=True),
                    self._uri(MODEL_JSON))
        return model, rank

    def load_model(self):
        model = EllipsoidModel.from_dict(json.loads(file_to_str(self._uri(MODEL_JSON))))
        recorded = (model.stats or {}).get('config_hash')
        if recorded is not None and recorded != self.config.hash:
            raise ProvenanceException('Model was produced by config {}, not {}'.format(
                recorded, self.config.hash))
        return model

    @timed
    def synth(self, program):
        """Run one synthesis program and write its certificate and summary

        Returns:
            Certificate
        """
        self._check_program(program)
        function, library_key = PROGRAMS[program]
        library = self.config.library(library_key)
        synth_config = self.config.synth_config(program)
        if program == 'model-based':
            if self.config.system is None:
                raise ConfigException('model-based needs the system spec')
            cert = function(self.config.system, library, synth_config)
        else:
            cert = function(self.load_model(), library, synth_config)
        cert.config_hash = self.config.hash
        cert.stats['program'] = program
        str_to_file(json.dumps(to_jsonable(cert.to_dict()), indent=2, sort_keys=True),
                    self.certificate_uri(program))
        str_to_file(cert.summary_text(), self._uri('certificates', '{}.txt'.format(program)))
        return cert

    def load_certificate(self, program):
        self._check_program(program)
        cert = Certificate.from_dict(json.loads(file_to_str(self.certificate_uri(program))))
        if cert.config_hash != self.config.hash:
            raise ProvenanceException(
                'Certificate {} was produced by config {}, not {}'.format(
                    program, cert.config_hash, self.config.hash))
        return cert

    @timed
    def verify(self, program):
        """Closed-loop dissipation trace, robust sampling and energy bookkeeping

        Returns:
            dict with the individual results and ``passed``
        """
        cert = self.load_certificate(program)
        options = self.config.verify_options
        _, library_key = PROGRAMS[program]
        library = self.config.library(library_key)
        seed = self.config.seed
        result = {'program': program, 'kind': cert.kind, 'sos_passed': cert.passed,
                  'config_hash': self.config.hash}
        passed = cert.passed
        system = self.config.system
        if system is not None:
            x0 = options.get('x0') or [1.0] * system.n
            trajectory = simulate_closed_loop(
                system, cert, SignalSpec.from_dict(options.get('disturbance')), x0,
                options['horizon'], options['step'], seed)
            trace = dissipation_trace(trajectory, system, cert)
            str_to_file(trace.to_csv(self.config.hash),
                        self._uri('traces', '{}.csv'.format(program)))
            energy = energy_consistency(trajectory, system, cert, trace)
            result.update({
                'trace': {'min_margin': trace.min_margin, 'violations': trace.violations(),
                          'passed': trace.passed(), 'diverged': trajectory.diverged},
                'energy': energy,
            })
            passed = passed and trace.passed() and energy['passed'] and not trajectory.diverged
        else:
            logger.warning('No system spec; skipping the closed-loop trace of %s', program)
        if program == 'model-based':
            if system is None:
                raise ConfigException('model-based verification needs the system spec')
            robust = robust_sample_check(
                cert, None, library, options['n_points'], options['n_upsilons'],
                options['radius_x'], options['radius_exo'], seed=seed, AB=system.AB)
        else:
            robust = robust_sample_check(
                cert, self.load_model(), library, options['n_points'], options['n_upsilons'],
                options['radius_x'], options['radius_exo'], options['upsilon_norm'], seed)
        result['robust'] = robust.to_dict()
        result['passed'] = bool(passed and robust.passed)
        str_to_file(json.dumps(to_jsonable(result), indent=2, sort_keys=True),
                    self._uri('verification', '{}.json'.format(program)))
        logger.info('%s verification: %s', program, 'PASS' if result['passed'] else 'FAIL')
        return result

    def report(self):
        """One row per program: problem size, time and worst verification margin

        Every program in PROGRAM_ORDER gets a row; stages it has not been
        through are marked with '-'.

        Returns:
            list of dict rows

        Raises:
            ConfigException: no program has a certificate or a verification
        """
        rows = []
        produced = 0
        for program in PROGRAM_ORDER:
            cert_uri = self.certificate_uri(program)
            check_uri = self._uri('verification', '{}.json'.format(program))
            row = {'program': program}
            rows.append(row)
            if file_exists(cert_uri):
                cert = Certificate.from_dict(json.loads(file_to_str(cert_uri)))
                programs = cert.stats.get('programs', [])
                row.update({
                    'coefficients': decision_coefficients(cert),
                    'variables': sum(p['variables'] for p in programs),
                    'scalar_constraints': sum(p['equalities'] for p in programs),
                    'sos_constraints': sum(p['sos_constraints'] for p in programs),
                    'matrix_constraints': sum(p['matrix_constraints'] for p in programs),
                    'time': cert.stats.get('time', '-'),
                })
                produced += 1
            if file_exists(check_uri):
                check = json.loads(file_to_str(check_uri))
                margins = [check['robust']['worst_margin']]
                if 'trace' in check:
                    margins.append(check['trace']['min_margin'])
                row.update({'worst_margin': min(margins),
                            'status': 'PASS' if check['passed'] else 'FAIL'})
                produced += 1
        if not produced:
            raise ConfigException('Nothing to report in {}'.format(self.out))
        columns = ('program', 'coefficients', 'variables', 'scalar_constraints',
                   'sos_constraints', 'matrix_constraints', 'time', 'worst_margin', 'status')
        for row in rows:
            for column in columns:
                row.setdefault(column, '-')
        header = '# config_hash {}\n'.format(self.config.hash)
        str_to_file(header + _render_csv(rows, columns), self._uri(REPORT_CSV))
        str_to_file(header + _render_table(rows, columns), self._uri(REPORT_TXT))
        return rows


def _cell(value):
    if isinstance(value, float):
        return '{:.4g}'.format(value)
    return str(value)


def _render_csv(rows, columns):
    lines = [','.join(columns)]
    lines.extend(','.join(_cell(row[c]) for c in columns) for row in rows)
    return '\n'.join(lines) + '\n'


def _render_table(rows, columns):
    cells = [[_cell(row[c]) for c in columns] for row in rows]
    widths = [max(len(c), *(len(r[i]) for r in cells)) for i, c in enumerate(columns)]
    lines = ['  '.join(c.ljust(w) for c, w in zip(columns, widths))]
    lines.extend('  '.join(v.ljust(w) for v, w in zip(r, widths)) for r in cells)
    return '\n'.join(lines) + '\n'
