"""Command line driver of the synthesis pipeline

Exit codes: 0 success, 2 infeasible program, 3 rejected certificate or failed
verification, 4 configuration, input or provenance error.
"""
import argparse
import logging
import sys

from .api import PROGRAM_ORDER, ExperimentConfig, Pipeline, default_experiment
from .exceptions import (CertificateRejectedException, CompilationError, ConfigException,
                         DimensionError, InfeasibleException, NoiseBoundException,
                         ProvenanceException, SolverException)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_REJECTED = 3
EXIT_CONFIG = 4


def build_parser():
    parser = argparse.ArgumentParser(
        prog='isscert',
        description='Data-driven synthesis of ISS controllers for polynomial systems')
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='experiment JSON (local path or s3:// URI); '
                        'the built-in two-state example when omitted')
    common.add_argument('--seed', type=int, help='override the configured seed')
    common.add_argument('--out', help='override the configured output directory')
    commands = parser.add_subparsers(dest='command')
    commands.required = True
    commands.add_parser('collect', parents=[common], help='simulate and write the dataset')
    commands.add_parser('overapprox', parents=[common],
                        help='fit the ellipsoid of data-consistent coefficients')
    synth = commands.add_parser('synth', parents=[common], help='run one synthesis program')
    synth.add_argument('program', choices=PROGRAM_ORDER)
    verify = commands.add_parser('verify', parents=[common],
                                 help='trace, sample and check a certificate')
    verify.add_argument('program', choices=PROGRAM_ORDER)
    commands.add_parser('report', parents=[common], help='tabulate every program')
    return parser


def load_config(args):
    if args.config:
        config = ExperimentConfig.load(args.config)
    else:
        config = default_experiment()
    return config.with_overrides(seed=args.seed, output_dir=args.out)


def run(args):
    pipeline = Pipeline(load_config(args))
    if args.command == 'collect':
        dataset = pipeline.collect()
        print('dataset: {} samples, delta {}'.format(dataset.T, dataset.delta))
    elif args.command == 'overapprox':
        model, rank = pipeline.overapprox()
        print('rank check: {}'.format('full row rank' if rank['full_row_rank']
                                      else 'RANK DEFICIENT'))
        print('log det Abar: {:.6g}'.format(model.logdet))
    elif args.command == 'synth':
        cert = pipeline.synth(args.program)
        sys.stdout.write(cert.summary_text())
        if not cert.passed:
            return EXIT_REJECTED
    elif args.command == 'verify':
        result = pipeline.verify(args.program)
        print('{}: {}'.format(args.program, 'PASS' if result['passed'] else 'FAIL'))
        if not result['passed']:
            return EXIT_REJECTED
    elif args.command == 'report':
        rows = pipeline.report()
        print('{} programs reported in {}'.format(len(rows), pipeline.out))
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except InfeasibleException as e:
        logger.error('Infeasible: %s', e)
        for entry in e.diagnostics or []:
            logger.error('  %s', entry)
        return EXIT_INFEASIBLE
    except SolverException as e:
        logger.error('Solver failure: %s', e)
        return EXIT_INFEASIBLE
    except CertificateRejectedException as e:
        logger.error('Rejected: %s', e)
        return EXIT_REJECTED
    except (ConfigException, ProvenanceException, NoiseBoundException, DimensionError,
            CompilationError, IOError, ValueError, KeyError) as e:
        logger.error('%s: %s', type(e).__name__, e)
        return EXIT_CONFIG


if __name__ == '__main__':
    sys.exit(main())
