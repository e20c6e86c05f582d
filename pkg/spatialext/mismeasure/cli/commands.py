"""
********************************************************************************
* Name: commands.py
* Created On: March 13, 2026
********************************************************************************
"""
import argparse
import logging
import sys
from pathlib import Path

import geojson

from ..exceptions import (BootstrapAbortedError, ConvergenceError, DataError, InvalidSpecError,
                          SuiteFailedError)
from ..models import Dataset
from ..services.estimator import select_ds_range
from ..services.fieldsim import simulate_design
from ..steps import run_estimation
from .config import SUITES, resolve_config
from .suites import check_failures, run_suite

log = logging.getLogger(f'mismeasure.{__name__}')

__all__ = ['main', 'build_parser', 'cmd_simulate', 'cmd_estimate', 'cmd_bench']

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4
EXIT_INTERNAL = 5

FLAG_KEYS = ['design', 'n', 'reps', 'B', 'bootstrap', 'select_range', 'seed', 'jobs', 'out', 'data', 'suite',
             'functional', 'tau', 'i_n', 'j_n', 'ds_values', 'bandwidth_s', 'multistarts', 'model_kind']


def cmd_simulate(run):
    """
    Simulate one dataset of the configured design.

    Returns:
        list<Path>: CSV, JSON sidecar and GeoJSON locations.
    """
    out = Path(run.out)
    out.mkdir(parents=True, exist_ok=True)
    data = simulate_design(run.design, run.n, run.seed)
    data.set_attribute('run', run.to_dict())

    path = out / f'{run.design}.csv'
    data.to_csv(path)
    locations = out / f'{run.design}.geojson'
    with open(locations, 'w') as f:
        geojson.dump(data.to_geojson(), f, sort_keys=True)
    return [path, path.with_suffix('.json'), locations]


def cmd_estimate(run):
    """
    Run the estimation pipeline on the configured dataset and write estimate.json, estimate.txt and per_ds.csv.

    Returns:
        EstimateResult: the result.
    """
    if run.data is None:
        raise InvalidSpecError('The estimate command needs a dataset (--data or "data" in the config file).')
    data = Dataset.read(run.data)
    config = run.estimator_config()
    out = Path(run.out)
    out.mkdir(parents=True, exist_ok=True)

    if run.select_range:
        selection = select_ds_range(data, config.bandwidth_s, phi=config.phi, config=config, seed=run.seed,
                                    jobs=run.jobs)
        config = config.replace(ds_values=list(selection.grid.ds_values))
        (out / 'ds_selection.txt').write_text('\n'.join(selection.audit_lines()) + '\n')

    echo = {'run': run.to_dict(), 'estimator': config.to_dict()}
    result, _ = run_estimation(data, config, seed=run.seed, jobs=run.jobs, bootstrap=run.bootstrap,
                               echo=echo)
    result.write(out)
    print(result.table())
    return result


def cmd_bench(run):
    """
    Run a benchmark suite, write its report and fail when too many replications failed.

    Returns:
        BenchReport: the report.
    """
    if run.suite is None:
        raise InvalidSpecError(f'The bench command needs a suite: one of {", ".join(SUITES)}.')
    report = run_suite(run.suite, run)
    report.write(Path(run.out) / run.suite)
    print(report.table())
    check_failures(report)
    return report


COMMANDS = {
    'simulate': cmd_simulate,
    'estimate': cmd_estimate,
    'bench': cmd_bench,
}


def _add_common_arguments(parser):
    parser.add_argument('--config', help='JSON configuration file; flags override its values.')
    parser.add_argument('--seed', type=int, help='Root random seed.')
    parser.add_argument('--jobs', type=int, help='Parallel workers (default from MISMEASURE_JOBS or 1).')
    parser.add_argument('--out', help='Output directory.')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='-v for INFO, -vv for DEBUG.')


def _add_estimator_arguments(parser):
    parser.add_argument('--B', type=int, help='Bootstrap replicates per spacing (>= 20).')
    parser.add_argument('--no-bootstrap', dest='bootstrap', action='store_const', const=False,
                        help='Skip the bootstrap (equal weights, no standard errors).')
    parser.add_argument('--functional', choices=['mean', 'median', 'mode', 'quantile'],
                        help='Centering functional of the measurement error.')
    parser.add_argument('--tau', type=float, help='Quantile level for --functional quantile.')
    parser.add_argument('--i-n', dest='i_n', type=int, help='Sieve truncation of the x* dimension (even).')
    parser.add_argument('--j-n', dest='j_n', type=int, help='Sieve truncation of the error dimension (even).')
    parser.add_argument('--ds-values', dest='ds_values', type=float, nargs='+', help='Spacings to estimate at.')
    parser.add_argument('--bandwidth-s', dest='bandwidth_s', type=float, help='Distance-smoothing bandwidth.')
    parser.add_argument('--multistarts', type=int, help='Optimizer starts per spacing.')
    parser.add_argument('--model', dest='model_kind', choices=['linear_gauss', 'poly3_gauss', 'probit'],
                        help='Outcome model (inferred from y when omitted).')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='mismeasure',
        description='Regression with a mismeasured spatial covariate using neighbors as repeated measurements.',
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    simulate = subparsers.add_parser('simulate', help='Write a synthetic dataset of a named design.')
    _add_common_arguments(simulate)
    simulate.add_argument('--design', help='Design name (linear, polynomial, probit, lognormal_median, ...).')
    simulate.add_argument('--n', type=int, help='Number of observations.')

    estimate = subparsers.add_parser('estimate', help='Estimate the outcome model of one dataset.')
    _add_common_arguments(estimate)
    _add_estimator_arguments(estimate)
    estimate.add_argument('--data', help='Dataset CSV (with its JSON sidecar).')
    estimate.add_argument('--select-range', dest='select_range', action='store_const', const=True,
                          help='Choose the spacing range from the data before estimating.')

    bench = subparsers.add_parser('bench', help='Run a benchmark suite.')
    bench.add_argument('suite', choices=SUITES)
    _add_common_arguments(bench)
    _add_estimator_arguments(bench)
    bench.add_argument('--reps', type=int, help='Replications.')
    bench.add_argument('--n', type=int, help='Observations per replication.')
    return parser


def configure_logging(verbosity):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')


def main(argv=None):
    """
    Command-line entry point.

    Returns:
        int: exit code (0 ok, 2 config, 3 data, 4 convergence, 5 internal).
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    flags = {key: getattr(args, key, None) for key in FLAG_KEYS}

    try:
        run = resolve_config(args.config, **flags)
        COMMANDS[args.command](run)
    except InvalidSpecError as e:
        log.error(f'Configuration error: {e}')
        return EXIT_CONFIG
    except (DataError, OSError) as e:
        log.error(f'Data error: {e}')
        return EXIT_DATA
    except (ConvergenceError, BootstrapAbortedError, SuiteFailedError) as e:
        log.error(f'Estimation failed: {e}')
        return EXIT_CONVERGENCE
    except Exception as e:
        log.exception(f'Internal error: {e}')
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
