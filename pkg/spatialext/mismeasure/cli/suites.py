"""
********************************************************************************
* Name: suites.py
* Created On: March 13, 2026
********************************************************************************
"""
import logging
import time

import numpy as np
from scipy import stats

from ..exceptions import InvalidSpecError, SuiteFailedError
from ..results import BenchReport
from ..services.estimator import quartile_curve
from ..services.fieldsim import design_catalog, geometric_misclassification, simulate_design
from ..services.job_manager import ReplicationJobManager
from ..steps import run_estimation
from .config import SUITES

log = logging.getLogger(f'mismeasure.{__name__}')

__all__ = ['run_suite', 'check_failures', 'SUITE_DESIGNS', 'MAX_FAILURE_SHARE']

MAX_FAILURE_SHARE = 0.05
Z95 = stats.norm.ppf(0.975)
SIEVE_SCAN_TRUNCATIONS = (2, 4, 6)

SUITE_DESIGNS = {
    'table1': 'linear',
    'polynomial': 'polynomial',
    'coverage': 'linear',
    'appendixB_median': 'lognormal_median',
    'appendixB_probit': 'probit',
    'appendixB_covariate': 'covariate',
    'sieve_scan': 'linear',
    'discrete_demo': 'discrete',
}


def _theta_values(theta, se=None):
    values = {f'theta_{k + 1}': float(t) for k, t in enumerate(theta)}
    intervals = {}
    if se is not None:
        for k, (t, s) in enumerate(zip(theta, se)):
            if s is not None and np.isfinite(s):
                intervals[f'theta_{k + 1}'] = (t - Z95 * s, t + Z95 * s)
    return values, intervals


def _mean_sigma(values):
    finite = [float(v) for v in values or [] if v is not None]
    return float(np.mean(finite)) if finite else None


def design_truth(design):
    """
    True parameter values of a design keyed like the bench draws.
    """
    outcome = design['outcome']
    truth = {f'theta_{k + 1}': float(t) for k, t in enumerate(outcome.theta)}
    if outcome.kind != 'probit':
        truth['sigma_u'] = float(outcome.sigma_u)
    if design.get('covariate'):
        truth['kappa'] = 1.0
    if design.get('discrete'):
        mis_x = geometric_misclassification(design['mis_x_diagonal'])
        for (i, j), value in np.ndenumerate(mis_x):
            truth[f'mis_x[{i},{j}]'] = float(value)
    return truth


class _Replication(object):
    """
    One replication: simulate a dataset of the design, run the spatial pipeline and collect every estimator.

    Returns a list of (estimator, values, intervals) rows.
    """
    def __init__(self, design, n, config, bootstrap=True, per_ds=False):
        self.design = design
        self.n = n
        self.config = config
        self.bootstrap = bootstrap
        self.per_ds = per_ds

    def __call__(self, seed):
        data_seed, estimate_seed = seed.spawn(2)
        data = simulate_design(self.design, self.n, data_seed)
        return self.rows(data, estimate_seed)

    def estimate(self, data, seed, config=None):
        result, _ = run_estimation(data, config or self.config, seed=seed, jobs=1, bootstrap=self.bootstrap,
                                   echo={})
        return result

    def spatial_rows(self, result, label='spatial'):
        combined = result.combined
        sigma_u = _mean_sigma(result.get_attribute('sigma_u'))
        rows = []
        for name, theta, se in ((f'weighted_{label}', combined.theta_weighted, combined.se_weighted),
                                (f'unweighted_{label}', combined.theta_unweighted, None)):
            values, intervals = _theta_values(theta, se)
            if sigma_u is not None:
                values['sigma_u'] = sigma_u
            if result.get_attribute('kappa') is not None:
                values['kappa'] = result.get_attribute('kappa')[0]
            rows.append((name, values, intervals))
        if self.per_ds:
            for record in combined.per_ds:
                if record['converged']:
                    values, _ = _theta_values(record['theta_hat'])
                    rows.append((f"{label}_ds={record['ds']:g}", values, {}))
        return rows

    def baseline_rows(self, result):
        rows = []
        for name, estimate in result.baselines.items():
            values, intervals = _theta_values(estimate['theta'], estimate.get('se'))
            if estimate.get('sigma_u') is not None:
                values['sigma_u'] = estimate['sigma_u']
            if len(estimate.get('delta') or []):
                values['kappa'] = estimate['delta'][0]
            rows.append((name, values, intervals))
        return rows

    def rows(self, data, seed):
        result = self.estimate(data, seed)
        return self.spatial_rows(result) + self.baseline_rows(result)


class _PolynomialReplication(_Replication):
    """
    Reports g(x*) at fixed quartile points instead of the coefficients.
    """
    def __init__(self, design, n, config, points, bootstrap=True):
        super().__init__(design, n, config, bootstrap=bootstrap)
        self.points = points

    def _curve(self, name, theta):
        values = quartile_curve(theta, self.points)
        return (name, {f'g_q{k + 1}': float(v) for k, v in enumerate(values)}, {})

    def rows(self, data, seed):
        result = self.estimate(data, seed)
        rows = [self._curve('weighted_spatial', result.combined.theta_weighted),
                self._curve('unweighted_spatial', result.combined.theta_unweighted)]
        rows += [self._curve(name, estimate['theta']) for name, estimate in result.baselines.items()]
        return rows


class _SieveScanReplication(_Replication):
    """
    The same dataset estimated with low, medium and high sieve truncations.
    """
    def rows(self, data, seed):
        rows = []
        for truncation, child in zip(SIEVE_SCAN_TRUNCATIONS, seed.spawn(len(SIEVE_SCAN_TRUNCATIONS))):
            config = self.config.replace(i_n=truncation, j_n=truncation)
            result = self.estimate(data, child, config)
            rows += self.spatial_rows(result, label=f'spatial_sieve={truncation}')
        return rows


class _DiscreteReplication(_Replication):
    """
    Adds the misclassification matrix entries of the best-fitting spacing.
    """
    def rows(self, data, seed):
        result = self.estimate(data, seed)
        rows = self.spatial_rows(result) + self.baseline_rows(result)
        if result.misclassification is not None:
            entries = {}
            for row, columns in result.misclassification['mis_x'].items():
                i = int(row.split('=')[1])
                for column, value in columns.items():
                    entries[f'mis_x[{i},{int(column.split("=")[1])}]'] = value
            rows.append(('spatial_misclassification', entries, {}))
        return rows


def _quartiles_of(design):
    spec = design['field']
    return stats.norm.ppf([0.25, 0.5, 0.75], loc=spec.mean, scale=np.sqrt(spec.variance))


def _replication_for(suite, run, design):
    if suite == 'polynomial':
        config = run.estimator_config(model_kind='poly3_gauss')
        return _PolynomialReplication(design['name'], run.n, config, _quartiles_of(design), bootstrap=run.bootstrap)
    config = run.estimator_config()
    if suite == 'sieve_scan':
        return _SieveScanReplication(design['name'], run.n, config, bootstrap=run.bootstrap)
    if suite == 'discrete_demo':
        return _DiscreteReplication(design['name'], run.n, config, bootstrap=run.bootstrap)
    return _Replication(design['name'], run.n, config, bootstrap=run.bootstrap, per_ds=suite == 'table1')


def run_suite(suite, run):
    """
    Run the replications of a benchmark suite.

    Args:
        suite(str): suite name.
        run(RunConfig): resolved configuration (reps, n, B, jobs, seed, estimator settings).

    Returns:
        BenchReport: draws of every replication that succeeded and the failures of the others.
    """
    if suite not in SUITES:
        raise InvalidSpecError(f'Unknown suite "{suite}". Choose one of {", ".join(SUITES)}.')
    run = run.replace(design=SUITE_DESIGNS[suite], suite=suite)
    design = design_catalog()[run.design]

    if suite == 'polynomial':
        truth = {f'g_q{k + 1}': float(v)
                 for k, v in enumerate(quartile_curve(design['outcome'].theta, _quartiles_of(design)))}
    else:
        truth = design_truth(design)

    job = _replication_for(suite, run, design)
    report = BenchReport(suite, config=run.to_dict())
    report.replications = run.reps
    report.notes['design'] = design['name']
    report.notes['truth'] = truth

    log.info(f'Suite "{suite}": {run.reps} replication(s) of design "{design["name"]}".')
    started = time.perf_counter()
    manager = ReplicationJobManager([job] * run.reps, seed=run.seed, n_jobs=run.jobs, name=suite)
    for outcome in manager.run_job():
        if outcome.error is not None:
            report.add_failure(outcome.index, outcome.error)
            continue
        for estimator, values, intervals in outcome.value:
            report.add_draws(outcome.index, estimator, values, truth, intervals)
    report.runtime_seconds = time.perf_counter() - started
    log.info(f'Suite "{suite}" finished in {report.runtime_seconds:.1f} s with {len(report.failures)} failure(s).')
    return report


def check_failures(report):
    """
    Raises:
        SuiteFailedError: more than 5% of the replications failed.
    """
    if report.failure_share > MAX_FAILURE_SHARE:
        raise SuiteFailedError(f'{len(report.failures)} of {report.replications} replication(s) of suite '
                               f'"{report.suite}" failed.')
