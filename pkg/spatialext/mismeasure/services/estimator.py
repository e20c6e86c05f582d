"""
********************************************************************************
* Name: estimator.py
* Created On: March 9, 2026
********************************************************************************
"""
import json
import logging
from collections import namedtuple
from dataclasses import dataclass, field as dataclass_field
from functools import partial

import numpy as np
import pandas as pd
import param
import statsmodels.api as sm
from scipy import spatial, stats

from ..exceptions import ConvergenceError, DataError, InvalidSpecError, ThinConditioningError
from ..models import SpecBase
from ..utilities import json_serializer
from . import mle
from .bootstrap import BlockSpec, as_seed_sequence, bootstrap_se
from .discrete import DiscreteConfig, fit_discrete
from .job_manager import ReplicationJobManager
from .kde import KernelSpec, build_density, build_pairs, sample_pseudo, select_bandwidth
from .sieve import CenteringFunctional

log = logging.getLogger(f'mismeasure.{__name__}')

__all__ = [
    'EstimatorConfig', 'DistanceGrid', 'DistanceEstimate', 'CombinedEstimate', 'GridBootstrap', 'LinkModel',
    'DistanceSelection', 'estimate_at', 'estimate_over_grid', 'distance_variances', 'combine', 'select_ds_range',
    'residualize_covariates', 'ols', 'iv_nearest_neighbor', 'nearest_neighbor_values', 'probit_mle',
    'me_effect_test', 'quartile_curve', 'quartile_points',
]

DEFAULT_DS_VALUES = [0.75 * j for j in range(1, 7)]
SPACING_TOL = 1e-9
SIGNIFICANCE_LEVELS = (0.10, 0.05, 0.01)
NEIGHBOR_QUERY = 8

Residualized = namedtuple('Residualized', ['data', 'link'])


class EstimatorConfig(SpecBase):
    """
    Controls of the full spatial estimation pipeline.
    """
    model_kind = param.Selector(default=None, objects=[None, 'linear_gauss', 'poly3_gauss', 'probit'],
                                constant=True, doc='Outcome model; inferred from y (binary -> probit) when None.')
    ds_values = param.List(default=list(DEFAULT_DS_VALUES), constant=True)
    ds0 = param.Number(default=0.0, bounds=(0, None), constant=True)
    bandwidth_s = param.Number(default=0.3, bounds=(0, None), inclusive_bounds=(False, True), constant=True)
    bandwidth_yxz = param.List(default=None, allow_None=True, constant=True)
    kernel_order = param.Selector(default=2, objects=[2, 4, 6], constant=True)
    functional = param.Selector(default='mean', objects=['mean', 'median', 'mode', 'quantile'], constant=True)
    tau = param.Number(default=0.5, bounds=(0, 1), inclusive_bounds=(False, False), constant=True)
    i_n = param.Integer(default=None, bounds=(0, None), allow_None=True, constant=True)
    j_n = param.Integer(default=None, bounds=(0, None), allow_None=True, constant=True)
    quad_nodes = param.Integer(default=48, bounds=(32, None), constant=True)
    multistarts = param.Integer(default=5, bounds=(1, None), constant=True)
    max_iter = param.Integer(default=400, bounds=(1, None), constant=True)
    bandwidth_retries = param.Integer(default=3, bounds=(0, None), constant=True)
    widen_factor = param.Number(default=1.5, bounds=(1, None), inclusive_bounds=(False, True), constant=True)
    bootstrap_reps = param.Integer(default=50, bounds=(20, None), constant=True)
    block_l1 = param.Number(default=130.0 / 22.0, bounds=(0, None), inclusive_bounds=(False, True), constant=True)
    block_l2 = param.Number(default=65.0 / 15.0, bounds=(0, None), inclusive_bounds=(False, True), constant=True)
    phi = param.Number(default=0.25, bounds=(0, 1), inclusive_bounds=(False, False), constant=True)

    def validate(self):
        if self.i_n is not None and self.i_n % 2:
            raise InvalidSpecError(f'EstimatorConfig: i_n must be even, got {self.i_n}.')
        if self.j_n is not None and self.j_n % 2:
            raise InvalidSpecError(f'EstimatorConfig: j_n must be even, got {self.j_n}.')
        if self.bandwidth_yxz is not None and len(self.bandwidth_yxz) != 3:
            raise InvalidSpecError('EstimatorConfig: bandwidth_yxz must hold (h_y, h_x, h_z).')
        DistanceGrid(ds_values=list(self.ds_values), ds0=self.ds0, bandwidth_s=self.bandwidth_s)

    @property
    def grid(self):
        return DistanceGrid(ds_values=list(self.ds_values), ds0=self.ds0, bandwidth_s=self.bandwidth_s)

    @property
    def block_spec(self):
        return BlockSpec(l1=self.block_l1, l2=self.block_l2)

    def kind_for(self, data):
        if self.model_kind is not None:
            return self.model_kind
        return 'probit' if np.all(np.isin(data.y, (0.0, 1.0))) else 'linear_gauss'

    def centering(self):
        return CenteringFunctional(kind=self.functional, tau=self.tau)

    def likelihood_config(self):
        return mle.LikelihoodConfig(quad_nodes=self.quad_nodes, multistarts=self.multistarts, max_iter=self.max_iter)

    def discrete_config(self):
        return DiscreteConfig(multistarts=self.multistarts, max_iter=self.max_iter)

    def kernel_for(self, data, pairs):
        """
        Kernel with the configured bandwidths, or rule-of-thumb bandwidths for the 3-D (y, x, z) density.
        """
        family = 'gaussian' if self.kernel_order == 2 else 'polynomial_gaussian'
        if self.bandwidth_yxz is not None:
            bandwidths = [float(h) for h in self.bandwidth_yxz]
        else:
            n_eff = min(float(data.n), pairs.effective_count / 2.0)
            h_y = select_bandwidth(data, 3, column='y', n_eff=n_eff)
            h_x = select_bandwidth(data, 3, column='x', n_eff=n_eff)
            bandwidths = [h_y, h_x, h_x]
        return KernelSpec(order=self.kernel_order, bandwidth_yxz=bandwidths, bandwidth_s=self.bandwidth_s,
                          family=family)

    def basis_for(self, data):
        truncations = None
        if self.i_n is not None or self.j_n is not None:
            truncations = {'i_n': self.i_n if self.i_n is not None else 4,
                           'j_n': self.j_n if self.j_n is not None else 4}
        return mle.basis_from_data(data.x.astype(float), data.z.astype(float), truncations)


class DistanceGrid(SpecBase):
    """
    Increasing spacings used for estimation, all beyond the exclusion radius ds0 and at least 2 h_s apart.
    """
    ds_values = param.List(default=list(DEFAULT_DS_VALUES), constant=True)
    ds0 = param.Number(default=0.0, bounds=(0, None), constant=True)
    bandwidth_s = param.Number(default=0.3, bounds=(0, None), inclusive_bounds=(False, True), constant=True)

    def validate(self):
        values = [float(d) for d in self.ds_values]
        if not values:
            raise InvalidSpecError('DistanceGrid: at least one spacing is required.')
        if any(d <= self.ds0 for d in values):
            raise InvalidSpecError(f'DistanceGrid: every spacing must exceed ds0 = {self.ds0:g}.')
        minimum = 2.0 * self.bandwidth_s * (1.0 - SPACING_TOL)
        if any(b - a < minimum for a, b in zip(values, values[1:])):
            raise InvalidSpecError(
                f'DistanceGrid: spacings must increase in steps of at least 2 h_s = {2.0 * self.bandwidth_s:g}.'
            )

    def __iter__(self):
        return iter(float(d) for d in self.ds_values)

    def __len__(self):
        return len(self.ds_values)

    @classmethod
    def spanning(cls, ds_min, ds_max, step, bandwidth_s, ds0=0.0):
        """Grid ds_min, ds_min + step, ... up to ds_max."""
        count = int(np.floor((ds_max - ds_min) / step + 1e-9)) + 1
        return cls(ds_values=[ds_min + k * step for k in range(count)], ds0=ds0, bandwidth_s=bandwidth_s)


@dataclass
class DistanceEstimate:
    """
    Estimate at one spacing: theta_hat, the likelihood fit and the pseudo-instrument draw.
    """
    ds: float
    theta_hat: np.ndarray
    fit: object
    pseudo: object
    kernel: KernelSpec
    var_hat: np.ndarray = None

    @property
    def converged(self):
        return bool(self.fit.converged)

    @property
    def sigma_u(self):
        if hasattr(self.fit, 'eta_hat'):
            return self.fit.eta_hat.get('sigma_u')
        return self.fit.sigma_u

    def to_record(self):
        return {
            'ds': self.ds,
            'theta_hat': np.asarray(self.theta_hat).tolist(),
            'var_hat': None if self.var_hat is None else np.asarray(self.var_hat).tolist(),
            'converged': self.converged,
            'dropped': len(self.pseudo.dropped),
            'bandwidth_yxz': list(self.kernel.bandwidth_yxz),
        }


@dataclass
class CombinedEstimate:
    """
    Unweighted and inverse-variance weighted combination of per-spacing estimates.

    weights has one row per per_ds entry and one column per coordinate; non-converged fits get weight 0.
    se_weighted and ci95_weighted come from the bootstrap draws of the weighted combination when those are given.
    """
    per_ds: list
    theta_unweighted: np.ndarray
    theta_weighted: np.ndarray
    weights: np.ndarray
    se_weighted: np.ndarray = None
    ci95_weighted: np.ndarray = None
    excluded: list = dataclass_field(default_factory=list)

    def to_dict(self):
        return {
            'per_ds': self.per_ds,
            'theta_unweighted': self.theta_unweighted.tolist(),
            'theta_weighted': self.theta_weighted.tolist(),
            'weights': self.weights.tolist(),
            'se_weighted': None if self.se_weighted is None else self.se_weighted.tolist(),
            'ci95_weighted': None if self.ci95_weighted is None else self.ci95_weighted.tolist(),
            'excluded': self.excluded,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), default=json_serializer, sort_keys=True)

    def to_frame(self):
        rows = []
        for entry, weights in zip(self.per_ds, self.weights):
            for k, value in enumerate(entry['theta_hat']):
                rows.append({'ds': entry['ds'], 'coordinate': f'theta_{k + 1}', 'estimate': value,
                             'variance': None if entry.get('var_hat') is None else entry['var_hat'][k],
                             'weight': weights[k], 'converged': entry['converged']})
        return pd.DataFrame(rows)


@dataclass
class LinkModel:
    """
    Location-shift coefficients on the covariates w for y, x and z.
    """
    kappa_y: np.ndarray
    kappa_x: np.ndarray
    kappa_z: np.ndarray
    columns: list

    def total_y(self, delta):
        """Covariate effect on y on the original scale: kappa_y + delta."""
        return self.kappa_y + np.asarray(delta, dtype=float)

    def to_dict(self):
        return {'columns': self.columns, 'kappa_y': self.kappa_y.tolist(), 'kappa_x': self.kappa_x.tolist(),
                'kappa_z': self.kappa_z.tolist()}


@dataclass
class DistanceSelection:
    grid: DistanceGrid
    theta: float
    se: float
    audit: list
    exhausted: bool = False

    def audit_lines(self):
        lines = []
        for entry in self.audit:
            lines.append(f"{entry['phase']}\tds_min={entry['ds_min']:.4g}\tds_max={entry['ds_max']:.4g}\t"
                         f"theta={entry['theta']:.6g}\tse={entry['se']:.6g}\t{entry['decision']}")
        return lines


def _fit_pseudo(data, pseudo, config, seed, init=None, basis=None):
    kept = np.flatnonzero(pseudo.kept)
    with_z = data.take(kept).with_z(pseudo.z[kept])
    if data.discrete:
        fit = fit_discrete(with_z, config.discrete_config(), seed=seed)
        return fit, np.asarray(fit.theta_hat, dtype=float)

    fit = mle.fit(with_z, config.kind_for(data), basis=basis or config.basis_for(with_z),
                  functional=config.centering(), config=config.likelihood_config(), seed=seed, init=init)
    return fit, np.asarray(fit.theta_hat, dtype=float)


def estimate_at(data, ds, config=None, seed=None, init=None, basis=None):
    """
    Estimate theta at one spacing: pairs -> joint density -> pseudo-instruments -> sieve likelihood.

    Thin conditioning regions widen the (y, x, z) bandwidths by config.widen_factor up to
    config.bandwidth_retries times; the last attempt drops the remaining thin observations.

    Args:
        data(Dataset): observations (continuous or discrete x).
        ds(float): spacing, > config.ds0.
        config(EstimatorConfig): pipeline controls.
        seed(int|numpy.random.SeedSequence): seed for the pseudo-instrument draw and the multistarts.
        init(FitResult): warm start for the likelihood fit.
        basis(SieveBasis): fixed sieve supports (derived from the data when None).

    Returns:
        DistanceEstimate: the estimate.
    """
    config = config or EstimatorConfig()
    if ds <= config.ds0:
        raise InvalidSpecError(f'Spacing {ds:g} does not exceed the exclusion radius ds0 = {config.ds0:g}.')

    pseudo_seed, fit_seed = as_seed_sequence(seed).spawn(2)
    pairs = build_pairs(data, ds, config.bandwidth_s)
    kernel = config.kernel_for(data, pairs)

    pseudo = None
    for attempt in range(config.bandwidth_retries + 1):
        model = build_density(data, pairs, kernel)
        last = attempt == config.bandwidth_retries
        try:
            pseudo = sample_pseudo(data, model, pseudo_seed, skip_thin=last)
            break
        except ThinConditioningError as e:
            log.warning(f'{e} Widening bandwidths by {config.widen_factor:g} (attempt {attempt + 1}).')
            kernel = kernel.widened(config.widen_factor)

    fit, theta = _fit_pseudo(data, pseudo, config, fit_seed, init=init, basis=basis)
    log.info(f'Spacing {ds:g}: theta_hat={np.round(theta, 4).tolist()} converged={fit.converged} '
             f'dropped={len(pseudo.dropped)}')
    return DistanceEstimate(ds=float(ds), theta_hat=theta, fit=fit, pseudo=pseudo, kernel=kernel)


def _estimate_job(data, ds, config, seed):
    return estimate_at(data, ds, config, seed)


def estimate_over_grid(data, grid, config=None, seed=None, jobs=1):
    """
    Run estimate_at for every spacing of the grid as independent jobs.

    Returns:
        list<DistanceEstimate>: estimates for the spacings that succeeded, in grid order.

    Raises:
        ConvergenceError: no spacing produced an estimate.
    """
    config = config or EstimatorConfig()
    spacings = list(grid)
    manager = ReplicationJobManager([partial(_estimate_job, data, ds, config) for ds in spacings], seed=seed,
                                    n_jobs=jobs, name='spacings')
    estimates = []
    for outcome in manager.run_job():
        if outcome.error is None:
            estimates.append(outcome.value)
        else:
            log.warning(f'Spacing {spacings[outcome.index]:g} skipped: {outcome.error}')
    if not estimates:
        raise ConvergenceError('No spacing of the grid produced an estimate.')
    return estimates


class _GridStatistic(object):
    """Picklable bootstrap statistic: re-estimate every spacing on one resample, warm started."""
    def __init__(self, spacings, config):
        self.spacings = spacings
        self.config = config

    def __call__(self, data, seed):
        thetas = []
        for (ds, init, basis), child in zip(self.spacings, as_seed_sequence(seed).spawn(len(self.spacings))):
            thetas.append(estimate_at(data, ds, self.config, child, init=init, basis=basis).theta_hat)
        return np.concatenate([np.atleast_1d(np.asarray(t, dtype=float)) for t in thetas])


@dataclass
class GridBootstrap:
    """
    Block-bootstrap draws of every per-spacing estimate, all spacings re-estimated on the same resamples.

    draws has shape (replicates, spacings, coordinates).
    """
    ds: list
    draws: np.ndarray
    B: int
    failures: int = 0

    @property
    def variances(self):
        return np.var(self.draws, axis=0, ddof=1)

    def per_ds(self):
        se = np.sqrt(self.variances)
        ci95 = np.percentile(self.draws, [2.5, 97.5], axis=0)
        return [{'ds': ds, 'se': se[j].tolist(), 'ci95': np.stack([ci95[0, j], ci95[1, j]], axis=-1).tolist()}
                for j, ds in enumerate(self.ds)]

    def to_dict(self):
        return {'B': self.B, 'failures': self.failures, 'per_ds': self.per_ds()}


def distance_variances(data, estimates, config=None, seed=None, jobs=1):
    """
    Block-bootstrap variance of each per-spacing estimate (config.bootstrap_reps replicates, one start, warm
    started from the full-sample fit). Every replicate re-estimates all spacings on one shared resample, so the
    draws keep the correlation between spacings. Sets var_hat on each estimate.

    Returns:
        GridBootstrap: the joint draws.
    """  # noqa: E501
    config = config or EstimatorConfig()
    fast = config.replace(multistarts=1)
    discrete = data.discrete
    spacings = [(e.ds, None if discrete else e.fit, None if discrete else e.fit.basis) for e in estimates]
    result = bootstrap_se(data, _GridStatistic(spacings, fast), config.block_spec, B=config.bootstrap_reps,
                          seed=seed, jobs=jobs)
    draws = result.draws.reshape(len(result.draws), len(estimates), -1)
    boot = GridBootstrap(ds=[e.ds for e in estimates], draws=draws, B=result.B, failures=result.failures)
    for estimate, variance in zip(estimates, boot.variances):
        estimate.var_hat = variance
    return boot


def _record(entry):
    if isinstance(entry, dict):
        return dict(entry)
    return entry.to_record()


def combine(estimates, variances=None, draws=None):
    """
    Unweighted mean and inverse-variance weighted mean of the per-spacing estimates, per coordinate.

    With draws, the standard error and percentile interval of the weighted mean are taken from the same weights
    applied to every bootstrap replicate, which accounts for the correlation between spacings. Without draws the
    standard error 1/sqrt(sum 1/var) holds only for independent per-spacing estimates.

    Args:
        estimates(list): DistanceEstimate objects or dicts with ds, theta_hat, converged (and var_hat).
        variances(list): per-estimate variance vectors; defaults to each estimate's var_hat. Missing variances give
            equal weights; an infinite variance gives weight 0.
        draws(array-like): joint bootstrap draws of shape (replicates, estimates, coordinates), e.g.
            GridBootstrap.draws. Variances missing from the estimates are taken from them.

    Returns:
        CombinedEstimate: the combination; non-converged estimates are excluded.

    Raises:
        ConvergenceError: no converged estimate.
    """  # noqa: E501
    records = [_record(e) for e in estimates]
    if variances is not None:
        if len(variances) != len(records):
            raise InvalidSpecError('One variance vector per estimate is required.')
        for record, variance in zip(records, variances):
            record['var_hat'] = None if variance is None else np.atleast_1d(np.asarray(variance, dtype=float)).tolist()
    if draws is not None:
        draws = np.asarray(draws, dtype=float)
        if draws.ndim != 3 or draws.shape[1] != len(records) or len(draws) < 2:
            raise InvalidSpecError('Bootstrap draws must have shape (replicates >= 2, estimates, coordinates).')
        for record, variance in zip(records, np.var(draws, axis=0, ddof=1)):
            if record.get('var_hat') is None:
                record['var_hat'] = variance.tolist()

    usable = [k for k, r in enumerate(records) if r['converged']]
    excluded = [records[k]['ds'] for k in range(len(records)) if k not in usable]
    if not usable:
        raise ConvergenceError('All per-spacing fits failed to converge.')
    if excluded:
        log.warning(f'Excluded non-converged spacing(s) from the combination: {excluded}.')

    theta = np.array([records[k]['theta_hat'] for k in usable], dtype=float)
    unweighted = theta.mean(axis=0)

    if all(records[k].get('var_hat') is not None for k in usable):
        var = np.array([records[k]['var_hat'] for k in usable], dtype=float)
        with np.errstate(divide='ignore'):
            precision = np.where(np.isinf(var), 0.0, 1.0 / var)
        zero = var <= 0
        for col in range(theta.shape[1]):
            if zero[:, col].any():
                precision[:, col] = zero[:, col].astype(float)
            elif precision[:, col].sum() == 0:
                log.warning(f'Every variance of coordinate {col + 1} is infinite; using equal weights.')
                precision[:, col] = 1.0
        weights = precision / precision.sum(axis=0, keepdims=True)
        with np.errstate(divide='ignore'):
            total = np.where(np.isfinite(var) & ~zero, 1.0 / np.where(zero, 1.0, var), 0.0).sum(axis=0)
            se = np.where(zero.any(axis=0), 0.0, np.where(total > 0, 1.0 / np.sqrt(total), np.inf))
    else:
        weights = np.full(theta.shape, 1.0 / len(usable))
        se = None

    weighted = (weights * theta).sum(axis=0)
    full = np.zeros((len(records), theta.shape[1]))
    full[usable] = weights
    ci95 = None
    if draws is not None:
        combined = np.where(full > 0, draws, 0.0)
        combined = (combined * full).sum(axis=1)
        se = np.std(combined, axis=0, ddof=1)
        ci95 = np.percentile(combined, [2.5, 97.5], axis=0).T
    return CombinedEstimate(per_ds=records, theta_unweighted=unweighted, theta_weighted=weighted, weights=full,
                            se_weighted=se, ci95_weighted=ci95, excluded=excluded)


def _grid_evaluator(data, config, seed, jobs, coordinate):
    """
    Default (theta, se) for a grid: weighted combination with its joint block-bootstrap standard error.
    """
    def evaluate(grid):
        local = config.replace(ds_values=list(grid), ds0=grid.ds0)
        estimates = estimate_over_grid(data, grid, local, seed=seed, jobs=jobs)
        boot = distance_variances(data, estimates, local, seed=seed, jobs=jobs)
        combined = combine(estimates, draws=boot.draws)
        se = np.inf if combined.se_weighted is None else combined.se_weighted[coordinate]
        return float(combined.theta_weighted[coordinate]), float(se)
    return evaluate


def select_ds_range(data, bandwidth_s, phi=0.25, config=None, evaluate=None, seed=None, jobs=1, coordinate=1,
                    max_ds=None, improvement_tol=0.05):
    """
    Two-phase search for the spacing range [ds_min, ds_max].

    Starting from ds_min = ds_max = 2h, ds_max grows in steps of 2h while the standard error keeps improving by
    more than improvement_tol (relative). Then ds_min grows in steps of 2h until two consecutive estimates differ
    by less than phi times the standard error of the second. If no such pair exists, the search restarts from the
    largest ds_min considered with ds_max growing again.

    Args:
        data(Dataset): observations.
        bandwidth_s(float): distance-smoothing bandwidth h.
        phi(float): bias tolerance as a fraction of the standard error, in (0, 1).
        config(EstimatorConfig): pipeline controls.
        evaluate(callable): evaluate(DistanceGrid) -> (theta, se); defaults to the bootstrap-weighted estimate.
        seed(int): seed for the default evaluator.
        jobs(int): parallel workers for the default evaluator.
        coordinate(int): theta coordinate monitored.
        max_ds(float): largest spacing considered; defaults to a quarter of the shorter region side.
        improvement_tol(float): relative s.e. improvement regarded as negligible.

    Returns:
        DistanceSelection: the grid, its estimate and an audit log; exhausted=True when the data range ran out.
    """  # noqa: E501
    if not 0 < phi < 1:
        raise InvalidSpecError(f'phi must lie in (0, 1), got {phi}.')
    config = (config or EstimatorConfig()).replace(bandwidth_s=bandwidth_s, ds_values=[2.0 * bandwidth_s])
    evaluate = evaluate or _grid_evaluator(data, config, seed, jobs, coordinate)
    step = 2.0 * bandwidth_s
    limit = max_ds if max_ds is not None else min(data.region) / 4.0
    audit = []

    def run(phase, ds_min, ds_max, decision_fn):
        grid = DistanceGrid.spanning(ds_min, ds_max, step, bandwidth_s, ds0=config.ds0)
        theta, se = evaluate(grid)
        entry = {'phase': phase, 'ds_min': ds_min, 'ds_max': ds_max, 'theta': theta, 'se': se, 'decision': ''}
        audit.append(entry)
        entry['decision'] = decision_fn(theta, se)
        return theta, se

    ds_min = ds_max = step
    theta, se = run('start', ds_min, ds_max, lambda t, s: 'initial')
    while True:
        while ds_max + step <= limit + 1e-12:
            candidate = ds_max + step
            t, s = run('grow_max', ds_min, candidate,
                       lambda t, s: 'accept' if s < se * (1.0 - improvement_tol) else 'stop')
            if audit[-1]['decision'] != 'accept':
                break
            ds_max, theta, se = candidate, t, s

        previous = theta
        probe = ds_min
        while probe + step <= ds_max + 1e-12:
            probe += step
            t, s = run('grow_min', probe, ds_max,
                       lambda t, s: 'stable' if abs(t - previous) < phi * s else 'moving')
            if audit[-1]['decision'] == 'stable':
                grid = DistanceGrid.spanning(probe, ds_max, step, bandwidth_s, ds0=config.ds0)
                log.info(f'Selected spacing range [{probe:g}, {ds_max:g}].')
                return DistanceSelection(grid=grid, theta=t, se=s, audit=audit)
            previous = t

        ds_min = probe if probe > ds_min else ds_min + step
        if ds_min > limit + 1e-12:
            break
        ds_max = max(ds_max, ds_min)
        theta, se = run('restart', ds_min, ds_max, lambda t, s: 'restart')

    log.warning('Spacing range exhausted before the estimates stabilized; returning the widest grid.')
    grid = DistanceGrid.spanning(step, max(ds_max, step), step, bandwidth_s, ds0=config.ds0)
    theta, se = evaluate(grid)
    return DistanceSelection(grid=grid, theta=theta, se=se, audit=audit, exhausted=True)


def residualize_covariates(data, columns=('y',)):
    """
    Remove linear location shifts of the covariates w from the given columns.

    kappa comes from least squares of each column on [1, w]; the tilde column is the original minus kappa' w (the
    intercept stays, so theta keeps its original scale). All-zero covariates get kappa = 0.

    Returns:
        Residualized: (data tilde, LinkModel).

    Raises:
        DataError: no covariates, or w (with an intercept) is rank deficient.
    """  # noqa: E501
    if not data.has_covariates:
        raise DataError('Dataset has no covariate columns.')
    unknown = set(columns) - {'y', 'x'}
    if unknown:
        raise InvalidSpecError(f'Only y and x can be residualized, got {sorted(unknown)}.')

    w = data.w
    names = data.covariate_columns
    active = np.flatnonzero(np.any(w != 0, axis=0))
    design = np.column_stack([np.ones(data.n), w[:, active]])
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise DataError('Covariates are rank deficient (collinear with each other or with the intercept).')

    kappas = {}
    updates = {}
    for column in ('y', 'x'):
        kappa = np.zeros(w.shape[1])
        if column in columns and len(active):
            values = data.frame[column].to_numpy(dtype=float)
            params = sm.OLS(values, design).fit().params
            kappa[active] = params[1:]
            updates[column] = values - w @ kappa
        kappas[column] = kappa

    link = LinkModel(kappa_y=kappas['y'], kappa_x=kappas['x'], kappa_z=kappas['x'].copy(), columns=names)
    log.info(f'Residualized {list(columns)} on covariates {names}: kappa_y={np.round(link.kappa_y, 4).tolist()}')
    return Residualized(data.with_values(**updates), link)


def _powers(values, degree):
    return np.asarray(values, dtype=float)[:, None] ** np.arange(degree + 1)


def _degree(kind):
    return 3 if kind in ('polynomial3', 'poly3_gauss') else 1


def _regressor(data, use_true_x):
    if use_true_x:
        if not data.oracle:
            raise DataError('The true regressor x_star is not available in this dataset.')
        return data.x_star.astype(float)
    return data.x.astype(float)


def ols(data, use_true_x=False, kind='linear'):
    """
    Least squares of y on powers of x (or of the true x_star) and the covariates, with conventional s.e.

    Returns:
        dict: theta, sigma_u, se (index coefficients only), delta (covariate coefficients), n.
    """
    degree = _degree(kind)
    exog = _powers(_regressor(data, use_true_x), degree)
    if data.has_covariates:
        exog = np.column_stack([exog, data.w])
    result = sm.OLS(data.y, exog).fit()
    params = np.asarray(result.params, dtype=float)
    bse = np.asarray(result.bse, dtype=float)
    return {'theta': params[:degree + 1], 'sigma_u': float(np.sqrt(result.scale)), 'se': bse[:degree + 1],
            'delta': params[degree + 1:], 'n': data.n}


def nearest_neighbor_values(data, column='x'):
    """
    Value of `column` at the nearest observation with a distinct location.

    Raises:
        DataError: fewer than two distinct locations.
    """
    locations = data.locations
    n = data.n
    if n < 2:
        raise DataError('The nearest-neighbor instrument needs at least two observations.')
    tree = spatial.cKDTree(locations)
    k = min(n, NEIGHBOR_QUERY)
    while True:
        dist, index = tree.query(locations, k=k)
        distinct = dist > 0
        if np.all(distinct.any(axis=1)) or k == n:
            break
        k = min(n, 4 * k)
    if not np.all(distinct.any(axis=1)):
        raise DataError('Some observations have no neighbor at a distinct location.')
    first = distinct.argmax(axis=1)
    values = data.frame[column].to_numpy(dtype=float)
    return values[index[np.arange(n), first]]


def iv_nearest_neighbor(data, kind='linear'):
    """
    Two-stage least squares with powers of the nearest distinct neighbor's x as instruments.

    Returns:
        dict: theta, sigma_u (from residuals at the observed x), se, delta, n.
    """
    degree = _degree(kind)
    x = data.x.astype(float)
    exog = _powers(x, degree)
    instruments = _powers(nearest_neighbor_values(data), degree)
    if data.has_covariates:
        exog = np.column_stack([exog, data.w])
        instruments = np.column_stack([instruments, data.w])

    fitted = exog.copy()
    for col in range(1, degree + 1):
        fitted[:, col] = sm.OLS(exog[:, col], instruments).fit().fittedvalues
    second = sm.OLS(data.y, fitted).fit()
    params = np.asarray(second.params, dtype=float)
    resid = data.y - exog @ params
    dof = data.n - exog.shape[1]
    sigma2 = float(resid @ resid / dof)
    cov = sigma2 * np.linalg.pinv(fitted.T @ fitted)
    se = np.sqrt(np.diag(cov))
    return {'theta': params[:degree + 1], 'sigma_u': float(np.sqrt(sigma2)), 'se': se[:degree + 1],
            'delta': params[degree + 1:], 'n': data.n}


def probit_mle(data, use_true_x=False):
    """
    Probit maximum likelihood of binary y on [1, x] (or the true x_star) and the covariates.

    Returns:
        dict: theta, se, delta, n.
    """
    y = data.y
    if not np.all(np.isin(y, (0.0, 1.0))):
        raise DataError('Probit estimation needs a binary outcome.')
    exog = _powers(_regressor(data, use_true_x), 1)
    if data.has_covariates:
        exog = np.column_stack([exog, data.w])
    result = sm.Probit(y, exog).fit(disp=0)
    params = np.asarray(result.params, dtype=float)
    bse = np.asarray(result.bse, dtype=float)
    return {'theta': params[:2], 'se': bse[:2], 'delta': params[2:], 'n': data.n}


def me_effect_test(beta_robust, se_robust, beta_naive, se_naive):
    """
    Conservative test of a measurement-error effect: |b_robust - b_naive| / (se_robust + se_naive) against standard
    normal critical values.

    Returns:
        dict: statistic and, per level, significance one-sided and two-sided.
    """  # noqa: E501
    if not (se_robust > 0 and se_naive > 0):
        raise InvalidSpecError('Standard errors must be positive.')
    statistic = abs(float(beta_robust) - float(beta_naive)) / (float(se_robust) + float(se_naive))
    significant_at = {}
    for level in SIGNIFICANCE_LEVELS:
        significant_at[str(level)] = {
            'one_sided': bool(statistic > stats.norm.ppf(1.0 - level)),
            'two_sided': bool(statistic > stats.norm.ppf(1.0 - level / 2.0)),
        }
    return {'statistic': statistic, 'significant_at': significant_at}


def quartile_points(values):
    """First, second and third quartile of the values."""
    return np.percentile(np.asarray(values, dtype=float), [25, 50, 75])


def quartile_curve(theta, points):
    """
    g(x*) = theta_1 + theta_2 x* + ... evaluated at the given points.
    """
    return np.polyval(np.asarray(theta, dtype=float)[::-1], np.asarray(points, dtype=float))
