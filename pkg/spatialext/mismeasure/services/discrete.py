"""
********************************************************************************
* Name: discrete.py
* Created On: March 7, 2026
********************************************************************************
"""
import json
import logging
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

import numpy as np
import pandas as pd
import param
import statsmodels.api as sm
from scipy import optimize, special, stats

from ..exceptions import DataError, InvalidSpecError
from ..models import Dataset, SpecBase
from ..utilities import json_serializer
from .mle import OutcomeModel

log = logging.getLogger(f'mismeasure.{__name__}')

__all__ = [
    'MisclassMatrix', 'DiscreteModel', 'DiscreteConfig', 'DiscreteFitResult', 'pool_categories',
    'discrete_likelihood', 'fit_discrete', 'to_simplex', 'from_simplex', 'is_mode_preserving',
    'misclassification_frame', 'write_misclassification',
]

STOCHASTIC_TOL = 1e-8


def to_simplex(u, axis=0):
    """
    Map k-1 unconstrained coordinates to a point of the k-simplex (first category is the reference).
    """
    u = np.asarray(u, dtype=float)
    pad = [(0, 0)] * u.ndim
    pad[axis] = (1, 0)
    return special.softmax(np.pad(u, pad), axis=axis)


def from_simplex(p, axis=0):
    """
    Inverse of to_simplex: log-ratios against the first category.
    """
    p = np.asarray(p, dtype=float)
    log_p = np.log(p)
    reference = np.take(log_p, [0], axis=axis)
    return np.delete(log_p - reference, 0, axis=axis)


def is_mode_preserving(p):
    """
    True when every column j has its strict maximum on the diagonal.
    """
    p = np.asarray(p, dtype=float)
    off_diagonal = p - np.diag(np.diag(p)) - np.eye(len(p))
    return bool(np.all(np.diag(p) > off_diagonal.max(axis=0)))


class MisclassMatrix(object):
    """
    Column-stochastic misclassification matrix p[i, j] = P[X = i | X* = j].

    Args:
        p(array-like): square matrix.
        mode_preserving(bool): also require argmax_i p[i, j] = j for every column (ties rejected).
    """
    def __init__(self, p, mode_preserving=True):
        p = np.asarray(p, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise InvalidSpecError(f'A misclassification matrix must be square, got shape {p.shape}.')
        if np.any(p < 0) or not np.allclose(p.sum(axis=0), 1.0, atol=STOCHASTIC_TOL):
            raise InvalidSpecError('Misclassification matrix columns must be nonnegative and sum to 1.')
        if mode_preserving and not is_mode_preserving(p):
            raise InvalidSpecError('Misclassification matrix is not mode-preserving.')
        self.p = p
        self.mode_preserving = mode_preserving

    def __repr__(self):
        return f'<MisclassMatrix k={self.k} diagonal={np.round(np.diag(self.p), 3).tolist()}>'

    @property
    def k(self):
        return self.p.shape[0]

    def to_frame(self):
        return misclassification_frame(self.p)


@dataclass
class DiscreteModel:
    """
    Latent-category likelihood: pi = P[X* = j], mis_x = f(x | x*), mis_z = f(z | x*), linear-Gaussian outcome.
    """
    pi: np.ndarray
    mis_x: MisclassMatrix
    mis_z: MisclassMatrix
    outcome: OutcomeModel

    def __post_init__(self):
        self.pi = np.asarray(self.pi, dtype=float)
        if np.any(self.pi < 0) or abs(self.pi.sum() - 1.0) > STOCHASTIC_TOL:
            raise InvalidSpecError('pi must lie on the simplex.')
        if not (len(self.pi) == self.mis_x.k == self.mis_z.k):
            raise InvalidSpecError('pi and the misclassification matrices disagree on the number of categories.')

    @property
    def k(self):
        return len(self.pi)

    def to_dict(self):
        return {
            'pi': self.pi.tolist(),
            'mis_x': self.mis_x.p.tolist(),
            'mis_z': self.mis_z.p.tolist(),
            'outcome': self.outcome.to_dict(),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), default=json_serializer, sort_keys=True)


class DiscreteConfig(SpecBase):
    """
    Optimizer controls for the misclassification likelihood.
    """
    categories = param.Integer(default=4, bounds=(2, None), constant=True)
    multistarts = param.Integer(default=5, bounds=(1, None), constant=True)
    max_iter = param.Integer(default=500, bounds=(1, None), constant=True)
    tol = param.Number(default=1e-7, bounds=(0, None), inclusive_bounds=(False, True), constant=True)
    start_spread = param.Number(default=0.5, bounds=(0, None), constant=True)


@dataclass
class DiscreteFitResult:
    model: DiscreteModel
    theta_hat: np.ndarray
    loglik: float
    converged: bool
    mode_preserving: bool
    relabeling: str = 'identity'
    ties: bool = False
    start_objectives: list = dataclass_field(default_factory=list)
    n_used: int = 0
    seed: object = None

    @property
    def sigma_u(self):
        return self.model.outcome.sigma_u

    def to_dict(self):
        return {
            'model': self.model.to_dict(),
            'theta_hat': np.asarray(self.theta_hat).tolist(),
            'loglik': self.loglik,
            'converged': self.converged,
            'mode_preserving': self.mode_preserving,
            'relabeling': self.relabeling,
            'ties': self.ties,
            'start_objectives': self.start_objectives,
            'n_used': self.n_used,
            'seed': self.seed,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), default=json_serializer, sort_keys=True)


def pool_categories(data, source, into):
    """
    Relabel every occurrence of category `source` as `into` (x, and z when present).

    Raises:
        DataError: the dataset is not discrete or `into` is not a category of the schema.
    """
    if not data.discrete:
        raise DataError('Category pooling applies to discrete datasets only.')
    categories = data.categories
    if into not in categories:
        raise DataError(f'Cannot pool into category {into}: categories are {categories}.')
    if source not in categories:
        return data.with_values()

    columns = {'x': np.where(data.x == source, into, data.x)}
    if data.z is not None:
        columns['z'] = np.where(data.z == source, into, data.z)
    pooled = data.with_values(**columns)
    pooled.set_attribute('categories', [c for c in categories if c != source])
    log.info(f'Pooled category {source} into {into} ({int(np.sum(data.x == source))} observation(s)).')
    return pooled


def discrete_likelihood(y, x, z, model):
    """
    Sum over latent categories j of N(y; theta_1 + theta_2 j, sigma_u^2) pi[j] mis_x[x, j] mis_z[z, j].

    Returns:
        float|numpy.ndarray: likelihood value(s).
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=int)
    z = np.asarray(z, dtype=int)
    scalar = y.ndim == 0
    y, x, z = np.atleast_1d(y), np.atleast_1d(x), np.atleast_1d(z)
    levels = np.arange(model.k)
    fy = stats.norm.pdf(y[:, None], loc=model.outcome.index(levels)[None, :], scale=model.outcome.sigma_u)
    terms = fy * model.pi[None, :] * model.mis_x.p[x, :] * model.mis_z.p[z, :]
    values = terms.sum(axis=1)
    return float(values[0]) if scalar else values


class _DiscreteProblem(object):
    """
    Negative mean log-likelihood over (theta, log sigma, pi, mis_x, mis_z) in unconstrained coordinates.
    """
    def __init__(self, y, x, z, k):
        self.y = np.asarray(y, dtype=float)
        self.k = k
        self.n = len(self.y)
        self.levels = np.arange(k)
        self.onehot_x = np.eye(k)[np.asarray(x, dtype=int)]
        self.onehot_z = np.eye(k)[np.asarray(z, dtype=int)]
        block = k * (k - 1)
        bounds = np.cumsum([0, 2, 1, k - 1, block, block])
        names = ['theta', 'log_sigma', 'pi', 'mis_x', 'mis_z']
        self.slices = {name: slice(bounds[m], bounds[m + 1]) for m, name in enumerate(names)}
        self.size = int(bounds[-1])

    def pack(self, theta, sigma, pi, mis_x, mis_z):
        p = np.zeros(self.size)
        p[self.slices['theta']] = theta
        p[self.slices['log_sigma']] = np.log(sigma)
        p[self.slices['pi']] = from_simplex(pi)
        p[self.slices['mis_x']] = from_simplex(mis_x, axis=0).ravel()
        p[self.slices['mis_z']] = from_simplex(mis_z, axis=0).ravel()
        return p

    def unpack(self, p):
        k = self.k
        theta = p[self.slices['theta']]
        sigma = float(np.exp(p[self.slices['log_sigma']][0]))
        pi = to_simplex(p[self.slices['pi']])
        mis_x = to_simplex(p[self.slices['mis_x']].reshape(k - 1, k), axis=0)
        mis_z = to_simplex(p[self.slices['mis_z']].reshape(k - 1, k), axis=0)
        return theta, sigma, pi, mis_x, mis_z

    def objective(self, p):
        theta, sigma, pi, mis_x, mis_z = self.unpack(p)
        mean = theta[0] + theta[1] * self.levels
        r = (self.y[:, None] - mean[None, :]) / sigma
        fy = np.exp(-0.5 * r ** 2) / (sigma * np.sqrt(2.0 * np.pi))
        terms = fy * pi[None, :] * (self.onehot_x @ mis_x) * (self.onehot_z @ mis_z)
        likelihood = terms.sum(axis=1)
        if not np.all(np.isfinite(likelihood)) or np.any(likelihood <= 0):
            return np.inf, np.zeros(self.size)

        share = terms / likelihood[:, None]
        n = self.n
        grad = np.zeros(self.size)
        grad[self.slices['theta']] = -np.array([np.sum(share * r / sigma), np.sum(share * r / sigma * self.levels)]) / n
        grad[self.slices['log_sigma']] = -np.sum(share * (r ** 2 - 1.0)) / n
        weight = share.mean(axis=0)
        grad[self.slices['pi']] = -(weight - pi)[1:]
        for key, onehot, matrix in (('mis_x', self.onehot_x, mis_x), ('mis_z', self.onehot_z, mis_z)):
            g = onehot.T @ share / n - matrix * weight[None, :]
            grad[self.slices[key]] = -g[1:].ravel()
        return float(-np.mean(np.log(likelihood))), grad

    def loglik(self, p):
        value, _ = self.objective(p)
        return -value * self.n


def _reverse(theta, pi, mis_x, mis_z):
    """
    Relabel latent categories j -> k - 1 - j; the likelihood is unchanged.
    """
    k = len(pi)
    flipped = (theta[0] + (k - 1) * theta[1], -theta[1])
    return np.array(flipped), pi[::-1].copy(), mis_x[:, ::-1].copy(), mis_z[:, ::-1].copy()


def _canonicalize(theta, pi, mis_x, mis_z):
    """
    Apply the likelihood-invariant relabeling (identity or reversal) that makes mis_x mode-preserving.

    Returns:
        tuple: (theta, pi, mis_x, mis_z, relabeling or None when neither works)
    """
    if is_mode_preserving(mis_x):
        return theta, pi, mis_x, mis_z, 'identity'
    reversed_ = _reverse(theta, pi, mis_x, mis_z)
    if is_mode_preserving(reversed_[2]):
        return (*reversed_, 'reversal')
    return theta, pi, mis_x, mis_z, None


def _has_ties(mis_x, atol=1e-9):
    top = mis_x.max(axis=0)
    return bool(np.any((np.abs(mis_x - top[None, :]) <= atol).sum(axis=0) > 1))


def _starting_points(problem, y, x, config, rng):
    k = problem.k
    ols = sm.OLS(y, sm.add_constant(x.astype(float), has_constant='add')).fit()
    theta = np.asarray(ols.params, dtype=float)
    sigma = float(np.sqrt(max(ols.scale, 1e-6)))
    counts = np.bincount(x, minlength=k).astype(float) + 1.0
    pi = counts / counts.sum()
    mis_x = np.full((k, k), 0.3 / (k - 1))
    np.fill_diagonal(mis_x, 0.7)
    mis_z = np.full((k, k), 0.5 / (k - 1))
    np.fill_diagonal(mis_z, 0.5)

    base = problem.pack(theta, sigma, pi, mis_x, mis_z)
    starts = [base]
    while len(starts) < config.multistarts:
        noise = rng.standard_normal(problem.size) * config.start_spread
        noise[problem.slices['theta']] *= np.abs(theta) + 0.1
        noise[problem.slices['log_sigma']] *= 0.2
        starts.append(base + noise)
    return starts


def fit_discrete(data, config=None, seed=None):
    """
    Maximize the misclassification likelihood over (theta, sigma_u, pi, mis_x, mis_z).

    Simplex parameters are optimized in log-ratio coordinates by BFGS from several seeded starts. At exit each
    start is relabeled (identity or reversal) so that mis_x is mode-preserving; a start for which neither relabeling
    is mode-preserving is rejected.

    Args:
        data(Dataset): discrete dataset with pseudo-instrument categories in column z.
        config(DiscreteConfig): optimizer controls.
        seed(int|numpy.random.SeedSequence): seed for the perturbed starts.

    Returns:
        DiscreteFitResult: the best accepted fit.
    """  # noqa: E501
    config = config or DiscreteConfig()
    if not data.discrete:
        raise DataError('fit_discrete requires a discrete dataset.')
    if data.z is None:
        raise DataError('Dataset has no pseudo-instrument column "z".')

    k = config.categories
    x, z, y = data.x, data.z, data.y
    usable = (z >= 0)
    x, z, y = x[usable], z[usable], y[usable]
    if np.any((x < 0) | (x >= k)) or np.any(z >= k):
        raise DataError(f'Categories must lie in 0..{k - 1}; pool rare categories first.')

    problem = _DiscreteProblem(y, x, z, k)
    rng = np.random.default_rng(seed)
    outcomes = []
    for m, start in enumerate(_starting_points(problem, y, x, config, rng)):
        result = optimize.minimize(problem.objective, start, jac=True, method='BFGS',
                                   options={'maxiter': config.max_iter, 'gtol': config.tol})
        theta, sigma, pi, mis_x, mis_z = problem.unpack(result.x)
        theta, pi, mis_x, mis_z, relabeling = _canonicalize(theta, pi, mis_x, mis_z)
        log.debug(f'Discrete start {m}: objective={result.fun:.6f} status={result.status} relabeling={relabeling}')
        outcomes.append(dict(objective=float(result.fun), status=int(result.status), theta=theta, sigma=sigma,
                             pi=pi, mis_x=mis_x, mis_z=mis_z, relabeling=relabeling))

    accepted = [o for o in outcomes if o['relabeling'] is not None and np.isfinite(o['objective'])]
    if not accepted:
        log.warning('No multistart reached a mode-preserving optimum; reporting the best objective unconstrained.')
    best = min(accepted or outcomes, key=lambda o: o['objective'])

    ties = _has_ties(best['mis_x'])
    if ties:
        log.warning('Mode constraint has ties at the optimum; the smallest index wins.')

    outcome = OutcomeModel(kind='linear_gauss', theta=[float(t) for t in best['theta']], sigma_u=best['sigma'])
    mode_preserving = best['relabeling'] is not None
    model = DiscreteModel(
        pi=best['pi'],
        mis_x=MisclassMatrix(best['mis_x'], mode_preserving=mode_preserving and not ties),
        mis_z=MisclassMatrix(best['mis_z'], mode_preserving=False),
        outcome=outcome,
    )
    return DiscreteFitResult(
        model=model,
        theta_hat=np.asarray(best['theta'], dtype=float),
        loglik=-best['objective'] * problem.n,
        converged=bool(mode_preserving and best['status'] == 0),
        mode_preserving=mode_preserving,
        relabeling=best['relabeling'] or 'none',
        ties=ties,
        start_objectives=[o['objective'] for o in outcomes],
        n_used=problem.n,
        seed=seed if isinstance(seed, (int, type(None))) else str(seed),
    )


def misclassification_frame(p, row_label='X', column_label='X*'):
    """
    Matrix as a table with rows "X=i" and columns "X*=j".
    """
    p = np.asarray(p, dtype=float)
    k = p.shape[0]
    return pd.DataFrame(p, index=[f'{row_label}={i}' for i in range(k)],
                        columns=[f'{column_label}={j}' for j in range(k)])


def write_misclassification(result, directory):
    """
    Write mis_x.csv, mis_z.csv and model.json for a discrete fit.

    Returns:
        list: written paths.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, matrix, label in (('mis_x', result.model.mis_x, 'X'), ('mis_z', result.model.mis_z, 'Z')):
        path = directory / f'{name}.csv'
        misclassification_frame(matrix.p, row_label=label).to_csv(path, float_format='%.6f')
        paths.append(path)
    path = directory / 'model.json'
    with open(path, 'w') as f:
        json.dump(result.to_dict(), f, default=json_serializer, sort_keys=True, indent=2)
    paths.append(path)
    return paths
