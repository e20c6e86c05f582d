"""
********************************************************************************
* Name: mle.py
* Created On: March 6, 2026
********************************************************************************
"""
import json
import logging
from dataclasses import dataclass, field as dataclass_field

import numpy as np
import param
import statsmodels.api as sm
from scipy import linalg, optimize, special, stats

from ..exceptions import DataError, InvalidSpecError
from ..models import SpecBase
from ..utilities import json_serializer
from .sieve import (
    SieveBasis, SqrtSieve1D, SqrtSieve2D, CenteringFunctional, basis_p1, basis_pm, basis_q,
    build_constraint_transform, centering_matrix, centering_moment_residuals, centering_residuals, fit_sqrt_conditional,
    fit_sqrt_density, gauss_legendre, sieve_to_dict, unit_mass_residuals,
)

log = logging.getLogger(f'mismeasure.{__name__}')

__all__ = [
    'OutcomeModel', 'LikelihoodConfig', 'FitResult', 'SieveLikelihood', 'outcome_density', 'likelihood_values',
    'likelihood_point', 'fit', 'basis_from_data', 'numeric_gradient', 'OUTCOME_KINDS',
]

LIKELIHOOD_FLOOR = 1e-300
SQRT_2PI = np.sqrt(2.0 * np.pi)
OUTCOME_KINDS = {'linear': 'linear_gauss', 'polynomial3': 'poly3_gauss', 'probit': 'probit'}
THETA_LENGTHS = {'linear_gauss': 2, 'poly3_gauss': 4, 'probit': 2}
ERROR_SUPPORT_SDS = 4.0
NEIGHBOR_SUPPORT_SDS = 3.0
X_SUPPORT_PAD = 0.1
MIXING_SCALE = 0.3


class OutcomeModel(SpecBase):
    """
    Parametric outcome density f(y | x*, w): Gaussian around an affine / cubic index, or probit.

    theta holds the index coefficients (intercept first); eta is sigma_u for the Gaussian kinds. delta holds
    location-shift coefficients on the covariates w.
    """  # noqa: E501
    kind = param.Selector(default='linear_gauss', objects=list(THETA_LENGTHS), constant=True)
    theta = param.List(default=[0.0, 1.0], constant=True)
    sigma_u = param.Number(default=1.0, bounds=(0, None), inclusive_bounds=(False, True), allow_None=True,
                           constant=True)
    delta = param.List(default=[], constant=True)

    def validate(self):
        expected = THETA_LENGTHS[self.kind]
        if len(self.theta) != expected:
            raise InvalidSpecError(f'OutcomeModel: kind "{self.kind}" requires {expected} theta coefficients.')
        if self.gaussian and self.sigma_u is None:
            raise InvalidSpecError(f'OutcomeModel: kind "{self.kind}" requires sigma_u > 0.')

    @property
    def gaussian(self):
        return self.kind != 'probit'

    @classmethod
    def from_design(cls, design):
        """Outcome model matching a simulation OutcomeDesign."""
        kind = OUTCOME_KINDS[design.kind]
        sigma = design.sigma_u if kind != 'probit' else None
        return cls(kind=kind, theta=list(design.theta), sigma_u=sigma)

    def index(self, x_star, w=None):
        x_star = np.asarray(x_star, dtype=float)
        value = np.polyval(np.asarray(self.theta, dtype=float)[::-1], x_star)
        if w is not None and len(self.delta):
            value = value + np.asarray(w, dtype=float) @ np.asarray(self.delta, dtype=float)
        return value


class LikelihoodConfig(SpecBase):
    """
    Quadrature, penalty schedule and optimizer controls for the sieve likelihood.
    """
    quad_nodes = param.Integer(default=48, bounds=(32, None), constant=True)
    penalty_schedule = param.List(default=[1e2, 1e3, 1e4, 1e5], constant=True)
    tol = param.Number(default=1e-6, bounds=(0, None), inclusive_bounds=(False, True), constant=True)
    max_iter = param.Integer(default=400, bounds=(1, None), constant=True)
    multistarts = param.Integer(default=5, bounds=(1, None), constant=True)
    residual_tol = param.Number(default=1e-4, bounds=(0, None), inclusive_bounds=(False, True), constant=True)
    spread_tol = param.Number(default=1e-3, bounds=(0, None), constant=True)

    def validate(self):
        schedule = [float(m) for m in self.penalty_schedule]
        if not schedule or any(m <= 0 for m in schedule):
            raise InvalidSpecError('LikelihoodConfig: penalty weights must be positive.')
        if any(b <= a for a, b in zip(schedule, schedule[1:])):
            raise InvalidSpecError('LikelihoodConfig: penalty schedule must be increasing.')


@dataclass
class FitResult:
    """
    Outcome of one sieve maximum likelihood fit at a fixed spacing.
    """
    theta_hat: np.ndarray
    eta_hat: dict
    sieves: tuple
    basis: SieveBasis
    kind: str
    loglik: float
    constraint_residual_norm: float
    converged: bool
    iterations: int
    seed: object = None
    n_used: int = 0
    start_objectives: list = dataclass_field(default_factory=list)
    spread_flag: bool = False
    stages: list = dataclass_field(default_factory=list)
    params: np.ndarray = None

    @property
    def model(self):
        return OutcomeModel(kind=self.kind, theta=[float(t) for t in self.theta_hat],
                            sigma_u=self.eta_hat.get('sigma_u'), delta=list(self.eta_hat.get('delta', [])))

    def to_dict(self):
        return {
            'kind': self.kind,
            'theta_hat': np.asarray(self.theta_hat).tolist(),
            'eta_hat': self.eta_hat,
            'sieves': sieve_to_dict(self.basis, self.sieves),
            'loglik': self.loglik,
            'constraint_residual_norm': self.constraint_residual_norm,
            'converged': self.converged,
            'iterations': self.iterations,
            'seed': self.seed,
            'n_used': self.n_used,
            'start_objectives': self.start_objectives,
            'spread_flag': self.spread_flag,
            'stages': self.stages,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), default=json_serializer, sort_keys=True)


def outcome_density(model, y, x_star, w=None):
    """
    f(y | x*, w) under the outcome model (arguments broadcast).

    Returns:
        numpy.ndarray: density (Gaussian kinds) or probability of y (probit).
    """
    index = model.index(x_star, w)
    y = np.asarray(y, dtype=float)
    if model.gaussian:
        if model.sigma_u is None or model.sigma_u <= 0:
            raise InvalidSpecError('Outcome density requires sigma_u > 0.')
        return stats.norm.pdf(y, loc=index, scale=model.sigma_u)
    return np.exp(y * special.log_ndtr(index) + (1.0 - y) * special.log_ndtr(-index))


class SieveLikelihood(object):
    """
    Penalized negative mean log-likelihood of (y, x, z) under the outcome model and three square-root sieves.

    The x* integral of each observation runs over the part of [x0, x0 + l_x] where both conditional sieves have
    support, with Gauss-Legendre nodes mapped per observation.
    """  # noqa: E501
    def __init__(self, y, x, z, kind, basis, functional, config, w=None):
        y = np.asarray(y, dtype=float)
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        self.kind = kind
        self.basis = basis
        self.functional = functional
        self.config = config
        self.gaussian = kind != 'probit'
        self.d_theta = THETA_LENGTHS[kind]

        lo = np.maximum.reduce([np.full_like(x, basis.x0), x - basis.l_1, z - basis.l_2])
        hi = np.minimum.reduce([np.full_like(x, basis.x1), x + basis.l_1, z + basis.l_2])
        self.valid = hi > lo
        if not np.any(self.valid):
            raise DataError('No observation is compatible with the sieve supports.')

        keep = self.valid
        self.y, self.x, self.z = y[keep], x[keep], z[keep]
        self.w = None if w is None else np.atleast_2d(np.asarray(w, dtype=float).reshape(len(y), -1))[keep]
        self.d_delta = 0 if self.w is None else self.w.shape[1]
        self.n = len(self.y)

        nodes, weights = gauss_legendre(-1.0, 1.0, config.quad_nodes)
        half = 0.5 * (hi[keep] - lo[keep])
        self.t = lo[keep][:, None] + half[:, None] * (nodes[None, :] + 1.0)
        self.omega = half[:, None] * weights[None, :]

        self.shape2 = basis.shape_of('x')
        self.shape3 = basis.shape_of('z')
        self.i1 = basis.i_of(1)
        self.P1 = basis_p1(basis, self.t)
        self.A2 = basis_pm(basis, self.x[:, None] - self.t, 'x')
        self.A3 = basis_pm(basis, self.z[:, None] - self.t, 'z')
        self.Q2 = basis_q(basis, self.t, self.shape2[1] - 1)
        self.Q3 = basis_q(basis, self.t, self.shape3[1] - 1)
        self.powers = self.t[..., None] ** np.arange(self.d_theta)

        self.T2 = build_constraint_transform(basis, self.shape2[1] - 1)
        self.T3 = build_constraint_transform(basis, self.shape3[1] - 1)
        self.C2 = centering_matrix(basis, functional, 'x')

        sizes = [self.d_theta, 1 if self.gaussian else 0, self.d_delta, self.i1 + 1,
                 self.shape2[0] * self.shape2[1], self.shape3[0] * self.shape3[1]]
        bounds = np.cumsum([0] + sizes)
        names = ['theta', 'log_sigma', 'delta', 'alpha', 'lam2', 'lam3']
        self.slices = {name: slice(bounds[k], bounds[k + 1]) for k, name in enumerate(names)}
        self.size = int(bounds[-1])

    @property
    def n_dropped(self):
        return int(np.sum(~self.valid))

    def pack(self, theta, sigma_u, delta, alpha, lam2, lam3):
        p = np.zeros(self.size)
        p[self.slices['theta']] = theta
        if self.gaussian:
            p[self.slices['log_sigma']] = np.log(sigma_u)
        if self.d_delta:
            p[self.slices['delta']] = delta
        p[self.slices['alpha']] = alpha
        p[self.slices['lam2']] = np.asarray(lam2).ravel()
        p[self.slices['lam3']] = np.asarray(lam3).ravel()
        return p

    def unpack(self, p):
        theta = p[self.slices['theta']]
        sigma = float(np.exp(p[self.slices['log_sigma']][0])) if self.gaussian else None
        delta = p[self.slices['delta']]
        alpha = p[self.slices['alpha']]
        lam2 = p[self.slices['lam2']].reshape(self.shape2)
        lam3 = p[self.slices['lam3']].reshape(self.shape3)
        return theta, sigma, delta, alpha, lam2, lam3

    def _terms(self, p):
        theta, sigma, delta, alpha, lam2, lam3 = self.unpack(p)
        s1 = self.P1 @ alpha
        s2 = np.einsum('nka,ab,nkb->nk', self.A2, lam2, self.Q2)
        s3 = np.einsum('nka,ab,nkb->nk', self.A3, lam3, self.Q3)
        index = self.powers @ theta
        if self.d_delta:
            index = index + (self.w @ delta)[:, None]

        y = self.y[:, None]
        if self.gaussian:
            r = (y - index) / sigma
            fy = np.exp(-0.5 * r ** 2) / (sigma * SQRT_2PI)
            dlog_index = r / sigma
            dlog_sigma = r ** 2 - 1.0
        else:
            log_up = special.log_ndtr(index)
            log_down = special.log_ndtr(-index)
            fy = np.exp(y * log_up + (1.0 - y) * log_down)
            log_pdf = stats.norm.logpdf(index)
            dlog_index = y * np.exp(log_pdf - log_up) - (1.0 - y) * np.exp(log_pdf - log_down)
            dlog_sigma = None

        base = self.omega * fy
        core = base * s1 ** 2 * s2 ** 2 * s3 ** 2
        return dict(theta=theta, alpha=alpha, lam2=lam2, lam3=lam3, s1=s1, s2=s2, s3=s3, base=base, core=core,
                    dlog_index=dlog_index, dlog_sigma=dlog_sigma)

    def values(self, p):
        """Per-observation likelihood (not floored)."""
        return self._terms(p)['core'].sum(axis=1)

    def loglik(self, p):
        """Total log-likelihood at p."""
        return float(np.sum(np.log(np.maximum(self.values(p), LIKELIHOOD_FLOOR))))

    def penalty(self, p, with_grad=False):
        """
        Squared constraint violations: unit-norm alpha, unit-mass rows of both blocks, centering moments of f2.
        """
        _, _, _, alpha, lam2, lam3 = self.unpack(p)
        grad = np.zeros(self.size)

        norm_gap = alpha @ alpha - 1.0
        value = norm_gap ** 2
        grad[self.slices['alpha']] = 4.0 * norm_gap * alpha

        g2 = np.zeros_like(lam2)
        for sieve, transform, key in ((lam2, self.T2, 'lam2'), (lam3, self.T3, 'lam3')):
            residual = unit_mass_residuals(SqrtSieve2D(sieve), transform)
            value += residual @ residual
            size = sieve.shape[1]
            gm = (2.0 * transform @ residual).reshape(size, size)
            g = sieve @ (gm + gm.T)
            if key == 'lam2':
                g2 += g
            else:
                grad[self.slices['lam3']] = g.ravel()

        centering = centering_moment_residuals(SqrtSieve2D(lam2), self.T2, self.C2)
        value += centering @ centering
        size = lam2.shape[1]
        gc = (2.0 * self.T2 @ centering).reshape(size, size)
        g2 += self.C2 @ lam2 @ (gc + gc.T)
        grad[self.slices['lam2']] = g2.ravel()

        if with_grad:
            return float(value), grad
        return float(value)

    def objective(self, p, mu):
        """
        Penalized negative mean log-likelihood and its analytic gradient.
        """
        terms = self._terms(p)
        core = terms['core']
        likelihood = core.sum(axis=1)
        if not np.all(np.isfinite(likelihood)):
            return np.inf, np.zeros(self.size)

        active = likelihood > LIKELIHOOD_FLOOR
        safe = np.where(active, likelihood, 1.0)
        nll = -np.mean(np.log(np.where(active, likelihood, LIKELIHOOD_FLOOR)))

        share = np.where(active[:, None], core / safe[:, None], 0.0) / self.n
        grad = np.zeros(self.size)
        grad[self.slices['theta']] = -np.einsum('nk,nk,nkm->m', share, terms['dlog_index'], self.powers)
        if self.gaussian:
            grad[self.slices['log_sigma']] = -np.sum(share * terms['dlog_sigma'])
        if self.d_delta:
            grad[self.slices['delta']] = -(share * terms['dlog_index']).sum(axis=1) @ self.w

        s1, s2, s3, base = terms['s1'], terms['s2'], terms['s3'], terms['base']
        scale = np.where(active, 1.0 / safe, 0.0)[:, None] / self.n
        e1 = base * 2.0 * s1 * s2 ** 2 * s3 ** 2 * scale
        e2 = base * s1 ** 2 * 2.0 * s2 * s3 ** 2 * scale
        e3 = base * s1 ** 2 * s2 ** 2 * 2.0 * s3 * scale
        grad[self.slices['alpha']] = -np.einsum('nk,nka->a', e1, self.P1)
        grad[self.slices['lam2']] = -np.einsum('nk,nka,nkb->ab', e2, self.A2, self.Q2).ravel()
        grad[self.slices['lam3']] = -np.einsum('nk,nka,nkb->ab', e3, self.A3, self.Q3).ravel()

        penalty, penalty_grad = self.penalty(p, with_grad=True)
        return float(nll + mu * penalty), grad + mu * penalty_grad

    def finalize(self, p):
        """
        Exact unit norm for alpha and unit constant mass coefficient for both blocks.
        """
        theta, sigma, delta, alpha, lam2, lam3 = self.unpack(p)
        alpha = alpha / np.linalg.norm(alpha)
        blocks = []
        for lam, transform in ((lam2, self.T2), (lam3, self.T3)):
            r0 = unit_mass_residuals(SqrtSieve2D(lam), transform)[0] + 1.0
            blocks.append(lam / np.sqrt(r0) if r0 > 0 else lam)
        return self.pack(theta, sigma, delta, alpha, blocks[0], blocks[1])

    def residual_norm(self, p):
        return float(np.sqrt(self.penalty(p)))


def numeric_gradient(func, p, step=1e-5):
    """
    Central-difference gradient with step 1e-5 (1 + |p_k|).
    """
    p = np.asarray(p, dtype=float)
    grad = np.zeros_like(p)
    for k in range(len(p)):
        h = step * (1.0 + abs(p[k]))
        up, down = p.copy(), p.copy()
        up[k] += h
        down[k] -= h
        grad[k] = (func(up) - func(down)) / (2.0 * h)
    return grad


def likelihood_values(y, x, z, model, sieves, basis, config=None, functional=None, w=None):
    """
    Likelihood of each (y, x, z) observation under an outcome model and sieve densities.
    Observations incompatible with the sieve supports get 0.
    """
    config = config or LikelihoodConfig()
    functional = functional or CenteringFunctional()
    y = np.atleast_1d(np.asarray(y, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    delta = list(model.delta) if len(model.delta) else []
    problem = SieveLikelihood(y, x, z, model.kind, basis, functional, config, w=w if delta else None)
    f1, f2, f3 = sieves
    p = problem.pack(model.theta, model.sigma_u, delta, f1.alpha, f2.lam, f3.lam)
    out = np.zeros(len(y))
    out[problem.valid] = problem.values(p)
    return out


def likelihood_point(y, x, z, model, sieves, basis, config=None, functional=None, w=None):
    """
    Likelihood of one observation: x*-integral of f(y|x*) f1(x*) f2(x|x*) f3(z|x*).
    """
    value = likelihood_values([y], [x], [z], model, sieves, basis, config, functional,
                              None if w is None else np.atleast_2d(w))[0]
    if not np.isfinite(value):
        return -np.inf
    return float(value)


def basis_from_data(x, z, truncations=None):
    """
    Sieve supports from the data: x* on [min x, max x] widened by 10% of the range at each end; x - x* half-length
    4 error std devs, with the error variance guessed as Var(x) - Cov(x, z); z - x* half-length 3 std devs of z - x.

    Args:
        truncations(dict): i_n, j_n and per-density overrides; defaults to (4 | 6,4 | 4,4).
    """  # noqa: E501
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    var_x = float(np.var(x, ddof=1))
    sigma_v = np.sqrt(max(var_x - float(np.cov(x, z)[0, 1]), 0.01 * var_x))
    sd_x = np.sqrt(var_x)
    l_1 = max(ERROR_SUPPORT_SDS * sigma_v, 0.25 * sd_x)
    l_2 = max(NEIGHBOR_SUPPORT_SDS * float(np.std(z - x, ddof=1)), 0.25 * sd_x)
    span = float(np.max(x) - np.min(x))
    if span <= 0:
        raise DataError('The observed covariate has no spread.')
    pad = X_SUPPORT_PAD * span
    supports = dict(x0=float(np.min(x)) - pad, l_x=span + 2.0 * pad, l_1=float(l_1), l_2=float(l_2))
    if truncations is None:
        return SieveBasis.study_default(**supports)
    return SieveBasis(**supports, **truncations)


def _design(x, d_theta):
    return np.asarray(x, dtype=float)[:, None] ** np.arange(d_theta)


def _initial_outcome(kind, y, x, z, w):
    """
    Naive and ratio-IV starting values (theta, sigma, delta) for the outcome model.
    """
    d_theta = THETA_LENGTHS[kind]
    exog = _design(x, d_theta)
    if w is not None:
        exog = np.column_stack([exog, w])
    if kind == 'probit':
        try:
            naive = np.asarray(sm.Probit(y, exog).fit(disp=0).params, dtype=float)
        except Exception:
            log.debug('Probit starting values failed, using zeros.')
            naive = np.zeros(exog.shape[1])
        sigma = None
    else:
        ols = sm.OLS(y, exog).fit()
        naive = np.asarray(ols.params, dtype=float)
        sigma = float(np.sqrt(max(ols.scale, 1e-6)))

    theta_naive, delta = naive[:d_theta], naive[d_theta:]
    theta_iv = theta_naive.copy()
    cov_xz = float(np.cov(x, z)[0, 1])
    if d_theta == 2 and abs(cov_xz) > 1e-12:
        theta_iv[1] = theta_naive[1] * float(np.var(x, ddof=1)) / cov_xz
        theta_iv[0] = theta_naive[0] + (theta_naive[1] - theta_iv[1]) * float(np.mean(x))
    return theta_naive, theta_iv, sigma, delta


def _initial_sieves(problem, x, z):
    basis = problem.basis
    try:
        kde = stats.gaussian_kde(x)
        f1 = fit_sqrt_density(basis, kde.evaluate, i=problem.i1)
    except (linalg.LinAlgError, ValueError):
        f1 = SqrtSieve1D(np.eye(problem.i1 + 1)[0])

    var_x = float(np.var(x, ddof=1))
    cov_xz = float(np.cov(x, z)[0, 1])
    sigma_v = np.sqrt(max(var_x - cov_xz, 0.01 * var_x))
    sigma_z = np.sqrt(max(float(np.var(z, ddof=1)) - cov_xz, 0.01 * var_x))
    sigma_v = min(sigma_v, basis.l_1 / 2.0)
    sigma_z = min(sigma_z, basis.l_2 / 2.0)

    f2 = fit_sqrt_conditional(basis, lambda a, t: stats.norm.pdf(a, scale=sigma_v), 'x')
    f3 = fit_sqrt_conditional(basis, lambda a, t: stats.norm.pdf(a, scale=sigma_z), 'z')
    return f1, f2, f3


def _mix(lam, rng):
    """Random orthogonal mixing of the rows of a coefficient block (preserves Lambda' Lambda)."""
    size = lam.shape[0]
    skew = rng.standard_normal((size, size)) * MIXING_SCALE
    rotation = linalg.expm(0.5 * (skew - skew.T))
    return rotation @ lam


def _starts(problem, y, x, z, w, count, rng):
    theta_naive, theta_iv, sigma, delta = _initial_outcome(problem.kind, y, x, z, w)
    f1, f2, f3 = _initial_sieves(problem, x, z)
    starts = [
        problem.pack(theta_naive, sigma, delta, f1.alpha, f2.lam, f3.lam),
        problem.pack(theta_iv, sigma, delta, f1.alpha, f2.lam, f3.lam),
    ]
    while len(starts) < count:
        noise = rng.standard_normal(len(theta_naive)) * (0.25 * np.abs(theta_iv) + 0.05)
        lam2 = _mix(f2.lam, rng)
        lam3 = _mix(f3.lam, rng)
        starts.append(problem.pack(theta_iv + noise, sigma, delta, f1.alpha, lam2, lam3))
    return starts[:count]


def fit(data, kind, basis=None, functional=None, config=None, seed=None, init=None, covariates=True):
    """
    Maximize the sieve likelihood at one spacing under the sieve constraints.

    Constraints (unit-norm alpha, unit mass of both conditional blocks, centering of f2) enter through a quadratic
    penalty whose weight increases over stages; each stage runs BFGS with the analytic gradient from the previous
    stage's optimum. The best of several seeded starts wins.

    Args:
        data(Dataset): observations with a pseudo-instrument column z.
        kind(str): outcome model kind (linear_gauss, poly3_gauss, probit) or design kind (linear, ...).
        basis(SieveBasis): supports and truncations (derived from the data when None).
        functional(CenteringFunctional): centering of f2 (mean when None).
        config(LikelihoodConfig): optimizer controls.
        seed(int|numpy.random.SeedSequence): seed for the random starts.
        init(FitResult): warm start (used as the only start).
        covariates(bool): include location-shift coefficients on the dataset covariates.

    Returns:
        FitResult: the best fit; converged=False when no start met the feasibility tolerance.
    """  # noqa: E501
    kind = OUTCOME_KINDS.get(kind, kind)
    if kind not in THETA_LENGTHS:
        raise InvalidSpecError(f'Unknown outcome model kind "{kind}".')
    if data.z is None:
        raise DataError('Dataset has no pseudo-instrument column "z".')

    config = config or LikelihoodConfig()
    functional = functional or CenteringFunctional()
    frame = data.frame
    usable = np.isfinite(frame['z'].to_numpy(dtype=float))
    y = data.y[usable]
    x = data.x.astype(float)[usable]
    z = data.z.astype(float)[usable]
    w = data.w[usable] if (covariates and data.has_covariates) else None

    basis = basis or basis_from_data(x, z)
    problem = SieveLikelihood(y, x, z, kind, basis, functional, config, w=w)
    if problem.n_dropped:
        log.warning(f'{problem.n_dropped} observation(s) fall outside the sieve supports and were left out.')

    keep = problem.valid
    rng = np.random.default_rng(seed)
    if init is not None and init.params is not None and len(init.params) == problem.size:
        starts = [np.asarray(init.params, dtype=float)]
    else:
        starts = _starts(problem, y[keep], x[keep], z[keep], None if w is None else w[keep], config.multistarts, rng)

    outcomes = []
    for k, start in enumerate(starts):
        p = start
        stages = []
        iterations = 0
        status = 0
        for mu in config.penalty_schedule:
            result = optimize.minimize(problem.objective, p, args=(float(mu),), jac=True, method='BFGS',
                                       options={'maxiter': config.max_iter, 'gtol': config.tol})
            if np.all(np.isfinite(result.x)):
                p = result.x
            iterations += int(result.nit)
            status = int(result.status)
            stages.append({'penalty_weight': float(mu), 'objective': float(result.fun),
                           'penalty': problem.penalty(p), 'iterations': int(result.nit), 'status': status})
            log.debug(f'Start {k} stage mu={mu:g}: objective={result.fun:.6f} penalty={stages[-1]["penalty"]:.3g} '
                      f'iterations={result.nit} status={status}')
        p = problem.finalize(p)
        final_objective, _ = problem.objective(p, float(config.penalty_schedule[-1]))
        outcomes.append(dict(p=p, objective=float(final_objective), loglik=problem.loglik(p),
                             residual=problem.residual_norm(p), iterations=iterations, status=status, stages=stages))

    feasible = [o for o in outcomes if o['residual'] <= config.residual_tol and np.isfinite(o['loglik'])]
    pool = feasible or outcomes
    best = min(pool, key=lambda o: o['objective'])

    objectives = [o['objective'] for o in outcomes]
    finite = [v for v in objectives if np.isfinite(v)]
    spread = (max(finite) - min(finite)) if finite else np.inf
    spread_flag = bool(len(outcomes) > 1 and spread > config.spread_tol * abs(best['objective']))
    if spread_flag:
        log.warning(f'Multistart objectives spread {spread:.3g} exceeds {config.spread_tol:g} x |best|.')

    converged = bool(best['residual'] <= config.residual_tol and np.isfinite(best['loglik']) and best['status'] != 1)
    if not converged:
        log.warning(f'Sieve fit did not converge (residual norm {best["residual"]:.3g}, status {best["status"]}).')

    theta, sigma, delta, alpha, lam2, lam3 = problem.unpack(best['p'])
    eta = {'sigma_u': sigma}
    if problem.d_delta:
        eta['delta'] = [float(d) for d in delta]
    return FitResult(
        theta_hat=np.array(theta, dtype=float),
        eta_hat=eta,
        sieves=(SqrtSieve1D(alpha.copy()), SqrtSieve2D(lam2.copy(), 'x'), SqrtSieve2D(lam3.copy(), 'z')),
        basis=basis,
        kind=kind,
        loglik=best['loglik'],
        constraint_residual_norm=best['residual'],
        converged=converged,
        iterations=best['iterations'],
        seed=seed if isinstance(seed, (int, type(None))) else str(seed),
        n_used=problem.n,
        start_objectives=objectives,
        spread_flag=spread_flag,
        stages=best['stages'],
        params=best['p'].copy(),
    )


def exact_centering_residuals(result, functional=None, nodes=16):
    """
    Exact centering residual of the fitted f2 at Gauss-Legendre x* nodes (feasibility report).
    """
    functional = functional or CenteringFunctional()
    t, _ = gauss_legendre(result.basis.x0, result.basis.x1, nodes)
    residuals, ties = centering_residuals(result.sieves[1], result.basis, functional, t)
    return residuals, ties
