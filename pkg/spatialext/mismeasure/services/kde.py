"""
********************************************************************************
* Name: kde.py
* Created On: March 4, 2026
********************************************************************************
"""
import logging
from dataclasses import dataclass, field as dataclass_field

import numpy as np
import pandas as pd
import param
from scipy import spatial, stats

from ..exceptions import DataError, InvalidSpecError, NoEffectivePairsError, ThinConditioningError
from ..models import Dataset, SpecBase

log = logging.getLogger(f'mismeasure.{__name__}')

__all__ = [
    'KernelSpec', 'PairSet', 'JointDensityModel', 'PseudoSample', 'kernel_function', 'build_pairs',
    'build_density', 'joint_density', 'marginal_yx', 'marginal_z', 'conditional_z', 'conditional_frame',
    'sample_pseudo', 'select_bandwidth',
]

DISTANCE_SUPPORT = 4.0
MIN_TOTAL_WEIGHT = 1e-8
GRID_PAD = 3.0
Z_NODES = 256
YX_NODES = 64
FLOOR_FRACTION = 1e-4
MIN_BANDWIDTH_SAMPLE = 30
PLUGIN_MAX_SAMPLE = 2000
CHUNK_ELEMENTS = 2_000_000


class KernelSpec(SpecBase):
    """
    Product kernel used for the (y, x, z) smoothing and the distance smoothing over pair spacings.
    """
    order = param.Selector(default=2, objects=[2, 4, 6], constant=True)
    bandwidth_yxz = param.List(default=[0.5, 0.5, 0.5], constant=True, doc='Bandwidths (h_y, h_x, h_z).')
    bandwidth_s = param.Number(default=0.3, bounds=(0, None), inclusive_bounds=(False, True), constant=True)
    family = param.Selector(default='gaussian', objects=['gaussian', 'polynomial_gaussian'], constant=True)

    def validate(self):
        if len(self.bandwidth_yxz) != 3:
            raise InvalidSpecError('KernelSpec: bandwidth_yxz must hold three bandwidths (h_y, h_x, h_z).')
        if not all(float(h) > 0 and np.isfinite(float(h)) for h in self.bandwidth_yxz):
            raise InvalidSpecError('KernelSpec: bandwidths must be positive.')
        expected = 'gaussian' if self.order == 2 else 'polynomial_gaussian'
        if self.family != expected:
            raise InvalidSpecError(f'KernelSpec: an order-{self.order} kernel belongs to the "{expected}" family.')

    def widened(self, factor):
        """
        Copy with every (y, x, z) bandwidth multiplied by factor.
        """
        return self.replace(bandwidth_yxz=[float(h) * factor for h in self.bandwidth_yxz])


def kernel_function(order):
    """
    Univariate kernel of the given order: the Gaussian density for order 2, polynomial-times-Gaussian otherwise.

    Returns:
        callable: vectorized K(t).
    """
    if order == 2:
        return stats.norm.pdf
    elif order == 4:
        return lambda t: 0.5 * (3.0 - t ** 2) * stats.norm.pdf(t)
    elif order == 6:
        return lambda t: (15.0 - 10.0 * t ** 2 + t ** 4) / 8.0 * stats.norm.pdf(t)
    raise InvalidSpecError(f'Unsupported kernel order: {order}.')


@dataclass
class PairSet:
    """
    Ordered observation pairs (i, j) with spacing dist and distance-kernel weight.
    """
    target_ds: float
    bandwidth_s: float
    i: np.ndarray
    j: np.ndarray
    dist: np.ndarray
    weight: np.ndarray

    def __len__(self):
        return len(self.i)

    @property
    def total_weight(self):
        return float(np.sum(self.weight))

    @property
    def effective_count(self):
        """Kish effective number of pairs, (sum w)^2 / sum w^2."""
        return float(np.sum(self.weight) ** 2 / np.sum(self.weight ** 2))

    def swapped(self):
        """Same pairs with roles of i and j exchanged."""
        return PairSet(self.target_ds, self.bandwidth_s, self.j.copy(), self.i.copy(), self.dist.copy(),
                       self.weight.copy())

    def to_frame(self):
        return pd.DataFrame({'i': self.i, 'j': self.j, 'dist': self.dist, 'weight': self.weight})


def build_pairs(data, target_ds, bandwidth_s):
    """
    Collect all ordered pairs whose spacing lies within the distance kernel's effective support around target_ds.

    Args:
        data(Dataset): observations.
        target_ds(float): target spacing.
        bandwidth_s(float): distance-smoothing bandwidth.

    Returns:
        PairSet: both orderings of every pair with positive weight phi((dist - target_ds) / bandwidth_s).

    Raises:
        NoEffectivePairsError: total weight below threshold (target_ds outside the data's distance range).
    """  # noqa: E501
    if target_ds < 0:
        raise InvalidSpecError(f'Target spacing must be non-negative, got {target_ds}.')
    if bandwidth_s <= 0:
        raise InvalidSpecError(f'Distance bandwidth must be positive, got {bandwidth_s}.')

    tree = spatial.cKDTree(data.locations)
    reach = target_ds + DISTANCE_SUPPORT * bandwidth_s
    found = tree.query_pairs(r=reach, output_type='ndarray')
    if found.size == 0:
        raise NoEffectivePairsError(f'No observation pairs within distance {reach:g} of each other.')

    locs = data.locations
    dist = np.linalg.norm(locs[found[:, 0]] - locs[found[:, 1]], axis=1)
    t = (dist - target_ds) / bandwidth_s
    keep = np.abs(t) <= DISTANCE_SUPPORT
    weight = stats.norm.pdf(t[keep])
    i, j, dist = found[keep, 0], found[keep, 1], dist[keep]

    total = 2.0 * float(np.sum(weight))
    if total < MIN_TOTAL_WEIGHT:
        raise NoEffectivePairsError(
            f'No effective pairs at spacing {target_ds:g} (total weight {total:.3g}); the spacing is outside the '
            f'distance range of the data.'
        )

    pairs = PairSet(
        target_ds=float(target_ds),
        bandwidth_s=float(bandwidth_s),
        i=np.concatenate([i, j]),
        j=np.concatenate([j, i]),
        dist=np.concatenate([dist, dist]),
        weight=np.concatenate([weight, weight]),
    )
    log.debug(f'Built {len(pairs)} ordered pairs at spacing {target_ds:g} '
              f'(effective count {pairs.effective_count:.1f}).')
    return pairs


class _Axis(object):
    """
    One smoothing axis: kernel-smoothed on a cell-centered grid, or exact category match.
    """
    def __init__(self, values, bandwidth, kernel, discrete, nodes):
        self.values = np.asarray(values, dtype=float)
        self.discrete = discrete
        self.bandwidth = float(bandwidth)
        self.kernel = kernel
        if discrete:
            self.grid = np.unique(self.values)
            self.weights = np.ones_like(self.grid)
        else:
            lo = self.values.min() - GRID_PAD * self.bandwidth
            hi = self.values.max() + GRID_PAD * self.bandwidth
            step = (hi - lo) / nodes
            self.grid = lo + (np.arange(nodes) + 0.5) * step
            self.weights = np.full(nodes, step)

    @property
    def step(self):
        return float(self.weights[0])

    def matrix(self, at):
        """
        K[a, p] = K_h(at_a - v_p) or 1{at_a == v_p}.
        """
        at = np.asarray(at, dtype=float).reshape(-1, 1)
        if self.discrete:
            return (at == self.values[None, :]).astype(float)
        return self.kernel((at - self.values[None, :]) / self.bandwidth) / self.bandwidth

    def grid_mass(self):
        """Grid integral of each pair's kernel along this axis."""
        return self.weights @ self.matrix(self.grid)


class JointDensityModel(object):
    """
    Kernel estimate of the joint density of (y(s), x(s), x(s + ds)) built from a PairSet.

    Args:
        pairset(PairSet): weighted ordered pairs.
        kernel(KernelSpec): kernel order and bandwidths.
        y(numpy.ndarray): outcome values of the first member of each pair.
        x(numpy.ndarray): covariate values of the first member of each pair.
        z(numpy.ndarray): covariate values of the second member of each pair.
        discrete_x(bool): x and z are categories (exact matches, no smoothing).
        discrete_y(bool): y is binary (exact matches, no smoothing).
        yx_nodes(int): grid nodes for y and x.
        z_nodes(int): grid nodes for z.
    """
    def __init__(self, pairset, kernel, y, x, z, discrete_x=False, discrete_y=False, yx_nodes=YX_NODES,
                 z_nodes=Z_NODES):
        self.pairset = pairset
        self.kernel = kernel
        self.discrete_x = discrete_x
        self.discrete_y = discrete_y
        k = kernel_function(kernel.order)
        h_y, h_x, h_z = (float(h) for h in kernel.bandwidth_yxz)
        self.y_axis = _Axis(y, h_y, k, discrete_y, yx_nodes)
        self.x_axis = _Axis(x, h_x, k, discrete_x, yx_nodes)
        self.z_axis = _Axis(z, h_z, k, discrete_x, z_nodes)
        self.pair_weights = pairset.weight / pairset.weight.sum()

        mass = self.y_axis.grid_mass() * self.x_axis.grid_mass() * self.z_axis.grid_mass()
        self.normalizer = float(np.sum(self.pair_weights * mass))
        self._z_matrix = None
        self.floor = 0.0

    def __repr__(self):
        return (f'<JointDensityModel ds={self.pairset.target_ds:g} pairs={len(self.pairset)} '
                f'order={self.kernel.order}>')

    @property
    def z_grid(self):
        return self.z_axis.grid

    @property
    def z_weights(self):
        return self.z_axis.weights

    @property
    def z_matrix(self):
        """(pairs, z nodes) kernel matrix, computed once."""
        if self._z_matrix is None:
            self._z_matrix = self.z_axis.matrix(self.z_grid).T
        return self._z_matrix

    def yx_weights(self, y, x):
        """(points, pairs) array of w_p K(y - y_p) K(x - x_p)."""
        return self.pair_weights[None, :] * self.y_axis.matrix(y) * self.x_axis.matrix(x)

    def set_floor(self, y, x):
        """
        Conditioning floor = 1e-4 x the peak of the (y, x) marginal over the given anchor points.
        """
        peak = np.max(marginal_yx(self, y, x))
        self.floor = FLOOR_FRACTION * float(peak)
        return self.floor


def build_density(data, pairset, kernel, anchors=True, **kwargs):
    """
    Build the joint density model for a dataset and a pair set.

    Args:
        data(Dataset): observations.
        pairset(PairSet): pairs built at the target spacing.
        kernel(KernelSpec): kernel order and bandwidths.
        anchors(bool): set the conditioning floor from the (y, x) marginal at the observations.

    Returns:
        JointDensityModel: the model.
    """
    y = data.y
    discrete_y = bool(np.all(np.isin(y, (0.0, 1.0))))
    x = data.x.astype(float)
    model = JointDensityModel(pairset, kernel, y[pairset.i], x[pairset.i], x[pairset.j],
                              discrete_x=data.discrete, discrete_y=discrete_y, **kwargs)
    if anchors:
        model.set_floor(y, x)
    return model


def _chunks(n_points, n_pairs):
    size = max(1, CHUNK_ELEMENTS // max(1, n_pairs))
    for start in range(0, n_points, size):
        yield slice(start, min(n_points, start + size))


def joint_density(model, y, x, z):
    """
    Evaluate the normalized joint density at (y, x, z). Arguments broadcast; higher-order kernels are clipped at 0.

    Returns:
        float|numpy.ndarray: nonnegative density value(s).
    """
    y, x, z = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(x, dtype=float),
                                  np.asarray(z, dtype=float))
    shape = y.shape
    y, x, z = y.ravel(), x.ravel(), z.ravel()
    out = np.empty(y.shape[0])
    for sl in _chunks(y.shape[0], len(model.pair_weights)):
        terms = model.yx_weights(y[sl], x[sl]) * model.z_axis.matrix(z[sl])
        out[sl] = terms.sum(axis=1)
    out = np.maximum(out / model.normalizer, 0.0)
    return out.reshape(shape) if shape else float(out[0])


def marginal_yx(model, y, x):
    """
    Marginal density of (y, x) implied by the model (the z kernel integrates out).
    """
    y, x = np.broadcast_arrays(np.atleast_1d(np.asarray(y, dtype=float)), np.atleast_1d(np.asarray(x, dtype=float)))
    out = np.empty(y.shape[0])
    for sl in _chunks(y.shape[0], len(model.pair_weights)):
        out[sl] = model.yx_weights(y[sl], x[sl]).sum(axis=1)
    return np.maximum(out, 0.0)


def marginal_z(model):
    """
    Marginal density of z on the z-grid, summing to 1 with grid weights.
    """
    values = np.maximum(model.pair_weights @ model.z_matrix, 0.0)
    return values / np.sum(values * model.z_weights)


def _conditional_block(model, y, x):
    """
    Conditional densities for a block of (y, x) points. Rows below the floor are returned as NaN.
    """
    weights = model.yx_weights(y, x)
    marginal = weights.sum(axis=1)
    values = np.maximum(weights @ model.z_matrix, 0.0)
    mass = values @ model.z_weights
    thin = (marginal < model.floor) | (marginal <= 0) | (mass <= 0)
    with np.errstate(invalid='ignore', divide='ignore'):
        values = values / mass[:, None]
    values[thin] = np.nan
    return values, thin


def conditional_z(model, y, x):
    """
    Conditional density of z given (y, x) on the z-grid.

    Returns:
        numpy.ndarray: nonnegative vector over model.z_grid whose grid-weighted sum is 1.

    Raises:
        ThinConditioningError: the (y, x) marginal is below the conditioning floor.
    """
    values, thin = _conditional_block(model, np.atleast_1d(float(y)), np.atleast_1d(float(x)))
    if thin[0]:
        raise ThinConditioningError(
            f'Thin conditioning region at (y={y:g}, x={x:g}): marginal below floor {model.floor:.3g}.', indices=[0]
        )
    return values[0]


def conditional_frame(model, y, x):
    """
    Conditional density of z given (y, x) as a (node, z, value) table for export.
    """
    values = conditional_z(model, y, x)
    return pd.DataFrame({'node': np.arange(len(values)), 'z': model.z_grid, 'value': values})


@dataclass
class PseudoSample:
    """
    One pseudo-instrument draw per observation, drawn from the estimated conditional of z given (y, x).
    """
    z: np.ndarray
    ds: float
    seed: object
    dropped: list = dataclass_field(default_factory=list)

    @property
    def kept(self):
        """Boolean mask of observations with a valid draw."""
        mask = np.ones(len(self.z), dtype=bool)
        mask[self.dropped] = False
        return mask


def sample_pseudo(data, model, seed, skip_thin=False):
    """
    Draw one pseudo-instrument per observation by inverse-CDF sampling on the z-grid with within-cell uniform jitter.
    Category data are drawn directly from the conditional probability mass function.

    Args:
        data(Dataset): observations (y, x) to condition on.
        model(JointDensityModel): the joint density model.
        seed(int|numpy.random.SeedSequence): random seed.
        skip_thin(bool): leave thin-conditioning observations out (reported in dropped) instead of raising.

    Returns:
        PseudoSample: the draws.

    Raises:
        ThinConditioningError: some observations fall in thin conditioning regions (indices attached).
    """  # noqa: E501
    rng = np.random.default_rng(seed)
    n = data.n
    u = rng.uniform(size=n)
    jitter = rng.uniform(size=n) - 0.5

    y = data.y
    x = data.x.astype(float)
    z = np.full(n, np.nan)
    thin_all = np.zeros(n, dtype=bool)
    grid = model.z_grid
    discrete = model.z_axis.discrete

    for sl in _chunks(n, len(model.pair_weights)):
        values, thin = _conditional_block(model, y[sl], x[sl])
        thin_all[sl] = thin
        cdf = np.cumsum(np.nan_to_num(values) * model.z_weights[None, :], axis=1)
        cdf[:, -1] = np.where(thin, 0.0, 1.0)
        cell = np.minimum((cdf <= u[sl, None]).sum(axis=1), len(grid) - 1)
        draws = grid[cell]
        if not discrete:
            draws = draws + jitter[sl] * model.z_axis.step
        draws[thin] = np.nan
        z[sl] = draws

    indices = np.flatnonzero(thin_all).tolist()
    if indices and not skip_thin:
        raise ThinConditioningError(
            f'{len(indices)} observation(s) fall in thin conditioning regions at spacing {model.pairset.target_ds:g}.',
            indices=indices,
        )
    if indices:
        log.warning(f'Dropped {len(indices)} thin-conditioning observation(s) at spacing '
                    f'{model.pairset.target_ds:g}.')
    if discrete:
        z = np.where(np.isnan(z), -1, z).astype(int)
    return PseudoSample(z=z, ds=model.pairset.target_ds, seed=seed, dropped=indices)


def _plugin_scale(values):
    """
    Scale sigma for which 1.06 * sigma * n^(-1/5) equals the one-stage direct plug-in bandwidth. The curvature
    functional psi_4 = int f'' f'' is estimated from pairwise fourth derivatives of a Gaussian pilot kernel whose
    bandwidth comes from the normal reference for psi_6.

    Returns:
        float: the scale, or None when the curvature estimate is not positive.
    """
    values = np.sort(values)
    if values.size > PLUGIN_MAX_SAMPLE:
        values = values[np.linspace(0, values.size - 1, PLUGIN_MAX_SAMPLE).round().astype(int)]
    n = values.size
    sigma = float(np.std(values, ddof=1))

    psi6 = -15.0 / (16.0 * np.sqrt(np.pi) * sigma ** 7)
    k4_zero = 3.0 / np.sqrt(2.0 * np.pi)
    pilot = (-2.0 * k4_zero / (psi6 * n)) ** (1.0 / 7.0)

    u = (values[:, None] - values[None, :]) / pilot
    psi4 = float(np.sum((u ** 4 - 6.0 * u ** 2 + 3.0) * stats.norm.pdf(u))) / (n ** 2 * pilot ** 5)
    if psi4 <= 0:
        return None
    h = (1.0 / (2.0 * np.sqrt(np.pi) * psi4 * n)) ** 0.2
    return h / (1.06 * n ** -0.2)


def select_bandwidth(data, dim, column='x', n_eff=None, refine=False):
    """
    Rule-of-thumb bandwidth h = 1.06 * sigma * n_eff^(-1 / (4 + dim)), optionally with a plug-in sigma.

    Args:
        data(Dataset|array-like): observations or a 1-D sample.
        dim(int): dimension of the smoothed density.
        column(str): dataset column to use when data is a Dataset.
        n_eff(float): effective sample size (defaults to the sample size).
        refine(bool): replace the sample standard deviation by the scale implied by a one-stage direct plug-in
            bandwidth.

    Returns:
        float: bandwidth.

    Raises:
        DataError: fewer than 30 observations.
    """
    if isinstance(data, Dataset):
        values = data.frame[column].to_numpy(dtype=float)
    else:
        values = np.asarray(data, dtype=float).ravel()

    if values.size < MIN_BANDWIDTH_SAMPLE:
        raise DataError(f'At least {MIN_BANDWIDTH_SAMPLE} observations are needed to select a bandwidth, '
                        f'got {values.size}.')

    sigma = float(np.std(values, ddof=1))
    if sigma <= 0:
        raise DataError(f'Column "{column}" has no spread; a bandwidth cannot be selected.')
    if refine:
        scale = _plugin_scale(values)
        if scale is None:
            log.warning('Plug-in curvature estimate is not positive; keeping the normal-reference scale.')
        else:
            sigma = scale

    n_eff = float(values.size if n_eff is None else n_eff)
    return 1.06 * sigma * n_eff ** (-1.0 / (4 + dim))
