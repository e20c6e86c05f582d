"""
********************************************************************************
* Name: fieldsim.py
* Created On: March 3, 2026
********************************************************************************
"""
import logging
from functools import lru_cache

import numpy as np
import pandas as pd
from scipy import ndimage, optimize, signal

from ..exceptions import InvalidSpecError, OutOfRegionError
from ..models import Dataset, ErrorDesign, FieldSpec, OutcomeDesign, RandomField

log = logging.getLogger(f'mismeasure.{__name__}')

__all__ = [
    'calibrate_kernel', 'moving_average_kernel', 'generate_field', 'sample_locations', 'field_value',
    'make_dataset', 'make_discrete_dataset', 'geometric_misclassification', 'lag_correlation', 'design_catalog',
    'simulate_design',
]

WHITE_NOISE_CORR = 1e-3
KERNEL_TRUNCATION = 1e-6
MAX_KERNEL_RADIUS = 25
LOG_ARGUMENT_FLOOR = 0.001


def moving_average_kernel(scale, power):
    """
    Isotropic weight kernel w(d) = exp(-(d / scale)^power), truncated where it drops below 1e-6.

    Args:
        scale(float): kernel scale a > 0.
        power(float): kernel shape exponent p > 0.

    Returns:
        numpy.ndarray: square kernel of side 2R+1.
    """
    radius = int(np.ceil(scale * (-np.log(KERNEL_TRUNCATION)) ** (1.0 / power)))
    radius = int(np.clip(radius, 1, MAX_KERNEL_RADIUS))
    offsets = np.arange(-radius, radius + 1, dtype=float)
    dx, dy = np.meshgrid(offsets, offsets)
    return np.exp(-(np.hypot(dx, dy) / scale) ** power)


def _implied_correlation(kernel, lags=(1, 2)):
    """
    Correlation at the given axial lags of a field built by convolving white noise with the kernel.
    """
    auto = signal.fftconvolve(kernel, kernel[::-1, ::-1], mode='full')
    center = np.array(auto.shape) // 2
    peak = auto[center[0], center[1]]
    return np.array([auto[center[0], center[1] + lag] / peak for lag in lags])


@lru_cache(maxsize=64)
def calibrate_kernel(lag1_corr, corr_decay):
    """
    Find the kernel (scale, power) whose implied lag-1 and lag-2 correlations match lag1_corr and lag1_corr / corr_decay.

    Only lags 1 and 2 are calibrated; correlations beyond lag 2 follow from the fitted kernel shape.

    Returns:
        tuple: (scale, power), or (0.0, 0.0) for the white-noise limit.
    """  # noqa: E501
    if lag1_corr < WHITE_NOISE_CORR:
        return 0.0, 0.0

    targets = np.array([lag1_corr, lag1_corr / corr_decay])

    def residuals(p):
        return _implied_correlation(moving_average_kernel(p[0], p[1])) - targets

    result = optimize.least_squares(residuals, x0=[1.0, 1.5], bounds=([0.1, 0.5], [20.0, 3.0]), xtol=1e-10)
    scale, power = (float(v) for v in result.x)
    achieved = targets + residuals(result.x)
    log.debug(f'Calibrated kernel scale={scale:.4f} power={power:.4f} '
              f'(lag-1 {achieved[0]:.4f}, lag-2 {achieved[1]:.4f})')
    if abs(achieved[0] - targets[0]) > 0.01:
        log.warning(f'Kernel calibration could not reach lag-1 correlation {lag1_corr:.3f} '
                    f'(achieved {achieved[0]:.3f}).')
    return scale, power


def generate_field(spec, seed):
    """
    Generate a stationary Gaussian random field by moving-average convolution of i.i.d. Gaussian noise.

    Args:
        spec(FieldSpec): grid and target moments.
        seed(int|numpy.random.SeedSequence): random seed.

    Returns:
        RandomField: realization with values of shape (height, width).
    """
    if not isinstance(spec, FieldSpec):
        raise InvalidSpecError('The argument "spec" must be a FieldSpec.')

    rng = np.random.default_rng(seed)
    scale, power = calibrate_kernel(spec.lag1_corr, spec.corr_decay)

    if scale == 0.0:
        standard = rng.standard_normal(spec.shape)
    else:
        kernel = moving_average_kernel(scale, power)
        radius = kernel.shape[0] // 2
        noise = rng.standard_normal((spec.height + 2 * radius, spec.width + 2 * radius))
        standard = signal.fftconvolve(noise, kernel, mode='valid') / np.sqrt(np.sum(kernel ** 2))

    values = spec.mean + np.sqrt(spec.variance) * standard
    return RandomField(spec, values, seed=_seed_repr(seed))


def sample_locations(spec, n, seed):
    """
    Draw n i.i.d. locations uniformly on the continuous rectangle [0, width] x [0, height].

    Returns:
        numpy.ndarray: (n, 2) array of (sx, sy).
    """
    if int(n) < 1:
        raise InvalidSpecError(f'Number of locations must be at least 1, got {n}.')
    rng = np.random.default_rng(seed)
    return rng.uniform(low=(0.0, 0.0), high=(spec.width, spec.height), size=(int(n), 2))


def field_value(field, s):
    """
    Bilinear interpolation of the gridded field at continuous location(s). Exact node coordinates return the node value;
    locations within the outer half cell are clamped to the edge nodes.

    Args:
        field(RandomField): the field.
        s(array-like): a single (sx, sy) pair or an (n, 2) array.

    Returns:
        float|numpy.ndarray: interpolated value(s).

    Raises:
        OutOfRegionError: a location falls outside the field rectangle.
    """  # noqa: E501
    s = np.asarray(s, dtype=float)
    single = s.ndim == 1
    pts = np.atleast_2d(s)
    outside = (pts[:, 0] < 0) | (pts[:, 0] > field.spec.width) | (pts[:, 1] < 0) | (pts[:, 1] > field.spec.height)
    if np.any(outside) or not np.all(np.isfinite(pts)):
        raise OutOfRegionError(
            f'Location(s) outside the field rectangle [0, {field.spec.width}] x [0, {field.spec.height}].'
        )
    coords = np.vstack([pts[:, 1] - 0.5, pts[:, 0] - 0.5])
    values = ndimage.map_coordinates(field.values, coords, order=1, mode='nearest')
    return float(values[0]) if single else values


def lag_correlation(values, lag):
    """
    Empirical correlation between grid nodes lag units apart, pooling horizontal and vertical pairs.
    """
    values = np.asarray(values, dtype=float)
    left = np.concatenate([values[:, :-lag].ravel(), values[:-lag, :].ravel()])
    right = np.concatenate([values[:, lag:].ravel(), values[lag:, :].ravel()])
    return float(np.corrcoef(left, right)[0, 1])


def make_dataset(field, locs, outcome, error, covariate=False, seed=None):
    """
    Build a synthetic dataset from a field realization and the outcome / measurement designs.

    Args:
        field(RandomField): realization of x*.
        locs(numpy.ndarray): (n, 2) observation locations.
        outcome(OutcomeDesign): outcome equation.
        error(ErrorDesign): measurement process for x.
        covariate(bool): add w = (x* + N(0,1))^2 / 20 that enters the outcome additively.
        seed(int): random seed.

    Returns:
        Dataset: oracle dataset with columns sx, sy, x, y, [w], x_star.
    """
    if not isinstance(outcome, OutcomeDesign) or not isinstance(error, ErrorDesign):
        raise InvalidSpecError('Expected an OutcomeDesign and an ErrorDesign.')

    locs = np.atleast_2d(np.asarray(locs, dtype=float))
    n = locs.shape[0]
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(n)
    v = rng.standard_normal(n)
    e_w = rng.standard_normal(n)

    x_star = field_value(field, locs)
    x_star = np.atleast_1d(x_star)
    index = outcome.g(x_star)

    w = None
    if covariate:
        w = (x_star + e_w) ** 2 / 20.0
        index = index + w

    if outcome.kind == 'probit':
        y = (index + u > 0).astype(float)
    else:
        y = index + outcome.sigma_u * u

    if error.kind == 'classical_gaussian':
        x = x_star + error.sigma_v * v
    else:
        x = np.exp(np.log(np.maximum(x_star, LOG_ARGUMENT_FLOOR)) + np.sqrt(error.log_var) * v)

    columns = {'sx': locs[:, 0], 'sy': locs[:, 1], 'x': x, 'y': y}
    if w is not None:
        columns['w'] = w
    columns['x_star'] = x_star

    attributes = {
        Dataset.ATTR_SPEC: {
            'field': field.spec.to_dict(),
            'outcome': outcome.to_dict(),
            'error': error.to_dict(),
            'covariate': bool(covariate),
        },
        Dataset.ATTR_SEED: _seed_repr(seed),
        'field_seed': field.seed,
    }
    return Dataset(pd.DataFrame(columns), (field.spec.width, field.spec.height), attributes=attributes)


def geometric_misclassification(diagonal=0.7, decay=0.5, k=4):
    """
    Column-stochastic, mode-preserving misclassification matrix P[X=i | X*=j] with the given diagonal and
    off-diagonal mass decaying geometrically in |i - j|.
    """
    if not 1.0 / k < diagonal <= 1.0:
        raise InvalidSpecError(f'Diagonal must lie in (1/{k}, 1] to be mode-preserving, got {diagonal}.')
    p = np.zeros((k, k))
    for j in range(k):
        offsets = np.array([decay ** (abs(i - j) - 1) if i != j else 0.0 for i in range(k)])
        p[:, j] = (1.0 - diagonal) * offsets / offsets.sum()
        p[j, j] = diagonal
    off_diagonal = p - np.diag(np.diag(p))
    if np.any(off_diagonal.max(axis=0) >= diagonal):
        raise InvalidSpecError('Requested misclassification matrix is not mode-preserving.')
    return p


def make_discrete_dataset(field, locs, mis_x, theta=(0.0, 1.0), sigma_u=1.0, seed=None, rare_top_share=0.0):
    """
    Synthetic misclassification data: x* in {0..3} by thresholding the field at its quartiles, observed x drawn
    from column x* of mis_x, y = theta_1 + theta_2 x* + sigma_u u.

    Args:
        field(RandomField): realization driving the latent categories.
        locs(numpy.ndarray): (n, 2) observation locations.
        mis_x(numpy.ndarray): 4x4 column-stochastic matrix P[X=i | X*=j].
        theta(tuple): outcome intercept and slope on the category level.
        sigma_u(float): outcome noise std. dev.
        seed(int): random seed.
        rare_top_share(float): share of observations recoded from x=3 to a rare fifth level 4 (< 0.01).

    Returns:
        Dataset: discrete oracle dataset.
    """  # noqa: E501
    mis_x = np.asarray(mis_x, dtype=float)
    k = mis_x.shape[0]
    if mis_x.shape != (k, k) or not np.allclose(mis_x.sum(axis=0), 1.0, atol=1e-8) or np.any(mis_x < 0):
        raise InvalidSpecError('mis_x must be a square column-stochastic matrix.')
    if not 0.0 <= rare_top_share < 0.01:
        raise InvalidSpecError(f'rare_top_share must lie in [0, 0.01), got {rare_top_share}.')

    locs = np.atleast_2d(np.asarray(locs, dtype=float))
    n = locs.shape[0]
    rng = np.random.default_rng(seed)

    cuts = np.quantile(field.values, np.arange(1, k) / k)
    latent = np.atleast_1d(field_value(field, locs))
    x_star = np.searchsorted(cuts, latent, side='right')

    cdf = np.cumsum(mis_x[:, x_star], axis=0)
    draws = rng.uniform(size=n)
    x = np.minimum((draws[None, :] > cdf).sum(axis=0), k - 1)

    y = theta[0] + theta[1] * x_star + sigma_u * rng.standard_normal(n)

    categories = list(range(k))
    if rare_top_share > 0:
        top = np.flatnonzero(x == k - 1)
        n_rare = min(len(top), int(round(rare_top_share * n)))
        if n_rare > 0:
            x[rng.choice(top, size=n_rare, replace=False)] = k
            categories.append(k)

    frame = pd.DataFrame({'sx': locs[:, 0], 'sy': locs[:, 1], 'x': x.astype(int), 'y': y,
                          'x_star': x_star.astype(int)})
    attributes = {
        Dataset.ATTR_SPEC: {
            'field': field.spec.to_dict(),
            'mis_x': mis_x.tolist(),
            'theta': [float(t) for t in theta],
            'sigma_u': float(sigma_u),
            'rare_top_share': float(rare_top_share),
        },
        Dataset.ATTR_SEED: _seed_repr(seed),
        'field_seed': field.seed,
        'categories': categories,
    }
    return Dataset(frame, (field.spec.width, field.spec.height), discrete=True, attributes=attributes)


def design_catalog():
    """
    Named simulation designs and their constants.

    Returns:
        dict: name -> dict(field, outcome, error, covariate, discrete, n, truth).
    """
    field = FieldSpec(width=130, height=65, mean=3.5, variance=1.0, lag1_corr=0.6, corr_decay=3.0)
    linear = OutcomeDesign(kind='linear', theta=[-3.5, 2.0], sigma_u=1.3)
    classical = ErrorDesign(kind='classical_gaussian', sigma_v=0.8)
    catalog = {
        'linear': dict(outcome=linear, error=classical, covariate=False),
        'no_error': dict(outcome=linear, error=ErrorDesign(kind='classical_gaussian', sigma_v=0.0),
                         covariate=False),
        'polynomial': dict(outcome=OutcomeDesign(kind='polynomial3', theta=[-3.5, 0.2, 0.2, -0.05], sigma_u=1.3),
                           error=classical, covariate=False),
        'probit': dict(outcome=OutcomeDesign(kind='probit', theta=[0.0, 1.0 / 3.0], sigma_u=1.0),
                       error=classical, covariate=False),
        'lognormal_median': dict(outcome=linear, error=ErrorDesign(kind='lognormal_median', log_var=1.0 / 25.0),
                                 covariate=False),
        'covariate': dict(outcome=linear, error=classical, covariate=True),
        'discrete': dict(outcome=OutcomeDesign(kind='linear', theta=[0.0, 1.0], sigma_u=1.0), error=None,
                         covariate=False, discrete=True, mis_x_diagonal=0.7),
    }
    for name, design in catalog.items():
        design.setdefault('discrete', False)
        design['field'] = field
        design['n'] = 5000 if design['discrete'] else 1500
        design['name'] = name
    return catalog


def simulate_design(name, n=None, seed=None):
    """
    Field, locations and dataset for a named design of design_catalog().

    Args:
        name(str): design name.
        n(int): observations (design default when None).
        seed(int|numpy.random.SeedSequence): root seed; field, locations and data use independent children.

    Returns:
        Dataset: the synthetic dataset.
    """
    catalog = design_catalog()
    if name not in catalog:
        raise InvalidSpecError(f'Unknown design "{name}".')
    design = catalog[name]
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    field_seed, location_seed, data_seed = root.spawn(3)

    field = generate_field(design['field'], field_seed)
    locs = sample_locations(design['field'], n or design['n'], location_seed)
    if design['discrete']:
        outcome = design['outcome']
        mis_x = geometric_misclassification(design['mis_x_diagonal'])
        data = make_discrete_dataset(field, locs, mis_x, theta=tuple(outcome.theta), sigma_u=outcome.sigma_u,
                                     seed=data_seed, rare_top_share=design.get('rare_top_share', 0.0))
    else:
        data = make_dataset(field, locs, design['outcome'], design['error'], covariate=design['covariate'],
                            seed=data_seed)
    data.set_attribute('design', name)
    return data


def _seed_repr(seed):
    """
    JSON-friendly representation of a seed (int, SeedSequence or None).
    """
    if isinstance(seed, np.random.SeedSequence):
        return {'entropy': int(seed.entropy), 'spawn_key': [int(k) for k in seed.spawn_key]}
    if seed is None:
        return None
    return int(seed)
