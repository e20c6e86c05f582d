"""
********************************************************************************
* Name: sieve.py
* Created On: March 5, 2026
********************************************************************************
"""
import logging
from dataclasses import dataclass

import numpy as np
import param

from ..exceptions import InvalidSpecError
from ..models import SpecBase

log = logging.getLogger(f'mismeasure.{__name__}')

__all__ = [
    'SieveBasis', 'SqrtSieve1D', 'SqrtSieve2D', 'CenteringFunctional', 'gauss_legendre', 'basis_p1', 'basis_pm',
    'basis_q', 'extended_cosines', 'gram_matrix', 'eval_density', 'build_constraint_transform',
    'unit_mass_residuals', 'centering_matrix', 'centering_moment_residuals', 'centering_residuals',
    'fit_sqrt_density', 'fit_sqrt_conditional', 'sieve_to_dict', 'ORDERING_TAG',
]

QUAD_NODES = 64
MODE_GRID = 512
ORDERING_TAG = 'const,cos1,sin1,cos2,sin2,...'
ROLES = ('x', 'z')


class SieveBasis(SpecBase):
    """
    Supports and truncations of the three square-root Fourier sieves.

    f1(x*) lives on [x0, x0 + l_x]; f2(x | x*) on x - x* in [-l_1, l_1]; f3(z | x*) on z - x* in [-l_2, l_2].
    i_n / j_n are the default truncations; i_1, i_2, j_2, i_3, j_3 override them per density.
    """  # noqa: E501
    x0 = param.Number(default=0.0, constant=True)
    l_x = param.Number(default=7.0, bounds=(0, None), inclusive_bounds=(False, True), constant=True)
    l_1 = param.Number(default=3.0, bounds=(0, None), inclusive_bounds=(False, True), constant=True)
    l_2 = param.Number(default=3.0, bounds=(0, None), inclusive_bounds=(False, True), constant=True)
    i_n = param.Integer(default=4, bounds=(0, None), constant=True)
    j_n = param.Integer(default=4, bounds=(0, None), constant=True)
    i_1 = param.Integer(default=None, bounds=(0, None), allow_None=True, constant=True)
    i_2 = param.Integer(default=None, bounds=(0, None), allow_None=True, constant=True)
    j_2 = param.Integer(default=None, bounds=(0, None), allow_None=True, constant=True)
    i_3 = param.Integer(default=None, bounds=(0, None), allow_None=True, constant=True)
    j_3 = param.Integer(default=None, bounds=(0, None), allow_None=True, constant=True)

    def validate(self):
        for name in ('i_n', 'j_n', 'i_1', 'i_2', 'j_2', 'i_3', 'j_3'):
            value = getattr(self, name)
            if value is not None and value % 2 != 0:
                raise InvalidSpecError(f'SieveBasis: truncation {name} must be even, got {value}.')

    @property
    def x1(self):
        """Upper end of the x* support."""
        return self.x0 + self.l_x

    def i_of(self, density):
        """Truncation i for density 1, 2 or 3."""
        override = {1: self.i_1, 2: self.i_2, 3: self.i_3}[density]
        return self.i_n if override is None else override

    def j_of(self, density):
        """Truncation j for density 2 or 3."""
        override = {2: self.j_2, 3: self.j_3}[density]
        return self.j_n if override is None else override

    def half_length(self, role):
        return self.l_1 if role == 'x' else self.l_2

    def shape_of(self, role):
        """(rows, columns) of the Lambda block for role 'x' (f2) or 'z' (f3)."""
        density = 2 if role == 'x' else 3
        return self.i_of(density) + 1, self.j_of(density) + 1

    @classmethod
    def study_default(cls, x0, l_x, l_1, l_2):
        """Truncations i=4 for f1, (6, 4) for f2 and (4, 4) for f3."""
        return cls(x0=x0, l_x=l_x, l_1=l_1, l_2=l_2, i_n=4, j_n=4, i_1=4, i_2=6, j_2=4, i_3=4, j_3=4)


@dataclass
class SqrtSieve1D:
    """Coefficients alpha of sqrt f1 in the p1 basis."""
    alpha: np.ndarray

    def normalized(self):
        return SqrtSieve1D(self.alpha / np.linalg.norm(self.alpha))


@dataclass
class SqrtSieve2D:
    """Coefficient block Lambda of sqrt f(.|x*) = p(a)' Lambda q(x*), a = x - x* (role 'x') or z - x* (role 'z')."""
    lam: np.ndarray
    role: str = 'x'

    def __post_init__(self):
        if self.role not in ROLES:
            raise InvalidSpecError(f'Unknown sieve role "{self.role}".')
        self.lam = np.atleast_2d(np.asarray(self.lam, dtype=float))

    def scaled(self, factor):
        return SqrtSieve2D(self.lam * factor, self.role)


class CenteringFunctional(SpecBase):
    """
    Feature of f(x | x*) pinned to x*: mean, median, mode or quantile(tau).
    """
    kind = param.Selector(default='mean', objects=['mean', 'median', 'mode', 'quantile'], constant=True)
    tau = param.Number(default=0.5, bounds=(0, 1), inclusive_bounds=(False, False), constant=True)

    def validate(self):
        if self.kind == 'median' and self.tau != 0.5:
            raise InvalidSpecError('CenteringFunctional: the median functional has tau = 0.5.')

    @property
    def level(self):
        """Quantile level used by median / quantile."""
        return 0.5 if self.kind == 'median' else self.tau


def gauss_legendre(lo, hi, n=QUAD_NODES):
    """
    Gauss-Legendre nodes and weights on [lo, hi].
    """
    nodes, weights = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (nodes + 1.0), half * weights


def _fourier_columns(theta, i, const, scale):
    """
    [const, scale cos(k theta), scale sin(k theta)] for k = 1..i/2 in canonical order.
    """
    theta = np.asarray(theta, dtype=float)
    out = np.empty(theta.shape + (i + 1,))
    out[..., 0] = const
    for k in range(1, i // 2 + 1):
        out[..., 2 * k - 1] = scale * np.cos(k * theta)
        out[..., 2 * k] = scale * np.sin(k * theta)
    return out


def basis_p1(basis, x_star, i=None):
    """
    Orthonormal Fourier basis on [x0, x0 + l_x] evaluated at x* (last axis indexes basis functions).
    """
    i = basis.i_of(1) if i is None else i
    a = np.asarray(x_star, dtype=float) - basis.x0
    return _fourier_columns(2.0 * np.pi * a / basis.l_x, i, 1.0 / np.sqrt(basis.l_x), np.sqrt(2.0 / basis.l_x))


def basis_pm(basis, a, role='x', i=None, derivative=False):
    """
    Orthonormal Fourier basis on [-l, l] (l = l_1 for role 'x', l_2 for role 'z') evaluated at offsets a.

    Args:
        derivative(bool): return d/da of each basis function instead.
    """
    density = 2 if role == 'x' else 3
    i = basis.i_of(density) if i is None else i
    half = basis.half_length(role)
    a = np.asarray(a, dtype=float)
    theta = np.pi * a / half
    scale = 1.0 / np.sqrt(half)
    if not derivative:
        return _fourier_columns(theta, i, 1.0 / np.sqrt(2.0 * half), scale)

    out = np.zeros(a.shape + (i + 1,))
    for k in range(1, i // 2 + 1):
        rate = k * np.pi / half
        out[..., 2 * k - 1] = -scale * rate * np.sin(k * theta)
        out[..., 2 * k] = scale * rate * np.cos(k * theta)
    return out


def basis_q(basis, x_star, j):
    """
    Cosine basis q_k(x*) = cos(k pi (x* - x0) / l_x), k = 0..j.
    """
    theta = np.pi * (np.asarray(x_star, dtype=float) - basis.x0) / basis.l_x
    return np.cos(theta[..., None] * np.arange(j + 1))


def extended_cosines(basis, x_star, j):
    """
    B(x*) = [1, cos(theta), ..., cos(2 j theta)] with theta = pi (x* - x0) / l_x.
    """
    return basis_q(basis, x_star, 2 * j)


def gram_matrix(basis, density, n=QUAD_NODES):
    """
    Quadrature Gram matrix of the p basis of density 1, 2 or 3 under its support.
    """
    if density == 1:
        t, w = gauss_legendre(basis.x0, basis.x1, n)
        p = basis_p1(basis, t)
    else:
        role = 'x' if density == 2 else 'z'
        half = basis.half_length(role)
        t, w = gauss_legendre(-half, half, n)
        p = basis_pm(basis, t, role)
    return (p * w[:, None]).T @ p


def eval_density(sieve, basis, points, x_star=None, return_support=False):
    """
    Evaluate a square-root sieve density.

    Args:
        sieve(SqrtSieve1D|SqrtSieve2D): coefficients.
        basis(SieveBasis): supports and truncations.
        points(array-like): x* for f1; observed x (role 'x') or z (role 'z') for conditional densities.
        x_star(array-like): conditioning x* (conditional densities only).
        return_support(bool): also return the in-support mask.

    Returns:
        numpy.ndarray: density values, 0 outside the declared supports.
    """
    points = np.asarray(points, dtype=float)
    if isinstance(sieve, SqrtSieve1D):
        inside = (points >= basis.x0) & (points <= basis.x1)
        values = (basis_p1(basis, points, len(sieve.alpha) - 1) @ sieve.alpha) ** 2
    else:
        if x_star is None:
            raise InvalidSpecError('Conditional sieve densities need x_star.')
        points, x_star = np.broadcast_arrays(points, np.asarray(x_star, dtype=float))
        a = points - x_star
        half = basis.half_length(sieve.role)
        inside = (np.abs(a) <= half) & (x_star >= basis.x0) & (x_star <= basis.x1)
        rows, cols = sieve.lam.shape
        p = basis_pm(basis, a, sieve.role, i=rows - 1)
        q = basis_q(basis, x_star, cols - 1)
        values = np.einsum('...a,ab,...b->...', p, sieve.lam, q) ** 2
    values = np.where(inside, values, 0.0)
    if return_support:
        return values, inside
    return values


def build_constraint_transform(basis, j=None):
    """
    Matrix T with T B(x*) = q(x*) kron q(x*), from cos(a) cos(b) = (cos(a - b) + cos(a + b)) / 2.

    Returns:
        numpy.ndarray: ((j+1)^2, 2j+1) transform; row k (j+1) + l holds q_k q_l.
    """
    j = basis.j_n if j is None else j
    size = j + 1
    transform = np.zeros((size * size, 2 * j + 1))
    for k in range(size):
        for m in range(size):
            row = k * size + m
            transform[row, abs(k - m)] += 0.5
            transform[row, k + m] += 0.5
    return transform


def unit_mass_residuals(sieve, transform):
    """
    r - e_0 with r = T' vec(Lambda' Lambda); zero iff the conditional density integrates to 1 at every x*.
    """
    lam = sieve.lam
    r = transform.T @ (lam.T @ lam).ravel()
    r[0] -= 1.0
    return r


def centering_matrix(basis, functional, role='x', i=None, n=QUAD_NODES):
    """
    Symmetric matrix C such that the centering moment of f(.|x*) is q' Lambda' C Lambda q.

    mean: C = int a p p' da; quantile(tau): int_{-l}^{0} p p' da - tau I; mode: p(0) p'(0)' + p'(0) p(0)'.
    """
    density = 2 if role == 'x' else 3
    i = basis.i_of(density) if i is None else i
    half = basis.half_length(role)
    if functional.kind == 'mean':
        t, w = gauss_legendre(-half, half, n)
        p = basis_pm(basis, t, role, i=i)
        return (p * (w * t)[:, None]).T @ p
    elif functional.kind in ('median', 'quantile'):
        t, w = gauss_legendre(-half, 0.0, n)
        p = basis_pm(basis, t, role, i=i)
        return (p * w[:, None]).T @ p - functional.level * np.eye(i + 1)
    p0 = basis_pm(basis, np.zeros(1), role, i=i)[0]
    d0 = basis_pm(basis, np.zeros(1), role, i=i, derivative=True)[0]
    return np.outer(p0, d0) + np.outer(d0, p0)


def centering_moment_residuals(sieve, transform, cmatrix):
    """
    c = T' vec(Lambda' C Lambda); zero iff the centering moment vanishes at every x*.
    """
    lam = sieve.lam
    return transform.T @ (lam.T @ cmatrix @ lam).ravel()


def centering_residuals(sieve, basis, functional, x_star_nodes, grid=MODE_GRID):
    """
    Exact functional residual M[f(.|x*)] - x* at each node, on the x - x* offset scale.

    Mean by quadrature, median / quantile by CDF inversion on a grid, mode by grid argmax (ties broken toward the
    smaller argument and flagged).

    Returns:
        tuple: (residuals numpy.ndarray, ties numpy.ndarray of bool).
    """  # noqa: E501
    x_star_nodes = np.atleast_1d(np.asarray(x_star_nodes, dtype=float))
    half = basis.half_length(sieve.role)
    rows, cols = sieve.lam.shape
    ties = np.zeros(len(x_star_nodes), dtype=bool)

    if functional.kind == 'mean':
        t, w = gauss_legendre(-half, half)
        p = basis_pm(basis, t, sieve.role, i=rows - 1)
        f = ((p @ sieve.lam) @ basis_q(basis, x_star_nodes, cols - 1).T) ** 2
        mass = w @ f
        return (w * t) @ f / mass, ties

    a = np.linspace(-half, half, grid)
    p = basis_pm(basis, a, sieve.role, i=rows - 1)
    f = ((p @ sieve.lam) @ basis_q(basis, x_star_nodes, cols - 1).T) ** 2

    if functional.kind == 'mode':
        peak = f.max(axis=0)
        residuals = np.empty(len(x_star_nodes))
        for k in range(len(x_star_nodes)):
            top = np.flatnonzero(f[:, k] >= peak[k] * (1.0 - 1e-12))
            residuals[k] = a[top[0]]
            # adjacent grid points sharing the max are one plateau
            ties[k] = np.any(np.diff(top) > 1)
        if ties.any():
            log.warning(f'Mode functional has non-unique argmax at {int(ties.sum())} node(s).')
        return residuals, ties

    step = a[1] - a[0]
    cdf = np.concatenate([np.zeros((1, f.shape[1])), np.cumsum(0.5 * (f[1:] + f[:-1]) * step, axis=0)])
    cdf = cdf / cdf[-1]
    residuals = np.array([np.interp(functional.level, cdf[:, k], a) for k in range(len(x_star_nodes))])
    return residuals, ties


def fit_sqrt_density(basis, density_fn, i=None, n=QUAD_NODES):
    """
    Least-squares (projection) fit of sqrt f1 onto the p1 basis, normalized to unit mass.

    Args:
        density_fn(callable): f(x*) evaluated on quadrature nodes.

    Returns:
        SqrtSieve1D: fitted coefficients.
    """
    t, w = gauss_legendre(basis.x0, basis.x1, n)
    p = basis_p1(basis, t, i)
    root = np.sqrt(np.maximum(np.asarray(density_fn(t), dtype=float), 0.0))
    alpha = (p * w[:, None]).T @ root
    if not np.any(alpha):
        alpha[0] = 1.0
    return SqrtSieve1D(alpha).normalized()


def fit_sqrt_conditional(basis, density_fn, role='x', shape=None, n=QUAD_NODES):
    """
    Weighted least-squares fit of sqrt f(a | x*) onto p(a)' Lambda q(x*) over a quadrature grid of (a, x*).

    Args:
        density_fn(callable): f(a, x*) for broadcast arrays of offsets a and x*.
        shape(tuple): (rows, columns) of Lambda; defaults to the basis truncation for the role.

    Returns:
        SqrtSieve2D: fitted block rescaled so the constant mass coefficient equals 1.
    """
    rows, cols = basis.shape_of(role) if shape is None else shape
    half = basis.half_length(role)
    a, wa = gauss_legendre(-half, half, n)
    t, wt = gauss_legendre(basis.x0, basis.x1, n)
    aa, tt = np.meshgrid(a, t, indexing='ij')
    root = np.sqrt(np.maximum(np.asarray(density_fn(aa, tt), dtype=float), 0.0)).ravel()
    weights = np.sqrt(np.outer(wa, wt).ravel())

    p = basis_pm(basis, aa.ravel(), role, i=rows - 1)
    q = basis_q(basis, tt.ravel(), cols - 1)
    design = (p[:, :, None] * q[:, None, :]).reshape(len(root), rows * cols)
    coef, *_ = np.linalg.lstsq(design * weights[:, None], root * weights, rcond=None)
    sieve = SqrtSieve2D(coef.reshape(rows, cols), role)

    r0 = unit_mass_residuals(sieve, build_constraint_transform(basis, cols - 1))[0] + 1.0
    if r0 > 0:
        sieve = sieve.scaled(1.0 / np.sqrt(r0))
    return sieve


def sieve_to_dict(basis, sieves):
    """
    JSON-ready coefficient blocks with basis metadata.

    Args:
        sieves(tuple): (SqrtSieve1D, SqrtSieve2D, SqrtSieve2D).
    """
    f1, f2, f3 = sieves
    return {
        'basis': basis.to_dict(),
        'ordering': ORDERING_TAG,
        'alpha': np.asarray(f1.alpha).tolist(),
        'lambda_x': np.asarray(f2.lam).tolist(),
        'lambda_z': np.asarray(f3.lam).tolist(),
    }
