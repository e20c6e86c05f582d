"""
********************************************************************************
* Name: field.py
* Created On: March 2, 2026
********************************************************************************
"""
import json

import numpy as np
import pandas as pd
import param

from ..exceptions import InvalidSpecError
from ..utilities import json_serializer, sidecar_path
from .base import SpecBase

__all__ = ['FieldSpec', 'OutcomeDesign', 'ErrorDesign', 'RandomField']


class FieldSpec(SpecBase):
    """
    Rectangular grid and target moments of a stationary Gaussian random field.

    Node (row r, column c) sits at location (c + 0.5, r + 0.5); the field rectangle is [0, width] x [0, height].
    Correlation between nodes one unit apart is lag1_corr and is divided by corr_decay per further unit.
    """  # noqa: E501
    width = param.Integer(default=130, bounds=(2, None), constant=True, doc='Grid width in field units.')
    height = param.Integer(default=65, bounds=(2, None), constant=True, doc='Grid height in field units.')
    mean = param.Number(default=3.5, constant=True)
    variance = param.Number(default=1.0, bounds=(0, None), inclusive_bounds=(False, True), constant=True)
    lag1_corr = param.Number(default=0.6, bounds=(0, 1), inclusive_bounds=(False, False), constant=True)
    corr_decay = param.Number(default=3.0, bounds=(1, None), inclusive_bounds=(False, True), constant=True)

    @property
    def shape(self):
        """(rows, columns) of the value grid."""
        return self.height, self.width

    @property
    def area(self):
        return float(self.width * self.height)


class OutcomeDesign(SpecBase):
    """
    Outcome equation y = g(x*) + u, or the probit indicator 1{theta_1 + theta_2 x* + u > 0}.
    """
    THETA_LENGTHS = {'linear': 2, 'polynomial3': 4, 'probit': 2}

    kind = param.Selector(default='linear', objects=['linear', 'polynomial3', 'probit'], constant=True)
    theta = param.List(default=[-3.5, 2.0], constant=True)
    sigma_u = param.Number(default=1.3, bounds=(0, None), constant=True)

    def validate(self):
        expected = self.THETA_LENGTHS[self.kind]
        if len(self.theta) != expected:
            raise InvalidSpecError(
                f'OutcomeDesign: kind "{self.kind}" requires {expected} theta coefficients, got {len(self.theta)}.'
            )
        if not all(np.isfinite(float(t)) for t in self.theta):
            raise InvalidSpecError('OutcomeDesign: theta must be finite.')

    def g(self, x_star):
        """
        Evaluate the outcome index g(x*) = sum_k theta_k x*^k.
        """
        x_star = np.asarray(x_star, dtype=float)
        # polyval wants highest power first
        return np.polyval(np.asarray(self.theta, dtype=float)[::-1], x_star)


class ErrorDesign(SpecBase):
    """
    Measurement process for the observed covariate.

    classical_gaussian: x = x* + N(0, sigma_v^2).
    lognormal_median: ln x ~ N(ln max(x*, 0.001), log_var), so the conditional median of x is x*.
    """
    kind = param.Selector(default='classical_gaussian', objects=['classical_gaussian', 'lognormal_median'],
                          constant=True)
    sigma_v = param.Number(default=0.8, bounds=(0, None), constant=True)
    log_var = param.Number(default=1.0 / 25.0, bounds=(0, None), constant=True)

    @property
    def centering(self):
        """Centering functional kind that identifies this error process."""
        return 'mean' if self.kind == 'classical_gaussian' else 'median'


class RandomField(object):
    """
    One realization of a gridded Gaussian field plus the FieldSpec that generated it.

    Args:
        spec(FieldSpec): generating spec.
        values(numpy.ndarray): array of shape (height, width).
        seed(int): seed used to generate the values (optional).
    """
    def __init__(self, spec, values, seed=None):
        values = np.array(values, dtype=float)
        if values.shape != spec.shape:
            raise InvalidSpecError(f'Field values have shape {values.shape}, expected {spec.shape}.')
        if not np.all(np.isfinite(values)):
            raise InvalidSpecError('Field values must be finite.')
        values.flags.writeable = False
        self.spec = spec
        self.values = values
        self.seed = seed

    def __repr__(self):
        return f'<RandomField {self.spec.width}x{self.spec.height} seed={self.seed}>'

    def node_locations(self):
        """
        Returns:
            numpy.ndarray: (height*width, 2) array of node coordinates in row-major order.
        """
        rows, cols = np.mgrid[0:self.spec.height, 0:self.spec.width]
        return np.column_stack([cols.ravel() + 0.5, rows.ravel() + 0.5])

    def to_frame(self):
        """
        Long-format table with one row per grid node.
        """
        rows, cols = np.mgrid[0:self.spec.height, 0:self.spec.width]
        return pd.DataFrame({
            'row': rows.ravel(),
            'col': cols.ravel(),
            'sx': cols.ravel() + 0.5,
            'sy': rows.ravel() + 0.5,
            'value': self.values.ravel(),
        })

    def to_csv(self, path):
        """
        Write the node table and a JSON sidecar with the generating spec and seed.
        """
        self.to_frame().to_csv(path, index=False, float_format='%.17g')
        sidecar = {'kind': 'random_field', 'spec': self.spec.to_dict(), 'seed': self.seed}
        with open(sidecar_path(path), 'w') as f:
            json.dump(sidecar, f, default=json_serializer, sort_keys=True, indent=2)
