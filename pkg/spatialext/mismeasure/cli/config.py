"""
********************************************************************************
* Name: config.py
* Created On: March 13, 2026
********************************************************************************
"""
import json
import logging

import param

from ..exceptions import InvalidSpecError
from ..mixins import OptionsMixin
from ..models import SpecBase
from ..services.estimator import DEFAULT_DS_VALUES, EstimatorConfig
from ..services.fieldsim import design_catalog
from ..services.job_manager import default_jobs

log = logging.getLogger(f'mismeasure.{__name__}')

__all__ = ['RunConfig', 'SUITES', 'resolve_config', 'load_config_file']

SUITES = ['table1', 'polynomial', 'coverage', 'appendixB_median', 'appendixB_probit', 'appendixB_covariate',
          'sieve_scan', 'discrete_demo']

ESTIMATOR_FIELDS = ['ds_values', 'ds0', 'bandwidth_s', 'bandwidth_yxz', 'kernel_order', 'functional', 'tau', 'i_n',
                    'j_n', 'quad_nodes', 'multistarts', 'max_iter', 'bandwidth_retries', 'widen_factor', 'phi']


class RunConfig(SpecBase):
    """
    Resolved settings of one command-line run. Every value ends up in the report echo.
    """
    design = param.String(default='linear', constant=True, doc='Simulation design name.')
    n = param.Integer(default=None, bounds=(1, None), allow_None=True, constant=True,
                      doc='Observations per dataset (design default when None).')
    reps = param.Integer(default=100, bounds=(1, None), constant=True, doc='Benchmark replications.')
    B = param.Integer(default=50, bounds=(20, None), constant=True, doc='Bootstrap replicates.')
    bootstrap = param.Boolean(default=True, constant=True)
    select_range = param.Boolean(default=False, constant=True, doc='Choose the spacing range from the data first.')
    seed = param.Integer(default=0, bounds=(0, None), constant=True)
    jobs = param.Integer(default=1, bounds=(1, None), constant=True)
    out = param.String(default='out', constant=True)
    data = param.String(default=None, allow_None=True, constant=True, doc='Input dataset CSV (estimate).')
    suite = param.Selector(default=None, objects=[None] + SUITES, constant=True)

    model_kind = param.Selector(default=None, objects=[None, 'linear_gauss', 'poly3_gauss', 'probit'], constant=True)
    ds_values = param.List(default=list(DEFAULT_DS_VALUES), constant=True)
    ds0 = param.Number(default=0.0, bounds=(0, None), constant=True)
    bandwidth_s = param.Number(default=0.3, bounds=(0, None), inclusive_bounds=(False, True), constant=True)
    bandwidth_yxz = param.List(default=None, allow_None=True, constant=True)
    kernel_order = param.Selector(default=2, objects=[2, 4, 6], constant=True)
    functional = param.Selector(default=None, objects=[None, 'mean', 'median', 'mode', 'quantile'], constant=True,
                                doc='Centering functional (from the error design when None).')
    tau = param.Number(default=0.5, bounds=(0, 1), inclusive_bounds=(False, False), constant=True)
    i_n = param.Integer(default=None, bounds=(0, None), allow_None=True, constant=True)
    j_n = param.Integer(default=None, bounds=(0, None), allow_None=True, constant=True)
    quad_nodes = param.Integer(default=48, bounds=(32, None), constant=True)
    multistarts = param.Integer(default=5, bounds=(1, None), constant=True)
    max_iter = param.Integer(default=400, bounds=(1, None), constant=True)
    bandwidth_retries = param.Integer(default=3, bounds=(0, None), constant=True)
    widen_factor = param.Number(default=1.5, bounds=(1, None), inclusive_bounds=(False, True), constant=True)
    phi = param.Number(default=0.25, bounds=(0, 1), inclusive_bounds=(False, False), constant=True)

    def validate(self):
        if self.design not in design_catalog():
            raise InvalidSpecError(f'Unknown design "{self.design}". '
                                   f'Choose one of {", ".join(sorted(design_catalog()))}.')
        self.estimator_config()

    @property
    def design_spec(self):
        return design_catalog()[self.design]

    def estimator_config(self, **changes):
        """
        EstimatorConfig from the run settings; the centering follows the design's error process unless set.
        """
        values = {k: getattr(self, k) for k in ESTIMATOR_FIELDS}
        if values['functional'] is None:
            error = self.design_spec.get('error')
            values['functional'] = error.centering if error is not None else 'mean'
        values.update(model_kind=self.model_kind, bootstrap_reps=self.B)
        values.update(changes)
        return EstimatorConfig(**values)


def load_config_file(path):
    """
    Raises:
        InvalidSpecError: unreadable file, malformed JSON or not a JSON object.
    """
    try:
        with open(path, 'r') as f:
            values = json.load(f)
    except OSError as e:
        raise InvalidSpecError(f'Could not read config file "{path}": {e}') from e
    except json.JSONDecodeError as e:
        raise InvalidSpecError(f'Malformed JSON in config file "{path}": {e}') from e
    if not isinstance(values, dict):
        raise InvalidSpecError(f'Config file "{path}" must hold a JSON object.')
    return values


def resolve_config(path=None, **flags):
    """
    Layer parameter defaults, the JSON config file and explicit flags (None means not given).

    Returns:
        RunConfig: the validated configuration.

    Raises:
        InvalidSpecError: unknown keys or invalid values.
    """
    values = {'jobs': default_jobs()}
    if path is not None:
        values = OptionsMixin.merge_options(values, load_config_file(path))
    values = OptionsMixin.merge_options(values, {k: v for k, v in flags.items() if v is not None})

    unknown = sorted(k for k in values if k not in RunConfig.param or k == 'name')
    if unknown:
        raise InvalidSpecError(f'Unknown configuration key(s): {", ".join(unknown)}.')
    config = RunConfig(**values)
    log.debug(f'Resolved configuration: {config.to_json()}')
    return config
