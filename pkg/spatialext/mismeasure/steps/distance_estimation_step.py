"""
********************************************************************************
* Name: distance_estimation_step.py
* Created On: March 12, 2026
********************************************************************************
"""
import logging

from ..services.estimator import EstimatorConfig, estimate_over_grid
from .estimation_step import EstimationStep

log = logging.getLogger(f'mismeasure.{__name__}')


class DistanceEstimationStep(EstimationStep):
    """
    Estimates theta at every spacing of the configured grid.

    Writes:
        estimates(list<DistanceEstimate>): one per spacing that produced a fit.
    """
    TYPE = 'distance_estimation_step'
    SEED_KEY = 1

    def run(self, context):
        self.require(context, 'data_tilde')
        config = context.get('config') or EstimatorConfig()
        estimates = estimate_over_grid(context['data_tilde'], config.grid, config, seed=self.seed_for(context),
                                       jobs=context.get('jobs', 1))
        context['estimates'] = estimates

        failed = [e.ds for e in estimates if not e.converged]
        if failed:
            self.set_attribute(self.ATTR_STATUS_MESSAGE, f'Not converged at spacing(s) {failed}.')
            return self.STATUS_NOT_CONVERGED
