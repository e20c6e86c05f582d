"""
********************************************************************************
* Name: effect_test_step.py
* Created On: March 12, 2026
********************************************************************************
"""
import numpy as np

from ..services.estimator import EstimatorConfig, me_effect_test, ols, probit_mle
from .estimation_step import EstimationStep


class EffectTestStep(EstimationStep):
    """
    Compares the weighted spatial estimate with the naive estimate (OLS, or probit MLE for binary outcomes).
    Skipped when the combination has no standard errors.

    Writes:
        naive(dict): the naive estimate.
        effect_test(dict): statistic and significance per level.
    """
    TYPE = 'effect_test_step'

    def init_parameters(self, **kwargs):
        return {
            'coordinate': {
                'help': 'Index of the theta coordinate tested (0 = intercept).',
                'value': kwargs.get('coordinate', 1),
                'required': True,
            },
        }

    def run(self, context):
        self.require(context, 'data', 'combined')
        data = context['data']
        config = context.get('config') or EstimatorConfig()
        if config.kind_for(data) == 'probit' and not data.discrete:
            naive = probit_mle(data)
        else:
            naive = ols(data, kind=config.kind_for(data))
        context['naive'] = naive

        combined = context['combined']
        k = self.get_parameter('coordinate')
        if combined.se_weighted is None or not 0 < combined.se_weighted[k] < np.inf:
            context['effect_test'] = None
            return self.STATUS_SKIPPED

        context['effect_test'] = me_effect_test(combined.theta_weighted[k], combined.se_weighted[k],
                                                naive['theta'][k], naive['se'][k])
