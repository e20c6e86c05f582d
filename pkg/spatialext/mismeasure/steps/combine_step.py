"""
********************************************************************************
* Name: combine_step.py
* Created On: March 12, 2026
********************************************************************************
"""
import numpy as np

from ..services.estimator import combine
from .estimation_step import EstimationStep


class CombineStep(EstimationStep):
    """
    Combines the per-spacing estimates (unweighted and inverse-variance weighted). With bootstrap draws in the
    context the weighted standard error and interval come from the combined draws.

    Writes:
        combined(CombinedEstimate): the combination.
        kappa(list<float>): covariate effect on y on the original scale (only with a link model).
    """
    TYPE = 'combine_step'

    def run(self, context):
        self.require(context, 'estimates')
        estimates = context['estimates']
        boot = context.get('bootstrap')
        combined = combine(estimates, draws=None if boot is None else boot.draws)
        context['combined'] = combined

        link = context.get('link')
        if link is not None:
            used = [e for e in estimates if e.converged and hasattr(e.fit, 'eta_hat')]
            deltas = [e.fit.eta_hat.get('delta', [0.0] * len(link.columns)) for e in used]
            delta = np.mean(deltas, axis=0) if deltas else np.zeros(len(link.columns))
            context['kappa'] = link.total_y(delta).tolist()
