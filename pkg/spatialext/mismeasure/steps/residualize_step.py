"""
********************************************************************************
* Name: residualize_step.py
* Created On: March 12, 2026
********************************************************************************
"""
from ..services.estimator import residualize_covariates
from .estimation_step import EstimationStep


class ResidualizeStep(EstimationStep):
    """
    Removes the linear covariate shift from the outcome. Skipped for datasets without covariates.

    Writes:
        data_tilde(Dataset): data used by the later steps.
        link(LinkModel): covariate coefficients (None when skipped).
    """
    TYPE = 'residualize_step'

    def init_parameters(self, **kwargs):
        return {
            'columns': {
                'help': 'Columns from which the covariate shift is removed.',
                'value': kwargs.get('columns', ['y']),
                'required': True,
            },
        }

    def run(self, context):
        self.require(context, 'data')
        data = context['data']
        if not data.has_covariates or data.discrete:
            context['data_tilde'] = data
            context['link'] = None
            return self.STATUS_SKIPPED

        data_tilde, link = residualize_covariates(data, columns=tuple(self.get_parameter('columns')))
        context['data_tilde'] = data_tilde
        context['link'] = link
