"""
********************************************************************************
* Name: bootstrap_step.py
* Created On: March 12, 2026
********************************************************************************
"""
from ..services.estimator import EstimatorConfig, distance_variances
from .estimation_step import EstimationStep


class BootstrapStep(EstimationStep):
    """
    Joint block-bootstrap draws of every per-spacing estimate, all spacings re-estimated on each resample.

    Options:
        enabled(bool): skip the step (and fall back to equal weights) when False.

    Writes:
        bootstrap(GridBootstrap): the draws; var_hat is set on each estimate.
    """
    TYPE = 'bootstrap_step'
    SEED_KEY = 2

    @property
    def default_options(self):
        default_options = super().default_options
        default_options.update({'enabled': True})
        return default_options

    def run(self, context):
        if not self.get_option('enabled'):
            context['bootstrap'] = None
            return self.STATUS_SKIPPED

        self.require(context, 'data_tilde', 'estimates')
        config = context.get('config') or EstimatorConfig()
        context['bootstrap'] = distance_variances(context['data_tilde'], context['estimates'], config,
                                                  seed=self.seed_for(context), jobs=context.get('jobs', 1))
