"""
********************************************************************************
* Name: pipeline.py
* Created On: March 12, 2026
********************************************************************************
"""
import logging

import numpy as np

from ..exceptions import DataError
from ..models import EstimationWorkflow
from ..results import EstimateResult
from ..services.discrete import misclassification_frame
from ..services.estimator import EstimatorConfig, iv_nearest_neighbor, ols, probit_mle
from .bootstrap_step import BootstrapStep
from .combine_step import CombineStep
from .distance_estimation_step import DistanceEstimationStep
from .effect_test_step import EffectTestStep
from .residualize_step import ResidualizeStep

log = logging.getLogger(f'mismeasure.{__name__}')


def estimation_workflow(bootstrap=True, coordinate=1):
    """
    The full single-dataset pipeline: residualize -> per-spacing estimates -> bootstrap -> combine -> effect test.
    """
    return EstimationWorkflow('estimate', steps=[
        ResidualizeStep(name='residualize', help='Remove the covariate shift from y.'),
        DistanceEstimationStep(name='estimate_per_ds', help='Sieve likelihood fit at every spacing.'),
        BootstrapStep(name='bootstrap', help='Block-bootstrap variances.', options={'enabled': bootstrap}),
        CombineStep(name='combine', help='Inverse-variance weighted combination.'),
        EffectTestStep(name='effect_test', help='Measurement-error effect test.', coordinate=coordinate),
    ])


def _baselines(data, kind):
    baselines = {}
    if kind == 'probit' and not data.discrete:
        baselines['naive_probit'] = probit_mle(data)
        if data.oracle:
            baselines['infeasible_probit'] = probit_mle(data, use_true_x=True)
        return baselines

    design_kind = 'polynomial3' if kind == 'poly3_gauss' else 'linear'
    baselines['naive_ols'] = ols(data, kind=design_kind)
    if data.oracle:
        baselines['infeasible_ols'] = ols(data, use_true_x=True, kind=design_kind)
    if not data.discrete:
        try:
            baselines['iv_nearest_neighbor'] = iv_nearest_neighbor(data, kind=design_kind)
        except DataError as e:
            log.warning(f'IV nearest-neighbor baseline skipped: {e}')
    return baselines


def run_estimation(data, config=None, seed=None, jobs=1, bootstrap=True, echo=None):
    """
    Run the estimation workflow on one dataset.

    Args:
        data(Dataset): observations.
        config(EstimatorConfig): pipeline controls.
        seed(int): root seed.
        jobs(int): parallel workers.
        bootstrap(bool): compute block-bootstrap variances (weights and standard errors).
        echo(dict): configuration echo stored in the result.

    Returns:
        EstimateResult, EstimationWorkflow: the result and the executed workflow (step statuses).
    """
    config = config or EstimatorConfig()
    workflow = estimation_workflow(bootstrap=bootstrap)
    context = workflow.run(data=data, config=config, seed=seed, jobs=jobs)

    result = EstimateResult(config=echo or {'estimator': config.to_dict(), 'seed': seed}, name='estimate')
    result.set_combined(context['combined'])
    result.link = context.get('link')
    result.effect_test = context.get('effect_test')
    for name, estimate in _baselines(data, config.kind_for(data)).items():
        result.add_baseline(name, estimate)

    estimates = context['estimates']
    result.set_attribute('sigma_u', [e.sigma_u for e in estimates])
    if context.get('kappa') is not None:
        result.set_attribute('kappa', context['kappa'])
    if context.get('bootstrap') is not None:
        result.set_attribute('bootstrap', context['bootstrap'].to_dict())
    if data.discrete:
        best = max((e for e in estimates if e.converged), key=lambda e: e.fit.loglik, default=estimates[0])
        result.misclassification = {
            'ds': best.ds,
            'mis_x': misclassification_frame(best.fit.model.mis_x.p).to_dict(orient='index'),
            'mis_z': misclassification_frame(best.fit.model.mis_z.p, row_label='Z').to_dict(orient='index'),
            'pi': np.asarray(best.fit.model.pi).tolist(),
        }
    result.set_attribute('steps', {step.name: step.get_status() for step in workflow.steps})
    return result, workflow
