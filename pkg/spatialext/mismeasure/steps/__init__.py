from .estimation_step import EstimationStep
from .residualize_step import ResidualizeStep
from .distance_estimation_step import DistanceEstimationStep
from .bootstrap_step import BootstrapStep
from .combine_step import CombineStep
from .effect_test_step import EffectTestStep
from .pipeline import estimation_workflow, run_estimation

__all__ = ['EstimationStep', 'ResidualizeStep', 'DistanceEstimationStep', 'BootstrapStep', 'CombineStep',
           'EffectTestStep', 'estimation_workflow', 'run_estimation']
