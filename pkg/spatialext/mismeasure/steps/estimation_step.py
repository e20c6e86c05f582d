"""
********************************************************************************
* Name: estimation_step.py
* Created On: March 12, 2026
********************************************************************************
"""
import numpy as np

from ..models import Step
from ..services.bootstrap import as_seed_sequence


class EstimationStep(Step):
    """
    Base class of the estimation pipeline steps.

    Steps share one context dictionary. Common entries:
        data(Dataset): the observations as read.
        config(EstimatorConfig): pipeline controls.
        seed(int|numpy.random.SeedSequence): root seed of the run.
        jobs(int): parallel workers.
    """  # noqa: E501
    TYPE = 'estimation_step'
    SEED_KEY = 0

    def seed_for(self, context):
        """
        Seed of this step: a fixed child of the root seed, independent of which other steps run.
        """
        root = as_seed_sequence(context.get('seed'))
        return np.random.SeedSequence(entropy=root.entropy, spawn_key=tuple(root.spawn_key) + (self.SEED_KEY,))

    @staticmethod
    def require(context, *keys):
        """
        Raises:
            ValueError: a context entry produced by an earlier step is missing.
        """
        missing = [key for key in keys if context.get(key) is None]
        if missing:
            raise ValueError(f'Missing pipeline input(s): {", ".join(missing)}.')
