"""
********************************************************************************
* Name: test_pipeline.py
* Created On: March 19, 2026
********************************************************************************
"""
import json
import tempfile
import unittest
from pathlib import Path

import numpy as np

from ...services.estimator import EstimatorConfig
from ...steps import run_estimation
from ..factories import spatial_dataset


class RunEstimationTests(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.data = spatial_dataset('covariate', n=1500, seed=12)
        cls.config = EstimatorConfig(ds_values=[1.0, 1.75], i_n=2, j_n=2, multistarts=1, max_iter=100)
        cls.result, cls.workflow = run_estimation(cls.data, cls.config, seed=3, bootstrap=False)

    def test_step_statuses(self):
        statuses = self.result.get_attribute('steps')
        self.assertEqual('Complete', statuses['residualize'])
        self.assertIn(statuses['estimate_per_ds'], ('Complete', 'Not Converged'))
        self.assertEqual('Skipped', statuses['bootstrap'])
        self.assertEqual('Complete', statuses['combine'])
        self.assertEqual('Skipped', statuses['effect_test'])
        self.assertTrue(self.workflow.complete)

    def test_combination(self):
        combined = self.result.combined
        self.assertEqual(2, len(combined.theta_weighted))
        self.assertIsNone(combined.se_weighted)
        self.assertTrue(np.all(np.isfinite(combined.theta_unweighted)))
        self.assertEqual(4, len(self.result.get_dataset('per_ds')))

    def test_covariates(self):
        self.assertEqual(['w'], self.result.link.columns)
        self.assertEqual(1, len(self.result.get_attribute('kappa')))
        self.assertIsNone(self.result.effect_test)

    def test_baselines(self):
        self.assertEqual({'naive_ols', 'infeasible_ols', 'iv_nearest_neighbor'}, set(self.result.baselines))
        self.assertEqual(2, len(self.result.baselines['naive_ols']['theta']))
        self.assertEqual(2, len(self.result.get_attribute('sigma_u')))

    def test_write(self):
        with tempfile.TemporaryDirectory() as directory:
            paths = self.result.write(directory)
            self.assertEqual(['per_ds.csv', 'estimate.json', 'estimate.txt'], [p.name for p in paths])
            document = json.loads(Path(directory, 'estimate.json').read_text())
            self.assertEqual(3, document['config']['seed'])
            self.assertIn('weighted_spatial', Path(directory, 'estimate.txt').read_text())


if __name__ == '__main__':
    unittest.main()
