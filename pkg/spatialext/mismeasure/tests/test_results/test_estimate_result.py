"""
********************************************************************************
* Name: test_estimate_result.py
* Created On: March 20, 2026
********************************************************************************
"""
import json
import tempfile
import unittest
from pathlib import Path

import numpy as np

from ...results import EstimateResult
from ...services.estimator import combine, me_effect_test


class EstimateResultTests(unittest.TestCase):

    def setUp(self):
        self.result = EstimateResult(config={'seed': 1}, name='estimate')
        combined = combine([
            {'ds': 0.75, 'theta_hat': [-3.4, 1.9], 'converged': True, 'var_hat': [0.04, 0.01]},
            {'ds': 1.5, 'theta_hat': [-3.6, 2.1], 'converged': True, 'var_hat': [0.04, 0.01]},
        ])
        self.result.set_combined(combined)
        self.result.add_baseline('naive_ols', {'theta': np.array([-2.0, 1.5]), 'se': np.array([0.1, 0.02]),
                                               'n': 1500})
        self.result.effect_test = me_effect_test(2.0, 0.07, 1.5, 0.02)

    def test_per_ds_table(self):
        frame = self.result.get_dataset('per_ds')
        self.assertEqual(4, len(frame))
        np.testing.assert_allclose([0.5, 0.5, 0.5, 0.5], frame['weight'])

    def test_baseline_lists(self):
        self.assertEqual([-2.0, 1.5], self.result.baselines['naive_ols']['theta'])
        self.assertEqual(1500, self.result.baselines['naive_ols']['n'])

    def test_table(self):
        table = self.result.table()
        self.assertIn('weighted_spatial', table)
        self.assertIn('unweighted_spatial', table)
        self.assertIn('naive_ols', table)
        self.assertIn('measurement-error effect statistic: 5.556', table)

    def test_empty_table(self):
        self.assertEqual('', EstimateResult().table())

    def test_to_dict(self):
        d = self.result.to_dict()
        self.assertEqual('estimate_result', d['type'])
        self.assertAlmostEqual(2.0, d['combined']['theta_weighted'][1])
        self.assertIsNone(d['link'])
        self.assertIsNone(d['misclassification'])

    def test_write(self):
        with tempfile.TemporaryDirectory() as directory:
            paths = self.result.write(directory)
            self.assertEqual(['per_ds.csv', 'estimate.json', 'estimate.txt'], [p.name for p in paths])
            document = json.loads(Path(directory, 'estimate.json').read_text())
            self.assertEqual({'seed': 1}, document['config'])
            self.assertEqual(['naive_ols'], list(document['baselines']))


if __name__ == '__main__':
    unittest.main()
