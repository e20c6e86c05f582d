"""
********************************************************************************
* Name: test_benchmarks.py
* Created On: March 21, 2026
********************************************************************************
"""
import unittest

from . import RUN_ACCEPTANCE, SKIP_REASON
from ...cli.config import RunConfig
from ...cli.suites import check_failures, run_suite
from ...services.job_manager import default_jobs


def _run(suite, **settings):
    report = run_suite(suite, RunConfig(jobs=default_jobs(), **settings))
    check_failures(report)
    return report.summary().set_index(['estimator', 'parameter'])


@unittest.skipUnless(RUN_ACCEPTANCE, SKIP_REASON)
class LinearDesignTests(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.summary = _run('table1', reps=100, n=1500, seed=1)

    def test_infeasible_ols(self):
        row = self.summary.loc[('infeasible_ols', 'theta_2')]
        self.assertTrue(1.99 <= row['mean'] <= 2.01, row['mean'])
        self.assertTrue(0.02 <= row['sd'] <= 0.04, row['sd'])

    def test_weighted_spatial(self):
        slope = self.summary.loc[('weighted_spatial', 'theta_2')]
        self.assertTrue(1.95 <= slope['mean'] <= 2.12, slope['mean'])
        self.assertLessEqual(slope['rmse'], 0.12)
        intercept = self.summary.loc[('weighted_spatial', 'theta_1')]
        self.assertTrue(-3.80 <= intercept['mean'] <= -3.30, intercept['mean'])
        self.assertLessEqual(intercept['rmse'], 0.35)
        sigma = self.summary.loc[('weighted_spatial', 'sigma_u')]
        self.assertTrue(1.05 <= sigma['mean'] <= 1.35, sigma['mean'])

    def test_iv_is_noisier(self):
        iv_sd = self.summary.loc[('iv_nearest_neighbor', 'theta_2'), 'sd']
        spatial_sd = self.summary.loc[('weighted_spatial', 'theta_2'), 'sd']
        self.assertGreaterEqual(iv_sd, 1.5 * spatial_sd)

    def test_naive_ols(self):
        row = self.summary.loc[('naive_ols', 'theta_2')]
        self.assertAlmostEqual(1.22, row['mean'], delta=0.05)


@unittest.skipUnless(RUN_ACCEPTANCE, SKIP_REASON)
class PolynomialDesignTests(unittest.TestCase):

    def test_quartile_curve_errors(self):
        summary = _run('polynomial', reps=50, n=1500, seed=2)
        for point in ('g_q1', 'g_q2', 'g_q3'):
            self.assertLessEqual(summary.loc[('weighted_spatial', point), 'rmse'], 0.5, point)
        for point in ('g_q1', 'g_q3'):
            self.assertGreaterEqual(summary.loc[('iv_nearest_neighbor', point), 'rmse'], 3.0, point)


@unittest.skipUnless(RUN_ACCEPTANCE, SKIP_REASON)
class CoverageTests(unittest.TestCase):

    def test_interval_coverage(self):
        summary = _run('coverage', reps=200, n=1500, B=200, seed=3)
        for parameter in ('theta_1', 'theta_2'):
            coverage = summary.loc[('weighted_spatial', parameter), 'coverage']
            self.assertTrue(0.88 <= coverage <= 0.99, coverage)
            self.assertLessEqual(summary.loc[('naive_ols', parameter), 'coverage'], 0.05)


@unittest.skipUnless(RUN_ACCEPTANCE, SKIP_REASON)
class AlternativeDesignTests(unittest.TestCase):

    def test_median_centering(self):
        summary = _run('appendixB_median', reps=50, n=1500, seed=4)
        mean = summary.loc[('weighted_spatial', 'theta_2'), 'mean']
        self.assertTrue(1.95 <= mean <= 2.15, mean)

    def test_probit(self):
        summary = _run('appendixB_probit', reps=50, n=1500, seed=5)
        spatial = summary.loc[('weighted_spatial', 'theta_2'), 'mean']
        naive = summary.loc[('naive_probit', 'theta_2'), 'mean']
        self.assertTrue(0.27 <= spatial <= 0.35, spatial)
        self.assertLess(naive, spatial)


if __name__ == '__main__':
    unittest.main()
