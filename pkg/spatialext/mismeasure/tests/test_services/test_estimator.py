"""
********************************************************************************
* Name: test_estimator.py
* Created On: March 19, 2026
********************************************************************************
"""
import unittest
from types import SimpleNamespace
from unittest import mock

import numpy as np
import pandas as pd

from ...exceptions import ConvergenceError, DataError, InvalidSpecError
from ...models import Dataset
from ...services import estimator as estimator_module
from ...services.estimator import (DistanceEstimate, DistanceGrid, EstimatorConfig, LinkModel, combine,
                                   distance_variances, estimate_at, estimate_over_grid, iv_nearest_neighbor,
                                   me_effect_test, nearest_neighbor_values, ols, probit_mle, quartile_curve,
                                   quartile_points, residualize_covariates, select_ds_range)
from ...services.kde import KernelSpec
from ..factories import linear_dataset, linear_frame, spatial_dataset


def _record(ds, theta, converged=True, var_hat=None):
    return {'ds': ds, 'theta_hat': list(theta), 'converged': converged, 'var_hat': var_hat}


class EstimatorConfigTests(unittest.TestCase):

    def test_defaults(self):
        config = EstimatorConfig()
        self.assertEqual([0.75, 1.5, 2.25, 3.0, 3.75, 4.5], list(config.grid))
        self.assertEqual('mean', config.centering().kind)
        self.assertEqual(50, config.bootstrap_reps)

    def test_validation(self):
        with self.assertRaises(InvalidSpecError):
            EstimatorConfig(i_n=3)
        with self.assertRaises(InvalidSpecError):
            EstimatorConfig(bandwidth_yxz=[0.5, 0.5])
        with self.assertRaises(InvalidSpecError):
            EstimatorConfig(ds_values=[1.0, 1.2], bandwidth_s=0.3)
        with self.assertRaises(InvalidSpecError):
            EstimatorConfig(bootstrap_reps=10)

    def test_kind_for(self):
        frame = linear_frame(n=50)
        frame['y'] = (frame['y'] > 3.5).astype(float)
        binary = Dataset(frame, (40.0, 20.0))
        self.assertEqual('probit', EstimatorConfig().kind_for(binary))
        self.assertEqual('linear_gauss', EstimatorConfig().kind_for(linear_dataset(n=50)))
        self.assertEqual('poly3_gauss', EstimatorConfig(model_kind='poly3_gauss').kind_for(binary))

    def test_kernel_for(self):
        data = linear_dataset(n=100)
        pairs = SimpleNamespace(effective_count=100.0)
        kernel = EstimatorConfig(bandwidth_yxz=[0.1, 0.2, 0.3]).kernel_for(data, pairs)
        self.assertEqual([0.1, 0.2, 0.3], kernel.bandwidth_yxz)
        kernel = EstimatorConfig(kernel_order=4).kernel_for(data, pairs)
        self.assertEqual('polynomial_gaussian', kernel.family)
        self.assertEqual(kernel.bandwidth_yxz[1], kernel.bandwidth_yxz[2])

    def test_basis_for(self):
        data = linear_dataset(n=100).with_z(linear_frame(n=100, seed=9)['x'].to_numpy())
        self.assertEqual((7, 5), EstimatorConfig().basis_for(data).shape_of('x'))
        self.assertEqual((3, 5), EstimatorConfig(i_n=2).basis_for(data).shape_of('x'))


class DistanceGridTests(unittest.TestCase):

    def test_valid(self):
        grid = DistanceGrid(ds_values=[1.0, 1.6, 2.5], ds0=0.5, bandwidth_s=0.3)
        self.assertEqual(3, len(grid))
        self.assertEqual([1.0, 1.6, 2.5], list(grid))

    def test_invalid(self):
        with self.assertRaises(InvalidSpecError):
            DistanceGrid(ds_values=[])
        with self.assertRaises(InvalidSpecError):
            DistanceGrid(ds_values=[0.5, 1.5], ds0=0.5)
        with self.assertRaises(InvalidSpecError):
            DistanceGrid(ds_values=[1.0, 1.5], bandwidth_s=0.3)

    def test_spanning(self):
        grid = DistanceGrid.spanning(0.6, 3.0, 0.6, 0.3)
        np.testing.assert_allclose([0.6, 1.2, 1.8, 2.4, 3.0], list(grid))


class CombineTests(unittest.TestCase):

    def test_inverse_variance_weights(self):
        combined = combine([_record(1.0, [0.0, 2.0]), _record(2.0, [0.0, 2.4])], variances=[[1.0, 1.0], [1.0, 4.0]])
        self.assertAlmostEqual(2.08, combined.theta_weighted[1])
        self.assertAlmostEqual(2.2, combined.theta_unweighted[1])
        np.testing.assert_allclose([[0.5, 0.8], [0.5, 0.2]], combined.weights)
        self.assertAlmostEqual(1.0 / np.sqrt(1.25), combined.se_weighted[1])

    def test_equal_weights_without_variances(self):
        combined = combine([_record(1.0, [1.0]), _record(2.0, [3.0])])
        self.assertIsNone(combined.se_weighted)
        self.assertAlmostEqual(2.0, combined.theta_weighted[0])

    def test_non_converged_excluded(self):
        combined = combine([_record(1.0, [1.0], var_hat=[1.0]), _record(2.0, [9.0], False, [1.0]),
                            _record(3.0, [3.0], var_hat=[1.0])])
        self.assertEqual([2.0], combined.excluded)
        self.assertAlmostEqual(2.0, combined.theta_weighted[0])
        self.assertEqual(0.0, combined.weights[1, 0])
        frame = combined.to_frame()
        self.assertEqual(3, len(frame))
        self.assertEqual(['ds', 'coordinate', 'estimate', 'variance', 'weight', 'converged'], list(frame.columns))

    def test_infinite_and_zero_variances(self):
        combined = combine([_record(1.0, [1.0]), _record(2.0, [3.0])], variances=[[np.inf], [1.0]])
        self.assertAlmostEqual(3.0, combined.theta_weighted[0])
        combined = combine([_record(1.0, [1.0]), _record(2.0, [3.0])], variances=[[0.0], [1.0]])
        self.assertAlmostEqual(1.0, combined.theta_weighted[0])
        self.assertEqual(0.0, combined.se_weighted[0])
        combined = combine([_record(1.0, [1.0]), _record(2.0, [3.0])], variances=[[np.inf], [np.inf]])
        self.assertAlmostEqual(2.0, combined.theta_weighted[0])
        self.assertTrue(np.isinf(combined.se_weighted[0]))

    def test_failures(self):
        with self.assertRaises(ConvergenceError):
            combine([_record(1.0, [1.0], False)])
        with self.assertRaises(InvalidSpecError):
            combine([_record(1.0, [1.0])], variances=[[1.0], [1.0]])

    def test_weights_sum_to_one(self):
        combined = combine([_record(d, [d, 2 * d]) for d in (1.0, 2.0, 3.0)],
                           variances=[[1.0, 2.0], [3.0, 0.5], [2.0, 2.0]])
        np.testing.assert_allclose([1.0, 1.0], combined.weights.sum(axis=0))

    def test_weights_follow_permutation(self):
        records = [_record(d, [d, 2 * d]) for d in (1.0, 2.0, 3.0)]
        variances = [[1.0, 2.0], [3.0, 0.5], [2.0, 2.0]]
        combined = combine(records, variances=variances)
        order = [2, 0, 1]
        permuted = combine([records[k] for k in order], variances=[variances[k] for k in order])
        np.testing.assert_allclose(combined.weights[order], permuted.weights)
        np.testing.assert_allclose(combined.theta_weighted, permuted.theta_weighted)
        np.testing.assert_allclose(combined.se_weighted, permuted.se_weighted)

    def test_correlated_draws_standard_error(self):
        rng = np.random.default_rng(8)
        draws = 2.0 + rng.normal(0.0, 0.1, size=(2000, 1, 1)) + rng.normal(0.0, 0.01, size=(2000, 4, 1))
        records = [_record(ds, [2.0]) for ds in (1.0, 1.5, 2.0, 2.5)]

        combined = combine(records, draws=draws)
        spread = np.std((combined.weights[None] * draws).sum(axis=1), axis=0, ddof=1)
        self.assertAlmostEqual(spread[0], combined.se_weighted[0])
        self.assertGreater(combined.se_weighted[0], 0.09)
        self.assertEqual((1, 2), combined.ci95_weighted.shape)
        self.assertLess(combined.ci95_weighted[0, 0], 1.85)
        self.assertGreater(combined.ci95_weighted[0, 1], 2.15)

        independent = combine(records, variances=list(np.var(draws, axis=0, ddof=1)))
        self.assertLess(independent.se_weighted[0], 0.06)
        self.assertIsNone(independent.ci95_weighted)

    def test_draws_of_excluded_spacing_ignored(self):
        draws = np.random.default_rng(2).normal(1.0, 0.1, size=(50, 2, 1))
        draws[:, 1] = np.nan
        combined = combine([_record(1.0, [1.0]), _record(2.0, [5.0], converged=False)], draws=draws)
        self.assertAlmostEqual(np.std(draws[:, 0, 0], ddof=1), combined.se_weighted[0])
        self.assertEqual([2.0], combined.excluded)

    def test_draws_shape_checked(self):
        with self.assertRaises(InvalidSpecError):
            combine([_record(1.0, [1.0]), _record(2.0, [3.0])], draws=np.zeros((10, 3, 1)))
        with self.assertRaises(InvalidSpecError):
            combine([_record(1.0, [1.0])], draws=np.zeros((10, 1)))


class DistanceVariancesTests(unittest.TestCase):

    @staticmethod
    def _shifted_mean(data, ds, config=None, seed=None, init=None, basis=None):
        return SimpleNamespace(theta_hat=np.array([data.x.mean() + ds]))

    def test_spacings_share_each_resample(self):
        data = linear_dataset(n=300, seed=4)
        estimates = [SimpleNamespace(ds=ds, theta_hat=np.array([ds]), fit=SimpleNamespace(basis=None), var_hat=None)
                     for ds in (1.0, 1.5, 2.0)]
        with mock.patch.object(estimator_module, 'estimate_at', side_effect=self._shifted_mean):
            boot = distance_variances(data, estimates, EstimatorConfig(bootstrap_reps=20), seed=5)

        self.assertEqual((20, 3, 1), boot.draws.shape)
        np.testing.assert_allclose(0.5, boot.draws[:, 1, 0] - boot.draws[:, 0, 0])
        self.assertGreater(boot.variances[0, 0], 0.0)
        for estimate in estimates:
            np.testing.assert_allclose(boot.variances[0], estimate.var_hat)

        records = [_record(e.ds, e.theta_hat, var_hat=list(e.var_hat)) for e in estimates]
        combined = combine(records, draws=boot.draws)
        self.assertAlmostEqual(np.sqrt(boot.variances[0, 0]), combined.se_weighted[0])

        d = boot.to_dict()
        self.assertEqual(20, d['B'])
        self.assertEqual([1.0, 1.5, 2.0], [entry['ds'] for entry in d['per_ds']])
        self.assertEqual(1, len(d['per_ds'][0]['ci95']))


class DistanceEstimateTests(unittest.TestCase):

    def test_sigma_u(self):
        kernel = KernelSpec()
        pseudo = SimpleNamespace(dropped=[3])
        fit = SimpleNamespace(converged=True, eta_hat={'sigma_u': 1.2})
        estimate = DistanceEstimate(ds=1.0, theta_hat=np.array([0.0, 2.0]), fit=fit, pseudo=pseudo, kernel=kernel)
        self.assertEqual(1.2, estimate.sigma_u)
        self.assertEqual(1, estimate.to_record()['dropped'])
        discrete = DistanceEstimate(ds=1.0, theta_hat=np.zeros(2), fit=SimpleNamespace(converged=False, sigma_u=0.9),
                                    pseudo=pseudo, kernel=kernel)
        self.assertEqual(0.9, discrete.sigma_u)
        self.assertFalse(discrete.converged)


class SelectRangeTests(unittest.TestCase):

    def setUp(self):
        self.data = linear_dataset(n=50)

    def test_stabilizes(self):
        def evaluate(grid):
            values = list(grid)
            return 2.0 + 0.5 * np.exp(-values[0]), 0.3 / np.sqrt(len(values))

        selection = select_ds_range(self.data, 0.3, phi=0.25, evaluate=evaluate, max_ds=3.0)
        self.assertFalse(selection.exhausted)
        np.testing.assert_allclose([2.4, 3.0], list(selection.grid))
        phases = [entry['phase'] for entry in selection.audit]
        self.assertEqual(['start'] + ['grow_max'] * 4 + ['grow_min'] * 3, phases)
        self.assertEqual('stable', selection.audit[-1]['decision'])
        self.assertEqual(8, len(selection.audit_lines()))

    def test_exhausted(self):
        def evaluate(grid):
            values = list(grid)
            return 10.0 * (-1) ** len(values), 0.3 / np.sqrt(len(values))

        selection = select_ds_range(self.data, 0.3, evaluate=evaluate, max_ds=1.2)
        self.assertTrue(selection.exhausted)
        np.testing.assert_allclose([0.6, 1.2], list(selection.grid))
        self.assertIn('restart', [entry['phase'] for entry in selection.audit])

    def test_invalid_phi(self):
        with self.assertRaises(InvalidSpecError):
            select_ds_range(self.data, 0.3, phi=1.5, evaluate=lambda grid: (0.0, 1.0))


class ResidualizeTests(unittest.TestCase):

    def setUp(self):
        self.data = linear_dataset(n=200, seed=4, covariate=True)

    def test_least_squares_shift(self):
        tilde, link = residualize_covariates(self.data)
        slope = np.polyfit(self.data.w[:, 0], self.data.y, 1)[0]
        self.assertAlmostEqual(slope, link.kappa_y[0])
        np.testing.assert_allclose(self.data.y - slope * self.data.w[:, 0], tilde.y)
        np.testing.assert_allclose(self.data.x, tilde.x)
        self.assertEqual([0.0], link.kappa_x.tolist())
        self.assertEqual(['w'], link.columns)
        np.testing.assert_allclose(link.kappa_y + 0.5, link.total_y([0.5]))

    def test_both_columns(self):
        _, link = residualize_covariates(self.data, columns=('y', 'x'))
        self.assertNotEqual(0.0, link.kappa_x[0])
        np.testing.assert_allclose(link.kappa_x, link.kappa_z)

    def test_zero_covariate(self):
        data = self.data.with_values(w=np.zeros(self.data.n))
        tilde, link = residualize_covariates(data)
        self.assertEqual([0.0], link.kappa_y.tolist())
        np.testing.assert_allclose(data.y, tilde.y)

    def test_errors(self):
        with self.assertRaises(DataError):
            residualize_covariates(linear_dataset(n=20))
        with self.assertRaises(InvalidSpecError):
            residualize_covariates(self.data, columns=('z',))
        with self.assertRaises(DataError):
            residualize_covariates(self.data.with_values(w=np.ones(self.data.n)))

    def test_link_model_to_dict(self):
        link = LinkModel(np.array([1.0]), np.array([0.0]), np.array([0.0]), ['w'])
        self.assertEqual({'columns': ['w'], 'kappa_y': [1.0], 'kappa_x': [0.0], 'kappa_z': [0.0]}, link.to_dict())


class BaselineTests(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.data = linear_dataset(n=2000, seed=6)

    def test_ols_attenuation(self):
        oracle = ols(self.data, use_true_x=True)
        naive = ols(self.data)
        self.assertAlmostEqual(2.0, oracle['theta'][1], delta=0.1)
        self.assertAlmostEqual(1.6, naive['theta'][1], delta=0.1)
        self.assertAlmostEqual(1.0, oracle['sigma_u'], delta=0.1)
        self.assertEqual(2, len(oracle['se']))
        self.assertEqual(0, len(oracle['delta']))

    def test_ols_cubic(self):
        self.assertEqual(4, len(ols(self.data, kind='poly3_gauss')['theta']))

    def test_ols_without_oracle(self):
        with self.assertRaises(DataError):
            ols(self.data.with_values(x_star=None), use_true_x=True)

    def test_nearest_neighbor_values(self):
        frame = pd.DataFrame({'sx': [0.0, 0.0, 1.0, 1.5], 'sy': [0.0, 0.0, 0.0, 0.0], 'x': [1.0, 2.0, 3.0, 4.0],
                              'y': [0.0, 0.0, 0.0, 0.0]})
        data = Dataset(frame, (10.0, 10.0))
        np.testing.assert_allclose([3.0, 3.0, 4.0, 3.0], nearest_neighbor_values(data))
        with self.assertRaises(DataError):
            nearest_neighbor_values(data.take([0]))
        with self.assertRaises(DataError):
            nearest_neighbor_values(data.take([0, 1]))

    def test_iv_nearest_neighbor(self):
        rng = np.random.default_rng(8)
        m = 1000
        x_star = np.repeat(3.5 + rng.standard_normal(m), 2)
        sx = np.repeat(rng.uniform(1, 39, m), 2) + np.tile([0.0, 0.01], m)
        sy = np.repeat(rng.uniform(1, 19, m), 2)
        frame = pd.DataFrame({'sx': sx, 'sy': sy, 'x': x_star + 0.5 * rng.standard_normal(2 * m),
                              'y': -3.5 + 2.0 * x_star + rng.standard_normal(2 * m)})
        data = Dataset(frame, (40.0, 20.0))
        naive = ols(data)
        iv = iv_nearest_neighbor(data)
        self.assertGreater(iv['theta'][1], naive['theta'][1])
        self.assertAlmostEqual(2.0, iv['theta'][1], delta=0.2)
        self.assertTrue(np.all(iv['se'] > 0))

    def test_probit(self):
        frame = linear_frame(n=2000, seed=3)
        frame['y'] = (-3.5 + frame['x_star'] + np.random.default_rng(1).standard_normal(2000) > 0).astype(float)
        data = Dataset(frame, (40.0, 20.0))
        oracle = probit_mle(data, use_true_x=True)
        self.assertAlmostEqual(1.0, oracle['theta'][1], delta=0.15)
        with self.assertRaises(DataError):
            probit_mle(self.data)


class EffectTestTests(unittest.TestCase):

    def test_statistic(self):
        result = me_effect_test(1.82, 0.19, 0.41, 0.12)
        self.assertAlmostEqual(4.548, result['statistic'], places=3)
        self.assertTrue(result['significant_at']['0.01']['two_sided'])

    def test_not_significant(self):
        result = me_effect_test(1.0, 0.5, 0.9, 0.5)
        self.assertFalse(result['significant_at']['0.1']['one_sided'])

    def test_invalid_se(self):
        with self.assertRaises(InvalidSpecError):
            me_effect_test(1.0, 0.0, 0.5, 0.1)

    def test_quartile_curve(self):
        np.testing.assert_allclose([-2.50], quartile_curve([-3.5, 0.2, 0.2, -0.05], [3.51]), atol=5e-3)
        np.testing.assert_allclose([1.0, 2.0, 3.0], quartile_points([0.0, 1.0, 2.0, 3.0, 4.0]))


class SpatialEstimateTests(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.data = spatial_dataset(n=1500, seed=3)
        cls.config = EstimatorConfig(ds_values=[1.0], i_n=2, j_n=2, multistarts=1, max_iter=100)

    def test_estimate_at(self):
        estimate = estimate_at(self.data, 1.0, self.config, seed=2)
        self.assertEqual(1.0, estimate.ds)
        self.assertEqual(2, len(estimate.theta_hat))
        self.assertTrue(np.all(np.isfinite(estimate.theta_hat)))
        self.assertEqual(self.data.n, len(estimate.pseudo.z))
        self.assertGreater(estimate.sigma_u, 0.0)
        record = estimate.to_record()
        self.assertEqual(1.0, record['ds'])
        self.assertIsNone(record['var_hat'])

    def test_spacing_within_exclusion_radius(self):
        with self.assertRaises(InvalidSpecError):
            estimate_at(self.data, 0.5, self.config.replace(ds0=0.5, ds_values=[1.0]))

    def test_grid_without_pairs(self):
        grid = DistanceGrid(ds_values=[500.0])
        with self.assertRaises(ConvergenceError):
            estimate_over_grid(self.data.take(np.arange(200)), grid, self.config, seed=1)


if __name__ == '__main__':
    unittest.main()
