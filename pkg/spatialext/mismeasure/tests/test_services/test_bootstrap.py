"""
********************************************************************************
* Name: test_bootstrap.py
* Created On: March 18, 2026
********************************************************************************
"""
import unittest

import numpy as np

from ...exceptions import BootstrapAbortedError, InvalidSpecError
from ...services.bootstrap import BlockSpec, as_seed_sequence, block_resample, bootstrap_se, coverage
from ..factories import linear_dataset


def _mean_y(data, seed):
    return data.y.mean()


def _means(data, seed):
    return [data.y.mean(), data.x.mean()]


def _failing(data, seed):
    raise RuntimeError('no estimate')


class BlockSpecTests(unittest.TestCase):

    def test_for_region(self):
        spec = BlockSpec.for_region(130.0, 65.0)
        self.assertAlmostEqual(130.0 / 22.0, spec.l1)
        self.assertAlmostEqual(65.0 / 15.0, spec.l2)
        spec.check((130.0, 65.0))

    def test_block_too_large(self):
        with self.assertRaises(InvalidSpecError):
            BlockSpec(l1=20.0, l2=10.0).check((40.0, 20.0))

    def test_seed_sequence(self):
        seed = np.random.SeedSequence(3)
        self.assertIs(seed, as_seed_sequence(seed))
        self.assertEqual(3, as_seed_sequence(3).entropy)


class BlockResampleTests(unittest.TestCase):

    def setUp(self):
        self.data = linear_dataset(n=300, seed=1)

    def test_size_and_region(self):
        resample = block_resample(self.data, BlockSpec(l1=4.0, l2=4.0), 5)
        self.assertEqual(self.data.n, resample.n)
        self.assertGreaterEqual(resample.region[0], self.data.region[0])
        self.assertGreaterEqual(resample.region[1], self.data.region[1])
        self.assertTrue(set(resample.y.tolist()) <= set(self.data.y.tolist()))

    def test_reproducible(self):
        spec = BlockSpec(l1=4.0, l2=4.0)
        first = block_resample(self.data, spec, 5)
        second = block_resample(self.data, spec, 5)
        np.testing.assert_array_equal(first.frame.to_numpy(), second.frame.to_numpy())

    def test_region_sized_block_is_identity(self):
        width, height = self.data.region
        spec = BlockSpec(l1=2 * width, l2=2 * height, max_area_fraction=4.0)
        resample = block_resample(self.data, spec, 9)
        np.testing.assert_allclose(self.data.frame.to_numpy(), resample.frame.to_numpy())
        self.assertEqual(self.data.region, resample.region)


class BootstrapSeTests(unittest.TestCase):

    def setUp(self):
        self.data = linear_dataset(n=300, seed=2)
        self.spec = BlockSpec(l1=4.0, l2=4.0)

    def test_minimum_replicates(self):
        with self.assertRaises(InvalidSpecError):
            bootstrap_se(self.data, _mean_y, self.spec, B=10)

    def test_direct(self):
        result = bootstrap_se(self.data, _means, self.spec, B=40, seed=1)
        self.assertEqual((40, 2), result.draws.shape)
        self.assertEqual((2, 2), result.ci95.shape)
        self.assertTrue(np.all(result.se > 0))
        self.assertTrue(np.all(result.ci95[:, 0] < result.ci95[:, 1]))
        self.assertEqual(0, result.failures)
        self.assertEqual(['draw', 'theta_1', 'theta_2'], list(result.to_frame().columns))
        self.assertEqual(40, result.to_dict()['B'])

    def test_mean_se_scale(self):
        result = bootstrap_se(self.data, _mean_y, self.spec, B=100, seed=3)
        naive = np.std(self.data.y, ddof=1) / np.sqrt(self.data.n)
        self.assertGreater(result.se[0], 0.5 * naive)
        self.assertLess(result.se[0], 2.0 * naive)

    def test_linear_path_matches_direct_path(self):
        direct = bootstrap_se(self.data, _means, self.spec, B=25, seed=4)
        fast = bootstrap_se(self.data, None, self.spec, B=25, seed=4,
                            linear=lambda d: np.column_stack([d.y, d.x]))
        np.testing.assert_allclose(direct.draws, fast.draws, rtol=1e-10)
        np.testing.assert_allclose(direct.se, fast.se, rtol=1e-10)

    def test_aborted(self):
        with self.assertRaises(BootstrapAbortedError):
            bootstrap_se(self.data, _failing, self.spec, B=20, seed=1)


class CoverageTests(unittest.TestCase):

    def test_scalar(self):
        intervals = [(0.0, 1.0), (0.5, 2.0), (1.5, 2.0), (-1.0, 0.4)]
        self.assertEqual(0.5, coverage(intervals, 0.75))

    def test_per_coordinate(self):
        intervals = np.array([[[0.0, 1.0], [0.0, 1.0]], [[2.0, 3.0], [0.0, 1.0]]])
        np.testing.assert_allclose([0.5, 1.0], coverage(intervals, [0.5, 0.5]))

    def test_invalid(self):
        with self.assertRaises(InvalidSpecError):
            coverage([], 1.0)
        with self.assertRaises(InvalidSpecError):
            coverage([(0.0, 1.0, 2.0)], 1.0)


if __name__ == '__main__':
    unittest.main()
