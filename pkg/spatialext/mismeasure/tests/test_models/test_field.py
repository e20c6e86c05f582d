"""
********************************************************************************
* Name: test_field.py
* Created On: March 14, 2026
********************************************************************************
"""
import pickle
import unittest

import numpy as np

from ...exceptions import InvalidSpecError
from ...models import ErrorDesign, FieldSpec, OutcomeDesign, RandomField


class FieldSpecTests(unittest.TestCase):

    def test_defaults(self):
        spec = FieldSpec()
        self.assertEqual((65, 130), spec.shape)
        self.assertEqual(130 * 65, spec.area)

    def test_invalid_variance(self):
        with self.assertRaises(InvalidSpecError):
            FieldSpec(variance=0.0)

    def test_invalid_lag1_corr(self):
        for value in (0.0, 1.0, 1.5):
            with self.assertRaises(InvalidSpecError):
                FieldSpec(lag1_corr=value)

    def test_invalid_width(self):
        with self.assertRaises(InvalidSpecError):
            FieldSpec(width=1)

    def test_invalid_spec_error_is_value_error(self):
        with self.assertRaises(ValueError):
            FieldSpec(corr_decay=0.5)

    def test_immutable(self):
        spec = FieldSpec()
        with self.assertRaises(TypeError):
            spec.width = 10

    def test_replace_and_equality(self):
        spec = FieldSpec()
        other = spec.replace(mean=0.0)
        self.assertEqual(0.0, other.mean)
        self.assertEqual(3.5, spec.mean)
        self.assertNotEqual(spec, other)
        self.assertEqual(spec, FieldSpec())

    def test_round_trip_dict_and_pickle(self):
        spec = FieldSpec(width=50, height=30)
        self.assertEqual(spec, FieldSpec.from_dict(spec.to_dict()))
        self.assertEqual(spec, pickle.loads(pickle.dumps(spec)))


class OutcomeDesignTests(unittest.TestCase):

    def test_theta_length_per_kind(self):
        OutcomeDesign(kind='linear', theta=[1.0, 2.0])
        OutcomeDesign(kind='polynomial3', theta=[1.0, 2.0, 3.0, 4.0])
        OutcomeDesign(kind='probit', theta=[0.0, 1.0 / 3.0])
        with self.assertRaises(InvalidSpecError):
            OutcomeDesign(kind='linear', theta=[1.0, 2.0, 3.0])
        with self.assertRaises(InvalidSpecError):
            OutcomeDesign(kind='polynomial3', theta=[1.0, 2.0])

    def test_g_linear(self):
        design = OutcomeDesign(kind='linear', theta=[-3.5, 2.0])
        np.testing.assert_allclose([-3.5, 3.5], design.g([0.0, 3.5]))

    def test_g_cubic(self):
        design = OutcomeDesign(kind='polynomial3', theta=[1.0, 0.0, 0.0, 2.0])
        self.assertAlmostEqual(1.0 + 2.0 * 8.0, float(design.g(2.0)))


class ErrorDesignTests(unittest.TestCase):

    def test_centering(self):
        self.assertEqual('mean', ErrorDesign(kind='classical_gaussian').centering)
        self.assertEqual('median', ErrorDesign(kind='lognormal_median').centering)

    def test_negative_sigma(self):
        with self.assertRaises(InvalidSpecError):
            ErrorDesign(sigma_v=-1.0)


class RandomFieldTests(unittest.TestCase):

    def setUp(self):
        self.spec = FieldSpec(width=4, height=3)

    def test_shape_checked(self):
        with self.assertRaises(InvalidSpecError):
            RandomField(self.spec, np.zeros((4, 3)))

    def test_non_finite_rejected(self):
        values = np.zeros((3, 4))
        values[1, 1] = np.nan
        with self.assertRaises(InvalidSpecError):
            RandomField(self.spec, values)

    def test_values_read_only(self):
        field = RandomField(self.spec, np.zeros((3, 4)))
        with self.assertRaises(ValueError):
            field.values[0, 0] = 1.0

    def test_node_locations_cell_centered(self):
        field = RandomField(self.spec, np.arange(12.0).reshape(3, 4))
        nodes = field.node_locations()
        np.testing.assert_allclose([0.5, 0.5], nodes[0])
        np.testing.assert_allclose([3.5, 2.5], nodes[-1])

    def test_to_frame(self):
        field = RandomField(self.spec, np.arange(12.0).reshape(3, 4))
        frame = field.to_frame()
        self.assertEqual(12, len(frame))
        self.assertEqual(5.0, frame.loc[(frame['row'] == 1) & (frame['col'] == 1), 'value'].item())


if __name__ == '__main__':
    unittest.main()
