"""
********************************************************************************
* Name: test_dataset.py
* Created On: March 14, 2026
********************************************************************************
"""
import json
import os
import shutil
import tempfile
import unittest

import numpy as np
import pandas as pd

from ...exceptions import DataError, OutOfRegionError
from ...models import Dataset
from ..factories import linear_frame


class DatasetTests(unittest.TestCase):

    def setUp(self):
        self.frame = linear_frame(n=50, seed=1, covariate=True)
        self.data = Dataset(self.frame, (40.0, 20.0), attributes={'seed': 1})
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_properties(self):
        self.assertEqual(50, self.data.n)
        self.assertEqual(50, len(self.data))
        self.assertEqual((40.0, 20.0), self.data.region)
        self.assertTrue(self.data.oracle)
        self.assertTrue(self.data.has_covariates)
        self.assertEqual(['w'], self.data.covariate_columns)
        self.assertEqual((50, 1), self.data.w.shape)
        self.assertEqual((50, 2), self.data.locations.shape)
        self.assertIsNone(self.data.z)
        self.assertIsNone(self.data.categories)

    def test_missing_columns(self):
        with self.assertRaises(DataError):
            Dataset(self.frame.drop(columns=['y']), (40.0, 20.0))

    def test_empty(self):
        with self.assertRaises(DataError):
            Dataset(self.frame.iloc[:0], (40.0, 20.0))

    def test_non_finite(self):
        frame = self.frame.copy()
        frame.loc[3, 'x'] = np.inf
        with self.assertRaises(DataError):
            Dataset(frame, (40.0, 20.0))

    def test_out_of_region(self):
        frame = self.frame.copy()
        frame.loc[0, 'sx'] = 41.0
        with self.assertRaises(OutOfRegionError):
            Dataset(frame, (40.0, 20.0))

    def test_frame_is_copy(self):
        frame = self.data.frame
        frame.loc[0, 'x'] = 1e6
        self.assertNotEqual(1e6, self.data.x[0])

    def test_with_values_and_with_z(self):
        z = np.arange(50.0)
        with_z = self.data.with_z(z)
        np.testing.assert_array_equal(z, with_z.z)
        self.assertIsNone(self.data.z)
        dropped = with_z.with_values(z=None)
        self.assertIsNone(dropped.z)
        with self.assertRaises(DataError):
            self.data.with_values(z=np.zeros(3))

    def test_take_with_repetition(self):
        taken = self.data.take([0, 0, 5])
        self.assertEqual(3, taken.n)
        self.assertEqual(taken.x[0], taken.x[1])
        self.assertEqual(self.data.x[5], taken.x[2])
        self.assertEqual(1, taken.get_attribute('seed'))

    def test_take_relocated(self):
        locations = np.array([[1.0, 1.0], [2.0, 2.0]])
        taken = self.data.take([3, 4], locations=locations, region=(5.0, 5.0))
        np.testing.assert_array_equal(locations, taken.locations)
        self.assertEqual((5.0, 5.0), taken.region)

    def test_csv_round_trip(self):
        path = os.path.join(self.temp_dir, 'data.csv')
        self.data.to_csv(path)
        self.assertTrue(os.path.exists(os.path.join(self.temp_dir, 'data.json')))
        read = Dataset.read(path)
        self.assertEqual(self.data.region, read.region)
        self.assertEqual(1, read.get_attribute('seed'))
        pd.testing.assert_frame_equal(self.data.frame, read.frame)

    def test_csv_byte_identical(self):
        first = os.path.join(self.temp_dir, 'a.csv')
        second = os.path.join(self.temp_dir, 'b.csv')
        self.data.to_csv(first)
        Dataset(linear_frame(n=50, seed=1, covariate=True), (40.0, 20.0), attributes={'seed': 1}).to_csv(second)
        with open(first, 'rb') as f1, open(second, 'rb') as f2:
            self.assertEqual(f1.read(), f2.read())

    def test_read_without_sidecar(self):
        path = os.path.join(self.temp_dir, 'bare.csv')
        self.frame.to_csv(path, index=False)
        read = Dataset.read(path)
        self.assertGreaterEqual(read.region[0], self.frame['sx'].max())
        self.assertFalse(read.discrete)

    def test_read_missing_file(self):
        with self.assertRaises(DataError):
            Dataset.read(os.path.join(self.temp_dir, 'missing.csv'))

    def test_read_malformed_sidecar(self):
        path = os.path.join(self.temp_dir, 'data.csv')
        self.data.to_csv(path)
        with open(os.path.join(self.temp_dir, 'data.json'), 'w') as f:
            f.write('{not json')
        with self.assertRaises(DataError):
            Dataset.read(path)

    def test_to_geojson(self):
        collection = self.data.to_geojson()
        self.assertEqual(50, len(collection['features']))
        feature = collection['features'][0]
        self.assertEqual('Point', feature['geometry']['type'])
        self.assertIn('y', feature['properties'])
        json.dumps(collection)


class DiscreteDatasetTests(unittest.TestCase):

    def setUp(self):
        frame = pd.DataFrame({'sx': [1.0, 2.0, 3.0, 4.0], 'sy': [1.0, 1.0, 1.0, 1.0], 'x': [0, 1, 1, 3],
                              'y': [0.1, 0.2, 0.3, 0.4]})
        self.data = Dataset(frame, (5.0, 5.0), discrete=True)

    def test_categories_from_values(self):
        self.assertEqual([0, 1, 3], self.data.categories)
        self.assertEqual(self.data.x.dtype.kind, 'i')

    def test_categories_from_schema(self):
        self.data.set_attribute('categories', [0, 1, 2, 3])
        counts = self.data.category_counts()
        self.assertEqual([1, 2, 0, 1], counts.tolist())

    def test_category_counts_continuous(self):
        continuous = Dataset(linear_frame(n=10), (40.0, 20.0))
        with self.assertRaises(DataError):
            continuous.category_counts()


if __name__ == '__main__':
    unittest.main()
