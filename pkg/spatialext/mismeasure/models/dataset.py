"""
********************************************************************************
* Name: dataset.py
* Created On: March 3, 2026
********************************************************************************
"""
import json
import logging
import re

import geojson
import numpy as np
import pandas as pd

from ..exceptions import DataError, OutOfRegionError
from ..mixins import AttributesMixin
from ..utilities import json_serializer, sidecar_path

log = logging.getLogger(f'mismeasure.{__name__}')
__all__ = ['Dataset']

COVARIATE_PATTERN = re.compile(r'^w\d*$')


class Dataset(AttributesMixin):
    """
    Spatial sample of n observations: location (sx, sy), observed covariate x, outcome y, optional covariates
    w..., optional oracle x_star and optional pseudo-instrument z.

    Attributes recorded on synthetic datasets: "spec" (generating designs), "seed", "design".
    """  # noqa: E501
    REQUIRED_COLUMNS = ['sx', 'sy', 'x', 'y']
    ATTR_DESIGN = 'design'
    ATTR_SEED = 'seed'
    ATTR_SPEC = 'spec'

    def __init__(self, frame, region, discrete=False, attributes=None):
        """
        Constructor.

        Args:
            frame(pandas.DataFrame): observation table.
            region(tuple): (width, height) of the field rectangle [0, width] x [0, height].
            discrete(bool): x (and z) are integer categories.
            attributes(dict): metadata echoed into the JSON sidecar.

        Raises:
            DataError: missing columns or non-finite values.
            OutOfRegionError: a location falls outside the rectangle.
        """
        if not isinstance(frame, pd.DataFrame):
            raise DataError('The argument "frame" must be a pandas.DataFrame.')

        missing = [c for c in self.REQUIRED_COLUMNS if c not in frame.columns]
        if missing:
            raise DataError(f'Dataset is missing required columns: {", ".join(missing)}.')

        if len(frame) == 0:
            raise DataError('Dataset must contain at least one observation.')

        width, height = float(region[0]), float(region[1])
        if not (width > 0 and height > 0):
            raise DataError(f'Degenerate region: {region}.')

        numeric = frame.select_dtypes(include=[np.number])
        if numeric.shape[1] != frame.shape[1]:
            raise DataError('All dataset columns must be numeric.')
        if not np.all(np.isfinite(numeric.to_numpy(dtype=float))):
            raise DataError('Dataset contains non-finite values.')

        sx = frame['sx'].to_numpy(dtype=float)
        sy = frame['sy'].to_numpy(dtype=float)
        outside = (sx < 0) | (sx > width) | (sy < 0) | (sy > height)
        if outside.any():
            raise OutOfRegionError(
                f'{int(outside.sum())} location(s) fall outside the region [0, {width:g}] x [0, {height:g}].'
            )

        self._frame = frame.reset_index(drop=True).copy()
        self.region = (width, height)
        self.discrete = bool(discrete)
        if attributes:
            self.attributes = attributes

    def __len__(self):
        return len(self._frame)

    def __repr__(self):
        return f'<Dataset n={self.n} region={self.region} discrete={self.discrete} oracle={self.oracle}>'

    @property
    def frame(self):
        """Copy of the underlying observation table."""
        return self._frame.copy()

    @property
    def n(self):
        return len(self._frame)

    @property
    def area(self):
        return self.region[0] * self.region[1]

    @property
    def locations(self):
        return self._frame[['sx', 'sy']].to_numpy(dtype=float)

    @property
    def x(self):
        return self._frame['x'].to_numpy(dtype=int if self.discrete else float)

    @property
    def y(self):
        return self._frame['y'].to_numpy(dtype=float)

    @property
    def covariate_columns(self):
        return [c for c in self._frame.columns if COVARIATE_PATTERN.match(c)]

    @property
    def has_covariates(self):
        return len(self.covariate_columns) > 0

    @property
    def w(self):
        """(n, k) covariate matrix or None."""
        cols = self.covariate_columns
        if not cols:
            return None
        return self._frame[cols].to_numpy(dtype=float)

    @property
    def oracle(self):
        """True when the hidden regressor x_star is carried (synthetic data)."""
        return 'x_star' in self._frame.columns

    @property
    def x_star(self):
        if not self.oracle:
            return None
        return self._frame['x_star'].to_numpy(dtype=int if self.discrete else float)

    @property
    def z(self):
        if 'z' not in self._frame.columns:
            return None
        return self._frame['z'].to_numpy(dtype=int if self.discrete else float)

    @property
    def categories(self):
        """Sorted category labels of x (discrete datasets only)."""
        if not self.discrete:
            return None
        schema = self.get_attribute('categories')
        if schema is not None:
            return sorted(int(c) for c in schema)
        return sorted(int(c) for c in np.unique(self.x))

    def category_counts(self):
        """
        Returns:
            pandas.Series: count per category of x, indexed by category.
        """
        if not self.discrete:
            raise DataError('Category counts are only defined for discrete datasets.')
        counts = self._frame['x'].astype(int).value_counts()
        return counts.reindex(self.categories, fill_value=0).sort_index()

    def with_values(self, **columns):
        """
        Copy of the dataset with the given columns replaced or added.
        """
        frame = self._frame.copy()
        for name, values in columns.items():
            if values is None:
                frame = frame.drop(columns=[name], errors='ignore')
            else:
                values = np.asarray(values)
                if values.shape[0] != len(frame):
                    raise DataError(f'Column "{name}" has {values.shape[0]} values, expected {len(frame)}.')
                frame[name] = values
        return Dataset(frame, self.region, discrete=self.discrete, attributes=self.attributes)

    def with_z(self, z):
        return self.with_values(z=z)

    def take(self, indices, locations=None, region=None):
        """
        Subset (with repetition allowed) of observations, optionally relocated.

        Args:
            indices(array-like): row indices.
            locations(numpy.ndarray): optional (m, 2) replacement coordinates.
            region(tuple): optional replacement region.
        """
        frame = self._frame.iloc[np.asarray(indices, dtype=int)].reset_index(drop=True)
        if locations is not None:
            frame['sx'] = locations[:, 0]
            frame['sy'] = locations[:, 1]
        return Dataset(frame, region or self.region, discrete=self.discrete, attributes=self.attributes)

    def sidecar(self):
        """
        Deterministic metadata written next to the CSV (no timestamps).
        """
        return {
            'kind': 'dataset',
            'region': list(self.region),
            'discrete': self.discrete,
            'n': self.n,
            'columns': list(self._frame.columns),
            'attributes': self.attributes,
        }

    def to_csv(self, path):
        """
        Write the dataset as CSV plus a JSON sidecar. Output is byte-identical for identical datasets.

        Args:
            path(str|Path): CSV path; the sidecar goes to the same path with a .json suffix.
        """
        self._frame.to_csv(path, index=False, float_format='%.17g')
        with open(sidecar_path(path), 'w') as f:
            json.dump(self.sidecar(), f, default=json_serializer, sort_keys=True, indent=2)
        log.info(f'Wrote dataset with {self.n} observations to "{path}".')

    @classmethod
    def read(cls, path):
        """
        Read a dataset written by to_csv. Without a sidecar the region is the bounding box of the locations.

        Raises:
            DataError: file missing or malformed.
        """
        try:
            frame = pd.read_csv(path)
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise DataError(f'Could not read dataset "{path}": {e}') from e

        meta_path = sidecar_path(path)
        if meta_path.exists():
            with open(meta_path, 'r') as f:
                try:
                    meta = json.load(f)
                except json.JSONDecodeError as e:
                    raise DataError(f'Malformed sidecar "{meta_path}": {e}') from e
            region = tuple(meta.get('region'))
            discrete = bool(meta.get('discrete', False))
            attributes = meta.get('attributes') or {}
        else:
            log.warning(f'No sidecar found for "{path}", using the bounding box of the locations as region.')
            if not {'sx', 'sy'}.issubset(frame.columns):
                raise DataError(f'Dataset "{path}" has no location columns.')
            region = (float(np.ceil(frame['sx'].max())), float(np.ceil(frame['sy'].max())))
            discrete = False
            attributes = {}

        return cls(frame, region, discrete=discrete, attributes=attributes)

    def to_geojson(self):
        """
        Observation locations as a GeoJSON FeatureCollection (field units, no projection).
        """
        features = []
        records = self._frame.to_dict(orient='records')
        for i, record in enumerate(records):
            properties = {k: v for k, v in record.items() if k not in ('sx', 'sy')}
            features.append(geojson.Feature(
                id=i,
                geometry=geojson.Point((float(record['sx']), float(record['sy']))),
                properties=json.loads(json.dumps(properties, default=json_serializer)),
            ))
        return geojson.FeatureCollection(features)
