"""
********************************************************************************
* Name: result
* Created On: March 11, 2026
********************************************************************************
"""
import copy
import json
import logging
from pathlib import Path

import pandas as pd

from ..mixins import AttributesMixin, OptionsMixin
from ..utilities import json_serializer, safe_name

log = logging.getLogger(f'mismeasure.{__name__}')
__all__ = ['Result']


class Result(AttributesMixin, OptionsMixin):
    """
    Container of titled pandas DataFrames plus JSON metadata, written as CSV files and one JSON document.
    """
    TYPE = 'generic_result'

    def __init__(self, name=None, description='', options=None):
        self.name = name or self.__class__.__name__
        self.description = description
        self._data = {}
        if options is not None:
            self.options = options
        else:
            self._options = self.default_options

    def __str__(self):
        return '<{} name="{}" datasets={} >'.format(self.__class__.__name__, self.name, len(self.datasets))

    def __repr__(self):
        return self.__str__()

    @property
    def default_options(self):
        return {'float_format': '%.10g'}

    @property
    def data(self):
        return self._data

    @property
    def datasets(self):
        if 'datasets' not in self._data:
            self._data['datasets'] = []
        return copy.copy(self._data['datasets'])

    def reset(self):
        self._data['datasets'] = []

    def add_pandas_dataframe(self, title, data_frame):
        """
        Adds a pandas.DataFrame to the result.

        Args:
            title(str): Display name; also the CSV file stem.
            data_frame(pandas.DataFrame): The data.
        """
        if not title:
            raise ValueError('The argument "title" is required.')

        if not isinstance(data_frame, pd.DataFrame):
            raise ValueError('The argument "data_frame" must be a pandas.DataFrame.')

        if data_frame.empty:
            raise ValueError('The pandas.DataFrame must not be empty.')

        datasets = self.datasets
        datasets.append({'title': title, 'dataset': data_frame})
        self._data['datasets'] = datasets

    def get_dataset(self, title):
        """
        Get the DataFrame with the given title (None if not found).
        """
        for entry in self.datasets:
            if entry['title'] == title:
                return entry['dataset']

    def to_dict(self):
        return {'type': self.TYPE, 'name': self.name, 'description': self.description,
                'attributes': self.attributes}

    def to_json(self):
        return json.dumps(self.to_dict(), default=json_serializer, sort_keys=True, indent=2)

    def write(self, directory):
        """
        Write every dataset as <title>.csv and the metadata as <name>.json.

        Returns:
            list<Path>: written files.
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for entry in self.datasets:
            path = directory / f'{safe_name(entry["title"])}.csv'
            entry['dataset'].to_csv(path, index=False, float_format=self.get_option('float_format'))
            paths.append(path)
        path = directory / f'{safe_name(self.name)}.json'
        path.write_text(self.to_json())
        paths.append(path)
        log.info(f'Wrote {len(paths)} file(s) to "{directory}".')
        return paths
