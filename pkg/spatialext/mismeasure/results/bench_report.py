"""
********************************************************************************
* Name: bench_report.py
* Created On: March 11, 2026
********************************************************************************
"""
import logging

import numpy as np
import pandas as pd

from ..models import Result

log = logging.getLogger(f'mismeasure.{__name__}')
__all__ = ['BenchReport']

DRAW_COLUMNS = ['replication', 'estimator', 'parameter', 'value', 'truth', 'ci_lo', 'ci_hi']


class BenchReport(Result):
    """
    Per-replication draws of every estimator of a benchmark suite and the summary statistics computed from them.

    Summary sd uses ddof 0 so that rmse^2 = bias^2 + sd^2.
    """
    TYPE = 'bench_report'

    def __init__(self, suite, config=None, *args, **kwargs):
        kwargs.setdefault('name', suite)
        super().__init__(*args, **kwargs)
        self.suite = suite
        self.config = config or {}
        self.replications = 0
        self.failures = []
        self.runtime_seconds = None
        self.notes = {}
        self._records = []

    def add_draws(self, replication, estimator, values, truth, intervals=None):
        """
        Record one replication's estimates.

        Args:
            replication(int): replication index.
            estimator(str): estimator label.
            values(dict): parameter -> estimate.
            truth(dict): parameter -> true value.
            intervals(dict): parameter -> (lower, upper). Optional.
        """
        intervals = intervals or {}
        for parameter, value in values.items():
            lo, hi = intervals.get(parameter, (np.nan, np.nan))
            self._records.append({
                'replication': int(replication), 'estimator': estimator, 'parameter': parameter,
                'value': float(value), 'truth': float(truth.get(parameter, np.nan)),
                'ci_lo': float(lo), 'ci_hi': float(hi),
            })

    def add_failure(self, replication, message):
        self.failures.append({'replication': int(replication), 'error': message})

    @property
    def failure_share(self):
        total = self.replications or 1
        return len(self.failures) / total

    def draws(self):
        """
        Long-format table of every recorded estimate.
        """
        return pd.DataFrame(self._records, columns=DRAW_COLUMNS)

    def summary(self):
        """
        Mean, sd (ddof 0), bias, rmse, 1st / 99th percentile and coverage per estimator and parameter.
        """
        draws = self.draws()
        rows = []
        for (estimator, parameter), group in draws.groupby(['estimator', 'parameter'], sort=False):
            values = group['value'].to_numpy()
            truth = float(group['truth'].iloc[0])
            error = values - truth
            row = {
                'estimator': estimator, 'parameter': parameter, 'n': len(values), 'truth': truth,
                'mean': float(values.mean()), 'sd': float(values.std(ddof=0)), 'bias': float(error.mean()),
                'rmse': float(np.sqrt(np.mean(error ** 2))),
                'p01': float(np.percentile(values, 1)), 'p99': float(np.percentile(values, 99)),
                'coverage': np.nan,
            }
            lo, hi = group['ci_lo'].to_numpy(), group['ci_hi'].to_numpy()
            has_interval = np.isfinite(lo) & np.isfinite(hi)
            if has_interval.any():
                row['coverage'] = float(np.mean((lo[has_interval] <= truth) & (truth <= hi[has_interval])))
            rows.append(row)
        return pd.DataFrame(rows)

    def table(self):
        """
        Rows per estimator, (mean, sd, rmse) column groups per parameter.
        """
        summary = self.summary()
        if summary.empty:
            return ''
        wide = summary.pivot(index='estimator', columns='parameter', values=['mean', 'sd', 'rmse'])
        wide = wide.swaplevel(axis=1).sort_index(axis=1, level=0)
        order = list(dict.fromkeys(summary['estimator']))
        return wide.loc[order].to_string(float_format=lambda v: f'{v:.2f}')

    def to_dict(self):
        d = super().to_dict()
        d.update({
            'suite': self.suite,
            'config': self.config,
            'replications': self.replications,
            'failures': self.failures,
            'runtime_seconds': self.runtime_seconds,
            'notes': self.notes,
            'summary': self.summary().to_dict(orient='records'),
        })
        return d

    def write(self, directory):
        self.reset()
        draws = self.draws()
        if not draws.empty:
            self.add_pandas_dataframe('draws', draws)
            self.add_pandas_dataframe('summary', self.summary())
        paths = super().write(directory)
        path = paths[-1].with_suffix('.txt')
        path.write_text(self.table() + '\n')
        paths.append(path)
        return paths
