"""
********************************************************************************
* Name: estimate_result.py
* Created On: March 11, 2026
********************************************************************************
"""
import numpy as np
import pandas as pd

from ..models import Result

__all__ = ['EstimateResult']


class EstimateResult(Result):
    """
    Outcome of one single-dataset estimation: per-spacing estimates, their combination, comparison estimators and
    the measurement-error effect test.
    """  # noqa: E501
    TYPE = 'estimate_result'

    def __init__(self, config=None, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.config = config or {}
        self.combined = None
        self.baselines = {}
        self.effect_test = None
        self.link = None
        self.misclassification = None

    def set_combined(self, combined):
        """
        Args:
            combined(CombinedEstimate): combination across spacings.
        """
        self.combined = combined
        self.add_pandas_dataframe('per_ds', combined.to_frame())

    def add_baseline(self, name, estimate):
        """
        Args:
            name(str): estimator label (e.g. naive_ols).
            estimate(dict): theta, se and optionally sigma_u.
        """
        self.baselines[name] = {k: np.asarray(v).tolist() if isinstance(v, np.ndarray) else v
                                for k, v in estimate.items()}

    def to_dict(self):
        d = super().to_dict()
        d.update({
            'config': self.config,
            'combined': None if self.combined is None else self.combined.to_dict(),
            'baselines': self.baselines,
            'effect_test': self.effect_test,
            'link': None if self.link is None else self.link.to_dict(),
            'misclassification': self.misclassification,
        })
        return d

    def table(self):
        """
        Human-readable summary table.

        Returns:
            str: the table.
        """
        rows = []
        if self.combined is not None:
            se = self.combined.se_weighted
            ci95 = self.combined.ci95_weighted
            for k, value in enumerate(self.combined.theta_weighted):
                rows.append({'estimator': 'weighted_spatial', 'parameter': f'theta_{k + 1}', 'estimate': value,
                             'se': None if se is None else se[k],
                             'ci_lo': None if ci95 is None else ci95[k][0],
                             'ci_hi': None if ci95 is None else ci95[k][1]})
            for k, value in enumerate(self.combined.theta_unweighted):
                rows.append({'estimator': 'unweighted_spatial', 'parameter': f'theta_{k + 1}', 'estimate': value,
                             'se': None})
        for name, estimate in self.baselines.items():
            se = estimate.get('se')
            for k, value in enumerate(estimate['theta']):
                rows.append({'estimator': name, 'parameter': f'theta_{k + 1}', 'estimate': value,
                             'se': None if se is None else se[k]})
        text = pd.DataFrame(rows).to_string(index=False, float_format=lambda v: f'{v:.4f}') if rows else ''
        if self.effect_test is not None:
            text += f"\n\nmeasurement-error effect statistic: {self.effect_test['statistic']:.3f}"
        return text

    def write(self, directory):
        paths = super().write(directory)
        path = paths[-1].with_suffix('.txt')
        path.write_text(self.table() + '\n')
        paths.append(path)
        return paths
