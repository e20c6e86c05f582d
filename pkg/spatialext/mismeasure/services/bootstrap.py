"""
********************************************************************************
* Name: bootstrap.py
* Created On: March 8, 2026
********************************************************************************
"""
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
import param
from scipy import spatial

from ..exceptions import BootstrapAbortedError, DataError, InvalidSpecError
from ..models import SpecBase
from .job_manager import ReplicationJobManager

log = logging.getLogger(f'mismeasure.{__name__}')

__all__ = ['BlockSpec', 'BootstrapResult', 'block_resample', 'bootstrap_se', 'coverage', 'as_seed_sequence']

MIN_REPLICATES = 20
MAX_FAILURE_SHARE = 0.2


def as_seed_sequence(seed):
    """Root SeedSequence for an int, None or an existing SeedSequence."""
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


class BlockSpec(SpecBase):
    """
    Side lengths (field units) of the rectangular blocks resampled by the spatial block bootstrap.
    """
    l1 = param.Number(default=130.0 / 22.0, bounds=(0, None), inclusive_bounds=(False, True), constant=True)
    l2 = param.Number(default=65.0 / 15.0, bounds=(0, None), inclusive_bounds=(False, True), constant=True)
    max_area_fraction = param.Number(default=0.1, bounds=(0, None), inclusive_bounds=(False, True), constant=True)

    @classmethod
    def for_region(cls, width, height, columns=22, rows=15):
        """Blocks from splitting the region into a columns x rows grid."""
        return cls(l1=float(width) / columns, l2=float(height) / rows)

    def check(self, region):
        """
        Raises:
            InvalidSpecError: block area exceeds the allowed share of the region.
        """
        width, height = region
        if width <= 0 or height <= 0:
            raise DataError(f'Degenerate region: {region}.')
        if self.l1 * self.l2 > self.max_area_fraction * width * height:
            raise InvalidSpecError(
                f'Block {self.l1:g} x {self.l2:g} exceeds {self.max_area_fraction:.0%} of the region area.'
            )


@dataclass
class BootstrapResult:
    draws: np.ndarray
    se: np.ndarray
    ci95: np.ndarray
    B: int
    failures: int = 0

    def to_frame(self):
        frame = pd.DataFrame(self.draws, columns=[f'theta_{k + 1}' for k in range(self.draws.shape[1])])
        frame.insert(0, 'draw', np.arange(len(frame)))
        return frame

    def to_csv(self, path):
        self.to_frame().to_csv(path, index=False, float_format='%.17g')

    def to_dict(self):
        return {'se': self.se.tolist(), 'ci95': self.ci95.tolist(), 'B': self.B, 'failures': self.failures}


class _BlockSampler(object):
    """
    Draws block centers among the observations and records each block's members and clipped extent.
    """
    def __init__(self, data, spec):
        self.n = data.n
        self.region = data.region
        self.locations = data.locations
        self.half = np.array([spec.l1, spec.l2]) / 2.0
        self.tree = spatial.cKDTree(self.locations / self.half)

    def members(self, center):
        found = self.tree.query_ball_point(self.locations[center] / self.half, r=1.0, p=np.inf)
        return np.sort(np.asarray(found, dtype=int))

    def extent(self, center):
        """Block rectangle (x0, y0, x1, y1) clipped to the region."""
        cx, cy = self.locations[center]
        width, height = self.region
        return (max(0.0, cx - self.half[0]), max(0.0, cy - self.half[1]),
                min(width, cx + self.half[0]), min(height, cy + self.half[1]))

    def draw(self, rng):
        """
        Blocks until exactly n observations are collected; the last block keeps a random subset of its members.

        Returns:
            list: (center, members) per block.
        """
        blocks = []
        count = 0
        while count < self.n:
            center = int(rng.integers(self.n))
            members = self.members(center)
            if count + len(members) > self.n:
                members = np.sort(rng.permutation(members)[:self.n - count])
            blocks.append((center, members))
            count += len(members)
        return blocks

    def layout(self, blocks):
        """
        Lay blocks out left to right in rows of the region's width, preserving offsets inside each block.

        Returns:
            tuple: (indices, locations, region)
        """
        width, height = self.region
        cursor_x = cursor_y = row_height = 0.0
        indices, locations = [], []
        for center, members in blocks:
            x0, y0, x1, y1 = self.extent(center)
            block_width, block_height = x1 - x0, y1 - y0
            if cursor_x > 0 and cursor_x + block_width > width:
                cursor_y += row_height
                cursor_x = row_height = 0.0
            shift = np.array([cursor_x - x0, cursor_y - y0])
            indices.append(members)
            locations.append(self.locations[members] + shift)
            cursor_x += block_width
            row_height = max(row_height, block_height)
        region = (max(width, cursor_x), max(height, cursor_y + row_height))
        return np.concatenate(indices), np.vstack(locations), region


def block_resample(data, spec, seed):
    """
    Spatial block bootstrap resample: blocks centered on uniformly drawn observations, collected until they hold
    exactly n observations, then re-laid out left to right in rows.

    Args:
        data(Dataset): observations.
        spec(BlockSpec): block size.
        seed(int|numpy.random.SeedSequence): random seed.

    Returns:
        Dataset: resample with n observations.
    """  # noqa: E501
    spec.check(data.region)
    sampler = _BlockSampler(data, spec)
    blocks = sampler.draw(np.random.default_rng(seed))
    indices, locations, region = sampler.layout(blocks)
    return data.take(indices, locations=locations, region=region)


class _BootstrapJob(object):
    """Picklable resample-then-estimate job."""
    def __init__(self, data, estimator, spec):
        self.data = data
        self.estimator = estimator
        self.spec = spec

    def __call__(self, seed):
        resample_seed, estimate_seed = seed.spawn(2)
        resample = block_resample(self.data, self.spec, resample_seed)
        return np.atleast_1d(np.asarray(self.estimator(resample, estimate_seed), dtype=float))


def _linear_draws(data, values, spec, seeds):
    """
    Sample means of per-observation values using block sums computed once per possible center.
    """
    sampler = _BlockSampler(data, spec)
    per_obs = np.atleast_2d(np.asarray(values(data), dtype=float).T).T
    sums = {}
    draws = []
    for seed in seeds:
        resample_seed, _ = seed.spawn(2)
        blocks = sampler.draw(np.random.default_rng(resample_seed))
        total = np.zeros(per_obs.shape[1])
        for center, members in blocks[:-1]:
            if center not in sums:
                sums[center] = per_obs[sampler.members(center)].sum(axis=0)
            total += sums[center]
        total += per_obs[blocks[-1][1]].sum(axis=0)
        draws.append(total / data.n)
    return np.array(draws)


def bootstrap_se(data, estimator, spec, B=200, seed=None, jobs=1, linear=None):
    """
    Block-bootstrap standard errors and 95% percentile intervals.

    Args:
        data(Dataset): observations.
        estimator(callable): estimator(dataset, seed) -> vector; picklable when jobs > 1.
        spec(BlockSpec): block size.
        B(int): number of replicates (>= 20).
        seed(int|numpy.random.SeedSequence): root seed, one child per replicate.
        jobs(int): parallel workers.
        linear(callable): values(dataset) -> (n,) or (n, d) per-observation values; when given, the statistic is
            their sample mean and block sums are reused across replicates (estimator is ignored).

    Returns:
        BootstrapResult: draws, se (ddof 1), percentile intervals.

    Raises:
        BootstrapAbortedError: more than 20% of the replicates failed.
    """  # noqa: E501
    if B < MIN_REPLICATES:
        raise InvalidSpecError(f'At least {MIN_REPLICATES} bootstrap replicates are required, got {B}.')
    spec.check(data.region)
    root = as_seed_sequence(seed)

    failures = 0
    if linear is not None:
        draws = _linear_draws(data, linear, spec, root.spawn(B))
    else:
        jobs_list = [_BootstrapJob(data, estimator, spec)] * B
        manager = ReplicationJobManager(jobs_list, seed=root, n_jobs=jobs, name='bootstrap')
        outcomes = manager.run_job()
        failed = [o for o in outcomes if o.error is not None]
        failures = len(failed)
        if failures > MAX_FAILURE_SHARE * B:
            raise BootstrapAbortedError(f'{failures} of {B} bootstrap replicates failed.')
        if failures:
            log.warning(f'Skipped {failures} failed bootstrap replicate(s) of {B}.')
        draws = np.array([o.value for o in outcomes if o.error is None])

    se = np.std(draws, axis=0, ddof=1)
    ci95 = np.percentile(draws, [2.5, 97.5], axis=0).T
    log.info(f'Bootstrap finished: B={B}, failures={failures}, se={np.round(se, 4).tolist()}.')
    return BootstrapResult(draws=draws, se=se, ci95=ci95, B=B, failures=failures)


def coverage(intervals, truth):
    """
    Share of intervals containing the truth.

    Args:
        intervals(array-like): (m, 2) or (m, d, 2) lower / upper bounds.
        truth(float|array-like): scalar or (d,) true values.

    Returns:
        float|numpy.ndarray: coverage rate (per coordinate for (m, d, 2) input).
    """
    intervals = np.asarray(intervals, dtype=float)
    if intervals.shape[-1] != 2 or len(intervals) == 0:
        raise InvalidSpecError('Intervals must be a non-empty array of (lower, upper) pairs.')
    truth = np.asarray(truth, dtype=float)
    inside = (intervals[..., 0] <= truth) & (truth <= intervals[..., 1])
    rate = inside.mean(axis=0)
    return float(rate) if np.ndim(rate) == 0 else rate
