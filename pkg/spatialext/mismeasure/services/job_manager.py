"""
********************************************************************************
* Name: job_manager.py
* Created On: March 8, 2026
********************************************************************************
"""
import logging
import os
import traceback
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..exceptions import InvalidSpecError

log = logging.getLogger(f'mismeasure.{__name__}')

__all__ = ['ReplicationJobManager', 'JobOutcome', 'default_jobs']

JOBS_ENVIRONMENT_VARIABLE = 'MISMEASURE_JOBS'

JobOutcome = namedtuple('JobOutcome', ['index', 'value', 'error'])


def default_jobs():
    """
    Number of parallel jobs from MISMEASURE_JOBS (1 when unset or invalid).
    """
    value = os.environ.get(JOBS_ENVIRONMENT_VARIABLE, '1')
    try:
        return max(1, int(value))
    except ValueError:
        log.warning(f'Ignoring invalid {JOBS_ENVIRONMENT_VARIABLE}="{value}".')
        return 1


def _run(job, index, seed):
    try:
        return JobOutcome(index, job(seed), None)
    except Exception as e:
        log.debug(traceback.format_exc())
        return JobOutcome(index, None, f'{type(e).__name__}: {e}')


class ReplicationJobManager(object):
    """
    Runs independent jobs, each called with its own numpy.random.SeedSequence child, and returns their outcomes in
    submission order. Results do not depend on the number of workers.
    """  # noqa: E501
    def __init__(self, jobs, seed=None, n_jobs=1, name='replications'):
        """
        Constructor.

        Args:
            jobs(list<callable>): picklable callables taking a SeedSequence.
            seed(int|numpy.random.SeedSequence): root seed; children are spawned per job.
            n_jobs(int): parallel workers (1 runs sequentially in-process).
            name(str): label used for logging.
        """
        if not jobs or not all(callable(j) for j in jobs):
            raise InvalidSpecError('Argument "jobs" is not defined or empty. Must provide at least one callable.')
        if int(n_jobs) < 1:
            raise InvalidSpecError(f'Number of parallel jobs must be at least 1, got {n_jobs}.')

        self.jobs = list(jobs)
        self.n_jobs = int(n_jobs)
        self.name = name
        self.root_seed = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)

        # State variables
        self.seeds = None
        self.prepared = False

    def prepare(self):
        """
        Spawn one seed child per job.
        """
        self.seeds = self.root_seed.spawn(len(self.jobs))
        self.prepared = True

    def run_job(self):
        """
        Prepares and executes all jobs.

        Returns:
            list<JobOutcome>: outcomes in submission order; failures carry the error text and value None.
        """
        if not self.prepared:
            self.prepare()

        total = len(self.jobs)
        log.info(f'Running {total} {self.name} job(s) on {self.n_jobs} worker(s).')
        if self.n_jobs == 1 or total == 1:
            outcomes = []
            for index, (job, seed) in enumerate(zip(self.jobs, self.seeds)):
                outcomes.append(_run(job, index, seed))
                log.info(f'{self.name}: {index + 1}/{total} done.')
        else:
            with ProcessPoolExecutor(max_workers=self.n_jobs) as executor:
                futures = [executor.submit(_run, job, index, seed)
                           for index, (job, seed) in enumerate(zip(self.jobs, self.seeds))]
                outcomes = []
                for index, future in enumerate(futures):
                    outcomes.append(future.result())
                    log.info(f'{self.name}: {index + 1}/{total} done.')

        failed = [o for o in outcomes if o.error is not None]
        for outcome in failed:
            log.warning(f'{self.name} job {outcome.index} failed: {outcome.error}')
        return outcomes
