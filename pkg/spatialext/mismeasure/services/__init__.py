from .job_manager import ReplicationJobManager, JobOutcome, default_jobs
from .bootstrap import BlockSpec, BootstrapResult, block_resample, bootstrap_se, coverage
from .estimator import EstimatorConfig, DistanceGrid, estimate_at, combine, select_ds_range
from .fieldsim import design_catalog, generate_field, make_dataset, sample_locations, simulate_design

__all__ = ['ReplicationJobManager', 'JobOutcome', 'default_jobs', 'BlockSpec', 'BootstrapResult', 'block_resample',
           'bootstrap_se', 'coverage', 'EstimatorConfig', 'DistanceGrid', 'estimate_at', 'combine', 'select_ds_range',
           'design_catalog', 'generate_field', 'make_dataset', 'sample_locations', 'simulate_design']
