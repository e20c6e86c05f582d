from .estimate_result import EstimateResult  # noqa: F401
from .bench_report import BenchReport  # noqa: F401
