from .base import SpecBase  # noqa: F401
from .field import FieldSpec, OutcomeDesign, ErrorDesign, RandomField  # noqa: F401
from .dataset import Dataset  # noqa: F401
from .workflow_step import Step  # noqa: F401
from .workflow import EstimationWorkflow  # noqa: F401
from .result import Result  # noqa: F401
