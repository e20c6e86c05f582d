from .status_mixin import StatusMixin  # noqa: F401
from .attributes_mixin import AttributesMixin  # noqa: F401
from .options_mixin import OptionsMixin  # noqa: F401
