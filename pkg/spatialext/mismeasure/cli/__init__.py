from .config import RunConfig, resolve_config, SUITES
from .commands import main

__all__ = ['RunConfig', 'resolve_config', 'SUITES', 'main']
