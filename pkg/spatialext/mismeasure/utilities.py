"""
********************************************************************************
* Name: utilities
* Created On: March 2, 2026
********************************************************************************
"""
import datetime
from pathlib import Path
from uuid import UUID

import numpy as np


def json_serializer(obj):
    """
    Default hook for json.dumps covering numpy scalars/arrays, datetimes, UUIDs and paths.
    """
    if isinstance(obj, datetime.datetime):
        return obj.isoformat()
    elif isinstance(obj, UUID):
        return str(obj)
    elif isinstance(obj, Path):
        return str(obj)
    elif isinstance(obj, np.ndarray):
        return obj.tolist()
    elif isinstance(obj, np.bool_):
        return bool(obj)
    elif isinstance(obj, np.integer):
        return int(obj)
    elif isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(
        f'Object of type "{obj.__class__.__name__}" is not JSON serializable'
    )


def safe_name(name):
    """
    Safe name with only A-Z 0-9 and underscores.
    """
    return ''.join(s if s.isalnum() else '_' for s in str(name))


def sidecar_path(path):
    """
    Path of the JSON sidecar written next to a CSV file (data.csv -> data.json).
    """
    return Path(path).with_suffix('.json')
