"""
Base model with common functionality
"""

import dataclasses

import numpy as np


def _plain(value):
    """Convert numpy scalars and arrays into JSON-friendly values"""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


class BaseModel:
    """Mixin for dataclass models that serialize to plain dictionaries"""

    def to_dict(self):
        """Convert model to dictionary"""
        return {f.name: _plain(getattr(self, f.name)) for f in dataclasses.fields(self)}
