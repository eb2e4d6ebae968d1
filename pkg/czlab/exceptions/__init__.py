"""
Custom exception classes for the laboratory
"""

from .base import LabException, InvalidInput
from .numerics import ResolutionError, PreconditionError
from .config import ConfigError
from .checks import CheckExecutionError

__all__ = [
    'LabException', 'InvalidInput',
    'ResolutionError', 'PreconditionError',
    'ConfigError', 'CheckExecutionError'
]
