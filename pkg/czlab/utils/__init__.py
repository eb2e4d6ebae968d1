"""
Utility functions and helpers
"""

from .decorators import timing_decorator
from .validators import (parse_params, validate_choice, validate_jobs, validate_level_pair,
                         validate_seed)
from .formatters import (format_bound, format_elapsed, format_measured, format_outcome,
                         format_ratio)

__all__ = [
    'timing_decorator',
    'parse_params', 'validate_choice', 'validate_jobs', 'validate_level_pair', 'validate_seed',
    'format_bound', 'format_elapsed', 'format_measured', 'format_outcome', 'format_ratio'
]
