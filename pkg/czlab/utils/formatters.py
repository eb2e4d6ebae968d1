"""
Data formatting utilities for log lines and run summaries
"""

import math
from typing import Optional, Union


def format_measured(value: Union[int, float, None], digits: int = 4) -> str:
    """Compact scientific formatting; nan and inf spelled out"""
    if value is None:
        return '-'
    try:
        value = float(value)
    except (TypeError, ValueError):
        return str(value)
    if math.isnan(value):
        return 'nan'
    if math.isinf(value):
        return '-inf' if value < 0 else 'inf'
    return f"{value:.{digits}g}"


def format_bound(bound) -> str:
    """Numeric bounds like measured values, labels as they are"""
    if isinstance(bound, str):
        return bound
    return format_measured(bound)


def format_ratio(ratio: Optional[float]) -> str:
    if ratio is None or not math.isfinite(ratio):
        return '-'
    return f"{100.0 * ratio:.1f}%"


def format_outcome(passed: bool, acceptance: bool = True) -> str:
    if passed:
        return 'PASS'
    return 'FAIL' if acceptance else 'fail (informational)'


def format_elapsed(seconds: float) -> str:
    if seconds < 1.0:
        return f"{1000.0 * seconds:.0f} ms"
    if seconds < 120.0:
        return f"{seconds:.2f} s"
    return f"{seconds / 60.0:.1f} min"
