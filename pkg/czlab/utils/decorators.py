"""
Decorators shared by the services
"""

import functools
import logging
from time import perf_counter
from typing import Callable, TypeVar

F = TypeVar('F', bound=Callable)

logger = logging.getLogger(__name__)


def timing_decorator(func: F) -> F:
    """Report how long each call took, at debug level so runs stay quiet by default"""

    @functools.wraps(func)
    def timed(*args, **kwargs):
        started = perf_counter()
        try:
            return func(*args, **kwargs)
        finally:
            logger.debug("%s executed in %.4f seconds", func.__name__, perf_counter() - started)

    return timed  # type: ignore[return-value]
