"""
Check-job middlewares: logging around error capture
"""

from .logging import LoggingMiddleware
from .error_handling import ErrorHandlingMiddleware


def setup_middlewares(handler):
    """Wrap a check handler; errors are caught inside the logged span"""
    return LoggingMiddleware(ErrorHandlingMiddleware(handler))


__all__ = ['setup_middlewares', 'LoggingMiddleware', 'ErrorHandlingMiddleware']
