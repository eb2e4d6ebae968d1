"""
Check execution exceptions
"""

from typing import Any, Dict

from .base import LabException


class CheckExecutionError(LabException):
    """A check crashed instead of producing a report"""

    default_code = 'CHECK_EXECUTION_ERROR'

    def __init__(self, check_id: str, cause: Exception):
        super().__init__(f"Check {check_id} raised {type(cause).__name__}: {cause}")
        self.check_id = check_id
        self.cause = cause

    def context(self) -> Dict[str, Any]:
        extra: Dict[str, Any] = {'check_id': self.check_id}
        if isinstance(self.cause, LabException):
            extra['cause'] = self.cause.to_dict()
        return extra
