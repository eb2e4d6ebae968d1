"""
Root of the laboratory's exception tree

Every failure the harness knows how to report derives from LabException, so the
CLI can turn it into a one-line JSON object on stderr and the runner can attach
it to a failure report.
"""

from typing import Any, Dict, Optional


class LabException(Exception):
    """A failure with a stable machine-readable code"""

    default_code = 'LAB_ERROR'

    def __init__(self, message: str, error_code: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.error_code = error_code or self.default_code

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {'type': type(self).__name__,
                                   'error_code': self.error_code,
                                   'error': self.message}
        payload.update(self.context())
        return payload

    def context(self) -> Dict[str, Any]:
        """Extra keys a subclass wants in its serialized form"""
        return {}


class InvalidInput(LabException):
    """An argument violates an operation's precondition"""

    default_code = 'INVALID_INPUT'

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field

    def context(self) -> Dict[str, Any]:
        return {'field': self.field} if self.field else {}
