"""
Numerical construction exceptions
"""

from typing import Any, Dict

from .base import LabException


class ResolutionError(LabException):
    """A ball operator was asked for a level finer than the resolution guard"""

    default_code = 'RESOLUTION_ERROR'

    def __init__(self, level: int, max_level: int):
        super().__init__(f"Level {level} is finer than the resolution guard allows "
                         f"(ball operators need k <= {max_level})")
        self.level = level
        self.max_level = max_level

    def context(self) -> Dict[str, Any]:
        return {'level': self.level, 'max_level': self.max_level}


class PreconditionError(LabException):
    """A mathematical precondition of a construction fails"""

    default_code = 'PRECONDITION_ERROR'

    def __init__(self, message: str, location=None):
        super().__init__(message)
        self.location = location

    def context(self) -> Dict[str, Any]:
        return {} if self.location is None else {'location': self.location}
