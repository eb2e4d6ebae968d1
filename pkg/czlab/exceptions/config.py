"""
Configuration exceptions
"""

from typing import Any, Dict, Optional

from .base import LabException


class ConfigError(LabException):
    """The run configuration is unreadable or out of range; key names the culprit"""

    default_code = 'CONFIG_ERROR'

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key

    def context(self) -> Dict[str, Any]:
        return {'key': self.key} if self.key else {}
