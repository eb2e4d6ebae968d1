"""
Error handling middleware: a crashing check becomes a failed report
"""

import logging

from czlab.exceptions import CheckExecutionError
from czlab.models.report import CheckReport

logger = logging.getLogger(__name__)


class ErrorHandlingMiddleware:
    """Converts exceptions raised inside a check into a failure report"""

    def __init__(self, handler):
        self.handler = handler

    def __call__(self, job):
        try:
            return self.handler(job)
        except Exception as e:
            error = CheckExecutionError(job.check_id, e)
            logger.exception(error.message)
            return [CheckReport.failure(job.check_id, job.descriptor, error.to_dict(),
                                        acceptance=job.acceptance)]
