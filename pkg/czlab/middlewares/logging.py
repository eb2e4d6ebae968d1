"""
Logging middleware around check execution
"""

import logging
import time

from czlab.utils.formatters import (format_bound, format_elapsed, format_measured,
                                    format_outcome)

logger = logging.getLogger('czlab.checks')


class LoggingMiddleware:
    """Logs start, finish and acceptance failures of every check job"""

    def __init__(self, handler):
        self.handler = handler

    def __call__(self, job):
        logger.debug("Starting %s on %s", job.check_id, job.label)
        start = time.perf_counter()
        reports = self.handler(job)
        elapsed = time.perf_counter() - start
        passed = all(report.passed for report in reports)
        logger.info("%s on %s: %s in %s (%d reports)", job.check_id, job.label,
                    format_outcome(passed, job.acceptance), format_elapsed(elapsed), len(reports))
        for report in reports:
            if report.acceptance and not report.passed:
                logger.warning("%s failed on %s: measured %s against %s", report.check_id,
                               job.label, format_measured(report.measured),
                               format_bound(report.bound))
        return reports
