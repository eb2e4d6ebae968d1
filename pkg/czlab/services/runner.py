"""
Runner service: plans check jobs over the corpus, executes them on a
worker pool and folds the reports into an exit status
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from czlab.config.run_config import RunConfig
from czlab.middlewares import setup_middlewares
from czlab.models.report import CheckReport
from czlab.services import checks
from czlab.services.corpus import CorpusInstance
from czlab.utils.decorators import timing_decorator

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


@dataclass(frozen=True, eq=False)
class CheckJob:
    """One unit of work: a check on an instance, on the run, or over finished reports"""
    spec: checks.CheckSpec
    descriptor: Dict
    instance: Optional[CorpusInstance] = None
    reports: Sequence[CheckReport] = field(default_factory=tuple)

    @property
    def check_id(self) -> str:
        return self.spec.check_id

    @property
    def acceptance(self) -> bool:
        return self.spec.acceptance

    @property
    def label(self) -> str:
        return self.instance.label if self.instance is not None else self.spec.scope


@dataclass(frozen=True)
class RunResult:
    reports: List[CheckReport]
    exit_status: int

    @property
    def failed(self) -> List[CheckReport]:
        return [report for report in self.reports if report.acceptance and not report.passed]


def exit_status(reports: Sequence[CheckReport]) -> int:
    """1 iff some acceptance-tagged report failed"""
    return EXIT_FAILURE if any(r.acceptance and not r.passed for r in reports) else EXIT_PASS


class CheckRunner:
    """Executes the selected checks of a run configuration"""

    def __init__(self, config: RunConfig, context: checks.CheckContext = None):
        self.config = config
        self.context = context or checks.CheckContext(config)
        self.selected = checks.selected_checks(config.checks)
        self.handler = setup_middlewares(self.execute)

    def plan(self) -> List[CheckJob]:
        """Instance and run-scoped jobs, check-major in registry order"""
        jobs = []
        for check_id in self.selected:
            spec = checks.REGISTRY[check_id]
            if spec.scope == checks.INSTANCE:
                jobs.extend(CheckJob(spec, self.context.describe(item), item)
                            for item in self.context.corpus if spec.applies_to(item))
            elif spec.scope == checks.RUN:
                jobs.append(CheckJob(spec, {'scope': 'run'}))
        return jobs

    def aggregate_jobs(self, reports: Sequence[CheckReport]) -> List[CheckJob]:
        return [CheckJob(checks.REGISTRY[check_id], {'scope': 'run'}, reports=tuple(reports))
                for check_id in self.selected
                if checks.REGISTRY[check_id].scope == checks.AGGREGATE_SCOPE]

    def execute(self, job: CheckJob) -> List[CheckReport]:
        spec = job.spec
        if spec.scope == checks.INSTANCE:
            reports = spec.func(self.context, job.instance)
        elif spec.scope == checks.RUN:
            reports = spec.func(self.context)
        else:
            reports = spec.func(self.context, job.reports)
        if not spec.acceptance:
            reports = [report.with_acceptance(False) for report in reports]
        return list(reports)

    def _map(self, jobs: Sequence[CheckJob], workers: int) -> List[CheckReport]:
        # map keeps submission order, so the worker count never changes the output
        if workers <= 1 or len(jobs) <= 1:
            batches = [self.handler(job) for job in jobs]
        else:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                batches = list(executor.map(self.handler, jobs))
        return [report for batch in batches for report in batch]

    @timing_decorator
    def run(self, workers: int = None) -> RunResult:
        workers = workers or self.config.jobs
        jobs = self.plan()
        logger.info("Running %d jobs for %d checks on %d instances with %d workers",
                    len(jobs), len(self.selected), len(self.context.corpus), workers)
        reports = self._map(jobs, workers)
        reports.extend(self._map(self.aggregate_jobs(reports), 1))
        status = exit_status(reports)
        failed = sorted({r.check_id for r in reports if r.acceptance and not r.passed})
        if failed:
            logger.warning("Acceptance failures in: %s", ', '.join(failed))
        else:
            logger.info("No acceptance failures in %d reports", len(reports))
        return RunResult(reports, status)
