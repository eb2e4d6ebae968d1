"""
Tests for validators, formatters, decorators and the check middlewares
"""

import logging
import math

import pytest

from czlab.exceptions import ConfigError
from czlab.middlewares import setup_middlewares
from czlab.models.report import CheckReport
from czlab.services import checks
from czlab.services.runner import EXIT_FAILURE, EXIT_PASS, CheckJob, exit_status
from czlab.utils import (format_elapsed, format_measured, format_outcome, format_ratio,
                         parse_params, timing_decorator, validate_level_pair, validate_seed)


@pytest.mark.parametrize('text, expected', [
    ('k=2,n=4', {'k': 2, 'n': 4}),
    ('{"k": 2, "levels": [1, 2]}', {'k': 2, 'levels': [1, 2]}),
    ('lam=0.5, gram=true', {'lam': 0.5, 'gram': True}),
    ('side=col', {'side': 'col'}),
    ('', {}),
])
def test_parse_params(text, expected):
    assert parse_params(text) == expected


@pytest.mark.parametrize('text', ['k', '=3', '{"k": ', '[1, 2]'])
def test_parse_params_rejects_garbage(text):
    with pytest.raises(ConfigError):
        parse_params(text)


def test_seed_and_level_validation():
    assert validate_seed('7') == 7
    with pytest.raises(ConfigError):
        validate_seed(-1)
    assert validate_level_pair({'k': 2, 'n': 5}, 6) == (2, 5)
    with pytest.raises(ConfigError):
        validate_level_pair({'k': 2, 'n': 7}, 6)


def test_formatters():
    assert format_measured(None) == '-'
    assert format_measured(float('nan')) == 'nan'
    assert format_measured(-math.inf) == '-inf'
    assert format_measured(0.000123456) == '0.0001235'
    assert format_ratio(0.5) == '50.0%'
    assert format_ratio(None) == '-'
    assert format_outcome(True) == 'PASS'
    assert format_outcome(False, acceptance=False) == 'fail (informational)'
    assert format_elapsed(0.25) == '250 ms'
    assert format_elapsed(300.0) == '5.0 min'


def test_timing_decorator_logs_at_debug(caplog):
    @timing_decorator
    def square(x):
        return x * x

    with caplog.at_level(logging.DEBUG):
        assert square(3) == 9
    assert any('square executed in' in record.getMessage() for record in caplog.records)


def _job(check_id='cz_reconstruction'):
    return CheckJob(checks.REGISTRY[check_id], {'family': 'spike', 'index': 0})


def test_crashing_checks_become_failure_reports(caplog):
    def explode(job):
        raise ZeroDivisionError('boom')

    with caplog.at_level(logging.INFO):
        (report,) = setup_middlewares(explode)(_job())
    assert not report.passed
    assert report.kind == 'error'
    assert report.details['error']['error_code'] == 'CHECK_EXECUTION_ERROR'
    assert 'boom' in report.details['error']['error']
    assert any(record.levelno == logging.WARNING for record in caplog.records)


def test_passing_jobs_are_logged(caplog):
    report = CheckReport.residual('cz_reconstruction', {}, 0.0, 1e-10)
    with caplog.at_level(logging.INFO, logger='czlab.checks'):
        assert setup_middlewares(lambda job: [report])(_job()) == [report]
    assert 'PASS' in caplog.text


def test_exit_status_ignores_informational_failures():
    passed = CheckReport.residual('a', {}, 0.0, 1e-10)
    failed = CheckReport.residual('b', {}, 1.0, 1e-10)
    assert exit_status([passed]) == EXIT_PASS
    assert exit_status([passed, failed]) == EXIT_FAILURE
    assert exit_status([passed, failed.with_acceptance(False)]) == EXIT_PASS
