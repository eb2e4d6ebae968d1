"""
Tests for check reports and decay sweeps
"""

import math

import pytest

from czlab.exceptions import InvalidInput
from czlab.models.report import CheckReport, DecaySweep


def test_sweep_recovers_a_clean_slope():
    sweep = DecaySweep.fit('n-k', [(j, 2.0 ** -j) for j in range(1, 6)])
    assert sweep.fitted
    assert sweep.fitted_log2_slope == pytest.approx(-1.0)
    assert sweep.zero_samples == 0


def test_sweep_needs_four_samples():
    with pytest.raises(InvalidInput):
        DecaySweep.fit('n-k', [(1, 0.5), (2, 0.25), (3, 0.125)])


def test_all_zero_sweep_has_no_slope_and_fails():
    sweep = DecaySweep.fit('n-k', [(1, 0.0), (2, 0.0), (3, 0.0), (4, 0.0)], label='zeros')
    assert not sweep.fitted
    assert sweep.zero_samples == 4
    report = CheckReport.decay('boundary_operator_decay', {}, [sweep], -0.9)
    assert not report.passed
    assert math.isnan(report.measured)
    assert report.details['unfitted_sweeps'] == ['zeros']
    assert report.details['zero_samples'] == {'zeros': 4}


def test_non_finite_ratio_fails_the_sweep():
    sweep = DecaySweep.fit('s', [(1, 0.5), (2, math.nan), (3, 0.125), (4, 0.0625)])
    assert not sweep.fitted
    assert sweep.nonfinite_samples == 1
    assert not CheckReport.decay('pseudo_localization', {}, [sweep], -0.4).passed


def test_isolated_zero_is_counted_but_the_fit_stands():
    sweep = DecaySweep.fit('n-k', [(1, 0.5), (2, 0.25), (3, 0.0), (4, 0.0625)], label='f')
    assert sweep.fitted
    assert sweep.zero_samples == 1
    report = CheckReport.decay('boundary_operator_decay', {}, [sweep], -0.9)
    assert report.passed
    assert report.details['zero_samples'] == {'f': 1}


def test_one_unfitted_sweep_fails_the_whole_report():
    good = DecaySweep.fit('n-k', [(j, 2.0 ** -j) for j in range(1, 5)], label='good')
    bad = DecaySweep.fit('n-k', [(j, 0.0) for j in range(1, 5)], label='bad')
    report = CheckReport.decay('single_difference_decay', {}, [good, bad], -0.4)
    assert not report.passed
    assert report.details['unfitted_sweeps'] == ['bad']
    assert 'nan' in report.to_dict()['measured']
