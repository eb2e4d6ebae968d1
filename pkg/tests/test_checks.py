"""
Tests for the check registry, the check context and a few registered checks
"""

import logging

import pytest

from czlab.config.run_config import CorpusSpec
from czlab.exceptions import InvalidInput
from czlab.models.report import CheckReport
from czlab.services import checks, czd
from tests.conftest import small_config


def _run(check_id, ctx):
    spec = checks.REGISTRY[check_id]
    return [report for item in ctx.corpus if spec.applies_to(item)
            for report in spec.func(ctx, item)]


def test_every_claim_maps_to_one_check():
    assert len(checks.claims()) == len(checks.REGISTRY)
    scopes = {spec.scope for spec in checks.REGISTRY.values()}
    assert scopes == {checks.INSTANCE, checks.RUN, checks.AGGREGATE_SCOPE}


def test_selected_checks_keep_registry_order():
    everything = checks.known_checks()
    picked = checks.selected_checks(['bmo', 'cz_reconstruction'])
    assert picked == sorted(picked, key=everything.index)
    assert checks.selected_checks(['all']) == list(everything)
    with pytest.raises(InvalidInput):
        checks.selected_checks(['cz_reconstruction', 'no_such_check'])


def test_register_refuses_duplicates():
    with pytest.raises(ValueError):
        checks.register('bmo', 'again')(lambda ctx, instance: [])


def test_context_caches_decompositions():
    ctx = checks.CheckContext(small_config())
    f = ctx.corpus[0].field
    lam = ctx.lambdas(f)[0]
    assert ctx.bundle(f, lam) is ctx.bundle(f, lam)
    assert lam == pytest.approx(czd.admissibility_floor(f))


def test_context_lambdas_follow_the_mode():
    ctx = checks.CheckContext(small_config(lambda_mode='absolute', lambda_grid=(3.0,)))
    assert ctx.lambdas(ctx.corpus[0].field) == [3.0]


def test_remembered_bundles_are_served():
    ctx = checks.CheckContext(small_config())
    f = ctx.corpus[0].field
    bundle = czd.cz_decompose(f, 5.0)
    ctx.remember(bundle)
    assert ctx.bundle(f, 5.0) is bundle


@pytest.mark.parametrize('check_id', ['cz_reconstruction', 'cuculescu_properties',
                                      'dyadic_filtration', 'rademacher_orthogonality'])
def test_exact_checks_pass_on_random_fields(check_id):
    ctx = checks.CheckContext(small_config())
    reports = _run(check_id, ctx)
    assert reports
    for report in reports:
        assert report.check_id == check_id
        assert report.passed, report.details


def test_reports_carry_the_instance_descriptor():
    ctx = checks.CheckContext(small_config())
    (report, *_) = _run('cz_reconstruction', ctx)
    assert report.instance['family'] == 'random_psd'
    assert report.instance['K'] == 6
    assert report.instance['range'] == ctx.level_range.label()


def test_scalar_oracle_match_on_diagonal_fields():
    ctx = checks.CheckContext(small_config(n=1, corpus=(CorpusSpec('diagonal', 1),)))
    (report,) = _run('scalar_oracle_match', ctx)
    assert report.passed, report.details
    assert report.details['oracle_weak_constant'] > 0


def test_restricted_checks_skip_other_families():
    ctx = checks.CheckContext(small_config())
    assert _run('scalar_oracle_match', ctx) == []


def _weak(family, value):
    return CheckReport.empirical('weak11', {'family': family}, value, 64.0,
                                 details={'weak_constant': value})


def _oracle(value):
    return CheckReport.residual('scalar_oracle_match', {'family': 'diagonal'}, 0.0, 1e-10,
                                details={'oracle_weak_constant': value})


def test_weak11_uniformity_compares_spikes_with_the_oracle():
    ctx = checks.CheckContext(small_config())
    (close,) = checks.weak11_uniformity(ctx, [_weak('spike', 1.5), _oracle(1.0)])
    assert close.passed
    assert close.details['spike_to_oracle'] == pytest.approx(1.5)
    (far,) = checks.weak11_uniformity(ctx, [_weak('spike', 3.0), _oracle(1.0)])
    assert not far.passed


def test_harness_completeness_names_missing_checks():
    ctx = checks.CheckContext(small_config(checks=('cz_reconstruction', 'harness_completeness')))
    (missing,) = checks.harness_completeness(ctx, [])
    assert not missing.passed
    assert missing.details['missing'] == ['cz_reconstruction']
    ran = _run('cz_reconstruction', ctx)
    (complete,) = checks.harness_completeness(ctx, ran)
    assert complete.passed


@pytest.mark.parametrize('check_id', ['boundary_operator_decay', 'pseudo_localization'])
def test_decay_checks_pass_with_full_sweeps(check_id):
    ctx = checks.CheckContext(small_config(K=8))
    (report,) = checks.REGISTRY[check_id].func(ctx)
    assert report.check_id == check_id
    assert report.sweeps
    for sweep in report.sweeps:
        assert len(sweep.samples) >= 4
        assert sweep.fitted and sweep.zero_samples == 0
    assert report.passed, report.details


def test_boundary_operator_decay_reaches_the_finest_level():
    ctx = checks.CheckContext(small_config(K=8))
    (report,) = checks.boundary_operator_decay(ctx)
    (sweep,) = report.sweeps
    # n - k = 6 is n = K at k = 2
    last = dict(sweep.samples)[6.0]
    assert last > 0


def test_single_difference_decay_fits_both_regimes():
    ctx = checks.CheckContext(small_config(K=8))
    (report,) = checks.single_difference_decay(ctx)
    labels = {sweep.label for sweep in report.sweeps}
    assert labels == {'random_psd k>=n', 'random_psd k<n'}
    for sweep in report.sweeps:
        assert len(sweep.samples) >= 4
        assert sweep.fitted
        assert sweep.fitted_log2_slope < 0
    assert not report.details.get('unfitted_sweeps')


def test_pseudo_localization_records_its_offset_range():
    domain, top, k0 = checks.pseudo_localization_domain(2, 'periodic')
    assert domain.K * domain.d <= 16
    assert top == 4 and k0 == 4
    line, line_top, _ = checks.pseudo_localization_domain(1, 'periodic')
    assert line_top == checks.PSEUDO_LOCALIZATION_OFFSETS


def test_vanishing_levels_are_logged_and_skipped(monkeypatch, caplog):
    real = checks.cond_exp

    def silent_at_three(field, level):
        result = real(field, level)
        return result * 0.0 if level == 3 else result

    monkeypatch.setattr(checks, 'cond_exp', silent_at_three)
    ctx = checks.CheckContext(small_config(K=8))
    with caplog.at_level(logging.DEBUG, logger='czlab.services.checks'):
        (report,) = checks.boundary_operator_decay(ctx)
    (sweep,) = report.sweeps
    assert 1.0 not in dict(sweep.samples)
    assert any('E_3 f of random_psd vanishes' in record.getMessage() for record in caplog.records)
