"""
Tests for corpus generation
"""

import numpy as np
import pytest

from czlab.config.run_config import CorpusSpec
from czlab.exceptions import ConfigError, InvalidInput
from czlab.models.field import OperatorField
from czlab.services import corpus, czd, norms
from czlab.services.operators import cond_exp, mart_diffs


def test_spike_has_unit_mass_and_records_height(line, rng):
    field, extra = corpus.spike(line, 2, rng, support_fraction=1.0 / 16, rank=1)
    assert norms.lp_norm(field, 1) == pytest.approx(1.0)
    assert extra['rho'] == pytest.approx(1.0 / 16)
    assert norms.lp_norm(field, np.inf) == pytest.approx(extra['h'])
    czd.check_positive(field)


def test_spike_rejects_bad_support(line, rng):
    with pytest.raises(InvalidInput):
        corpus.spike(line, 2, rng, support_fraction=0.0)


def test_random_psd_is_positive_with_unit_mass(plane, rng):
    field = corpus.random_psd(plane, 3, rng)
    czd.check_positive(field)
    assert norms.phi(field) == pytest.approx(1.0)


def test_diagonal_fields_are_diagonal(line, rng):
    field = corpus.diagonal(line, 3, rng, profile='indicator')
    off = field.values - np.einsum('...ii->...i', field.values)[..., None] * np.eye(3)
    assert np.abs(off).max() == 0.0
    with pytest.raises(InvalidInput):
        corpus.diagonal(line, 1, rng, profile='sawtooth')


def test_martingale_difference_has_zero_parent_means(line, rng):
    values = corpus.martingale_difference(line, 2, rng, 3)
    field = OperatorField(line, line.K, values)
    assert cond_exp(field, 2).max_abs() < 1e-12
    assert np.allclose(cond_exp(field, 3).values, field.values[::8])


def test_adversarial_differences_sit_under_their_projections(line, rng):
    h, dh, A = corpus.adversarial(line, 2, rng, s=2)
    assert sorted(dh) == [k + 2 for k in sorted(A)]
    for k, projection in A.items():
        perp = projection.complement().finest().values
        assert np.abs(perp @ dh[k + 2].values).max() < 1e-12
    differences = mart_diffs(h)
    for level, piece in dh.items():
        assert np.allclose(differences[level].finest().values, piece.values, atol=1e-12)


def test_adversarial_rejects_levels_past_the_depth(line, rng):
    with pytest.raises(InvalidInput):
        corpus.adversarial(line, 2, rng, s=2, levels=(line.K - 1,))


def test_generation_is_reproducible(line):
    spec = CorpusSpec('spike', 2, {'rank': 1})
    first = corpus.generate(line, 2, spec, seed=7)
    second = corpus.generate(line, 2, spec, seed=7)
    other = corpus.generate(line, 2, spec, seed=8)
    for a, b in zip(first, second):
        assert np.array_equal(a.field.values, b.field.values)
        assert a.descriptor() == b.descriptor()
    assert not np.array_equal(first[0].field.values, other[0].field.values)
    assert not np.array_equal(first[0].field.values, first[1].field.values)


def test_instances_do_not_depend_on_corpus_order(line):
    specs = [CorpusSpec('random_psd', 1), CorpusSpec('diagonal', 1)]
    forward = corpus.gen_corpus(line, 2, specs, seed=1)
    backward = corpus.gen_corpus(line, 2, specs[::-1], seed=1)
    assert [item.label for item in forward] == ['random_psd#0', 'diagonal#0']
    assert np.array_equal(forward[0].field.values, backward[1].field.values)


def test_adversarial_instances_are_normalized(line):
    (instance,) = corpus.generate(line, 2, CorpusSpec('adversarial', 1, {'s': 2}), seed=0)
    assert norms.lp_norm(instance.field, 1) == pytest.approx(1.0)
    assert instance.descriptor()['s'] == 2


def test_unknown_family_is_a_config_error(line):
    with pytest.raises(ConfigError):
        corpus.generate(line, 2, CorpusSpec('cantor', 1), seed=0)
    with pytest.raises(ConfigError):
        corpus.generate(line, 2, CorpusSpec('spike', 0), seed=0)
