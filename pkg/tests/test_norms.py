"""
Tests for the norm service
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from czlab.exceptions import InvalidInput
from czlab.models.field import OperatorField
from czlab.models.geometry import DyadicDomain
from czlab.models.sequences import sign_matrix
from czlab.models.spectral import RcDecomposition, SpectralDistribution
from czlab.services import norms
from czlab.services.corpus import random_hermitian
from czlab.services.operators import apply_stack, tk


@pytest.mark.parametrize('p', [1.0, 2.0, 3.0])
def test_lp_norm_of_the_identity(line, p):
    field = OperatorField.identity(line, 3, 0)
    assert norms.lp_norm(field, p) == pytest.approx(3.0 ** (1.0 / p))
    assert norms.lp_norm(field, np.inf) == pytest.approx(1.0)


def test_lp_norm_rejects_small_exponents(line):
    with pytest.raises(InvalidInput):
        norms.lp_norm(OperatorField.identity(line, 1), 0.5)


def test_phi_is_the_trace_integral(psd_field):
    assert norms.phi(psd_field) == pytest.approx(norms.lp_norm(psd_field, 1))


def test_distribution_and_weak_norm_of_a_step():
    domain = DyadicDomain(1, 2)
    values = np.zeros((4, 1, 1))
    values[0, 0, 0] = 4.0
    values[1, 0, 0] = 1.0
    field = OperatorField(domain, 2, values)
    assert norms.distribution(field, 0.5) == pytest.approx(0.5)
    assert norms.distribution(field, 2.0) == pytest.approx(0.25)
    # max(4 * 1/4, 1 * 1/2)
    assert norms.weak_l1(field) == pytest.approx(1.0)


def test_spectral_distribution_pools_equal_values():
    dist = SpectralDistribution.from_values(np.array([1.0, 1.0, 2.0, 0.0]), 0.25)
    assert np.allclose(dist.breakpoints, [1.0, 2.0])
    assert np.allclose(dist.weights, [0.75, 0.25])
    assert dist.support_measure == pytest.approx(0.75)
    assert dist.measure_above(1.0) == pytest.approx(0.25)
    assert dist.weak_norm() == pytest.approx(0.75)


@given(seed=st.integers(0, 2 ** 32 - 1))
@settings(max_examples=25, deadline=None)
def test_weak_norm_is_below_the_l1_norm(seed):
    domain = DyadicDomain(1, 3)
    rng = np.random.default_rng(seed)
    field = OperatorField(domain, 3, random_hermitian(rng, domain.shape(), 2))
    assert norms.weak_l1(field) <= norms.lp_norm(field, 1) * (1 + 1e-12)
    lam = float(rng.uniform(0.1, 2.0))
    assert lam * norms.distribution(field, lam) <= norms.lp_norm(field, 1) * (1 + 1e-12)


def test_row_and_column_agree_for_scalars(scalar_field):
    seq = [tk(scalar_field, k) for k in range(3)]
    col = norms.square_function(seq, norms.COL)
    row = norms.square_function(seq, norms.ROW)
    assert np.allclose(col.values, row.values)


def test_row_and_column_l2_norms_agree(psd_field):
    seq = [tk(psd_field, k) for k in range(3)]
    assert norms.sq_norm(seq, 2, norms.COL) == pytest.approx(norms.sq_norm(seq, 2, norms.ROW))


def test_square_function_of_one_field_is_its_modulus(hermitian_field):
    sq = norms.square_function([hermitian_field])
    assert norms.lp_norm(sq, 1) == pytest.approx(norms.lp_norm(hermitian_field, 1))


def test_square_function_rejects_mixed_sizes(line):
    with pytest.raises(InvalidInput):
        norms.square_function([OperatorField.identity(line, 1), OperatorField.identity(line, 2)])
    with pytest.raises(InvalidInput):
        norms.square_function([])


def test_single_level_omega_distribution_matches_the_field(psd_field):
    stack = apply_stack(tk, psd_field, [1])
    signs, _ = sign_matrix(1)
    pooled = norms.omega_distribution(stack, signs, psd_field.domain.cell_volume)
    direct = norms.spectral_distribution(tk(psd_field, 1))
    assert pooled.weak_norm() == pytest.approx(direct.weak_norm())
    assert pooled.support_measure == pytest.approx(direct.support_measure)


def test_omega_distribution_checks_the_sign_width(psd_field):
    stack = apply_stack(tk, psd_field, [0, 1])
    with pytest.raises(InvalidInput):
        norms.omega_distribution(stack, np.ones((2, 3)), psd_field.domain.cell_volume)


def test_rc_witness_needs_an_exact_split(psd_field):
    seq = [tk(psd_field, k) for k in range(2)]
    zero = [item * 0.0 for item in seq]
    assert norms.rc_lp_upper(seq, RcDecomposition(seq, zero), 2) == pytest.approx(
        norms.sq_norm(seq, 2, norms.COL))
    with pytest.raises(InvalidInput):
        norms.rc_lp_upper(seq, RcDecomposition(zero, zero), 2)


def test_bmo_of_a_constant_sequence_is_zero(line):
    seq = [OperatorField.identity(line, 2, 0) for _ in range(3)]
    assert all(value == pytest.approx(0.0, abs=1e-12) for value in norms.bmo_all(seq).values())


def test_bmo_is_bounded_by_twice_the_sup(psd_field):
    seq = [tk(psd_field, k) for k in range(3)]
    square_sup = norms.sq_norm(seq, np.inf, norms.COL)
    for value in norms.bmo_all(seq).values():
        assert value <= 2.0 * np.sqrt(3.0) * square_sup + 1e-12


def test_bmo_rejects_unknown_frames(psd_field):
    with pytest.raises(InvalidInput):
        norms.bmo_d([psd_field], norms.COL, 'e_kk')
