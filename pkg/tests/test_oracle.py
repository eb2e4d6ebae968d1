"""
Tests: the matrix services agree with the brute-force scalar reference on n = 1 fields
"""

import numpy as np
import pytest

from czlab.config import config_manager
from czlab.exceptions import InvalidInput
from czlab.models.geometry import DyadicDomain
from czlab.models.sequences import sign_matrix
from czlab.services import corpus, grid, norms, operators
from czlab.services.oracle import ScalarOracle, scalar_oracle


def _real(field):
    return np.real(field.finest().values[..., 0, 0])


@pytest.fixture(params=[DyadicDomain(1, 6), DyadicDomain(2, 4)], ids=['line', 'plane'])
def scalar(request, rng):
    return corpus.diagonal(request.param, 1, rng, profile='random')


@pytest.fixture
def oracle(scalar):
    return ScalarOracle.for_field(scalar, config_manager.get_app_config('BALL_SUBSAMPLING'))


def test_conditional_expectations_agree(scalar, oracle):
    values = oracle.scalar(scalar)
    for k in range(scalar.domain.K + 1):
        assert np.allclose(_real(operators.cond_exp(scalar, k)), oracle.cond_exp(values, k))


def test_ball_averages_agree(scalar, oracle):
    values = oracle.scalar(scalar)
    for k in range(1, grid.resolution_limit(scalar.domain) + 1):
        assert np.allclose(_real(operators.ball_avg(scalar, k)), oracle.ball_avg(values, k),
                           atol=1e-10)
        assert np.allclose(_real(operators.tk(scalar, k)), oracle.tk(values, k), atol=1e-10)
        assert np.allclose(_real(operators.rk(scalar, k)), oracle.rk(values, k), atol=1e-10)


def test_martingale_differences_agree(scalar, oracle):
    values = oracle.scalar(scalar)
    for n in range(1, scalar.domain.K + 1):
        assert np.allclose(_real(operators.mart_diff(scalar, n)), oracle.mart_diff(values, n))


def test_boundary_averages_agree_on_the_line(rng):
    field = corpus.diagonal(DyadicDomain(1, 5), 1, rng, profile='random')
    oracle = ScalarOracle.for_field(field)
    values = oracle.scalar(field)
    for k, n in ((1, 2), (2, 3), (2, 5)):
        assert np.allclose(_real(operators.mkn(field, k, n)), oracle.mkn(values, k, n),
                           atol=1e-10)


def test_norms_and_distribution_agree(scalar, oracle):
    values = oracle.scalar(scalar)
    for p in (1.0, 2.0, 3.0, np.inf):
        assert norms.lp_norm(scalar, p) == pytest.approx(oracle.lp(values, p), rel=1e-10)
    steps = np.unique(values)
    lam = 0.5 * float(steps[len(steps) // 2 - 1] + steps[len(steps) // 2])
    assert norms.distribution(scalar, lam) == pytest.approx(oracle.distribution(values, lam))


def test_square_function_agrees(scalar, oracle):
    values = oracle.scalar(scalar)
    levels = [1, 2]
    expected = oracle.square([oracle.tk(values, k) for k in levels])
    actual = norms.square_function([operators.tk(scalar, k) for k in levels], norms.COL)
    assert np.allclose(_real(actual), expected, atol=1e-8)


def test_rademacher_weak_norm_agrees(scalar, oracle):
    values = oracle.scalar(scalar)
    levels = [1, 2]
    signs, _ = sign_matrix(len(levels))
    stack = operators.tk_stack(scalar, levels)
    measured = norms.omega_weak(stack, signs, scalar.domain.cell_volume)
    assert measured == pytest.approx(oracle.weak_rademacher(values, levels), rel=1e-8)


def test_bmo_agrees_in_both_forms(scalar, oracle):
    values = oracle.scalar(scalar)
    levels = [1, 2]
    seq = [operators.tk(scalar, k) for k in levels]
    reference = [oracle.tk(values, k) for k in levels]
    assert norms.bmo_d(seq, norms.COL, norms.FRAME_COLUMN) == pytest.approx(
        oracle.bmo(reference), rel=1e-8, abs=1e-12)
    assert norms.bmo_d(seq, norms.COL, norms.FRAME_ROW) == pytest.approx(
        oracle.bmo(reference, gram=True), rel=1e-8, abs=1e-12)


def test_evaluate_dispatches_by_id(scalar):
    direct = scalar_oracle('E_k', scalar, {'k': 1})
    assert np.allclose(direct, _real(operators.cond_exp(scalar, 1)))
    assert scalar_oracle('lp', scalar, {'p': 1.0}) == pytest.approx(norms.lp_norm(scalar, 1))


def test_oracle_refuses_matrix_fields(psd_field):
    with pytest.raises(InvalidInput):
        scalar_oracle('E_k', psd_field, {'k': 1})


def test_oracle_refuses_unknown_operations(scalar):
    with pytest.raises(InvalidInput):
        scalar_oracle('fourier', scalar)
