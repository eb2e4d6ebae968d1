"""
Tests for the operator service
"""

import numpy as np
import pytest

from czlab.exceptions import InvalidInput
from czlab.models.field import OperatorField
from czlab.models.geometry import DyadicDomain
from czlab.models.sequences import LevelRange, SignPattern
from czlab.services import norms, operators
from czlab.services.operators import ball_avg, cond_exp, mart_diff, mkn, rk, tk


def _close(a: OperatorField, b: OperatorField, atol=1e-10):
    return np.allclose(a.finest().values, b.finest().values, atol=atol)


def test_cond_exp_tower_property(psd_field):
    for j in range(psd_field.domain.K + 1):
        for k in range(j + 1):
            assert _close(cond_exp(cond_exp(psd_field, j), k), cond_exp(psd_field, k))


def test_cond_exp_preserves_the_integral(psd_field):
    for k in range(psd_field.domain.K + 1):
        assert np.allclose(norms.integral(cond_exp(psd_field, k)), norms.integral(psd_field))


def test_cond_exp_bimodule_property(psd_field, rng, line):
    a = OperatorField(line, 2, rng.standard_normal(line.shape(2) + (2, 2)), hermitian=False)
    left = cond_exp(a @ psd_field, 2)
    right = a @ cond_exp(psd_field, 2)
    assert _close(left, right)


def test_cond_exp_of_a_coarse_field_is_the_field(line):
    field = OperatorField.identity(line, 2, 1)
    assert cond_exp(field, 4) is field


@pytest.mark.parametrize('domain', [DyadicDomain(1, 6), DyadicDomain(2, 4),
                                    DyadicDomain(2, 5)])
def test_ball_average_of_a_constant(domain):
    matrix = np.array([[2.0, 1.0j], [-1.0j, 3.0]])
    field = OperatorField.constant(domain, matrix, level=domain.K)
    for k in range(domain.K - 1):
        assert np.allclose(ball_avg(field, k).values, matrix, atol=1e-12)
        assert tk(field, k).max_abs() < 1e-12


def test_interior_ball_average_loses_mass_near_the_edge():
    domain = DyadicDomain(1, 6, 'interior')
    field = OperatorField.identity(domain, 1, domain.K)
    averaged = np.real(ball_avg(field, 2).values[..., 0, 0])
    assert averaged[0] < 1.0
    assert averaged[domain.side // 2] == pytest.approx(1.0)


def test_ball_average_is_self_adjoint(line, rng):
    f = OperatorField(line, line.K, rng.standard_normal(line.shape() + (1, 1)))
    g = OperatorField(line, line.K, rng.standard_normal(line.shape() + (1, 1)))
    lhs = np.sum(np.real(ball_avg(f, 2).values) * np.real(g.values))
    rhs = np.sum(np.real(f.values) * np.real(ball_avg(g, 2).values))
    assert lhs == pytest.approx(rhs)


def test_martingale_differences_telescope(psd_field):
    K = psd_field.domain.K
    total = cond_exp(psd_field, 0)
    for n in range(1, K + 1):
        total = total + mart_diff(psd_field, n)
    assert _close(total, psd_field)
    with pytest.raises(InvalidInput):
        mart_diff(psd_field, 0)


def test_rk_is_a_difference_of_ball_averages(psd_field):
    k = 2
    assert _close(rk(psd_field, k), ball_avg(psd_field, k) - ball_avg(psd_field, k - 1))
    with pytest.raises(InvalidInput):
        rk(psd_field, 0)


def test_tk_kills_the_constants_of_every_level(line):
    coarse = OperatorField.constant(line, np.eye(2), level=0)
    assert tk(coarse, 3).max_abs() < 1e-12


def test_mkn_periodic_matches_the_direct_sum(line, psd_field):
    fast = mkn(psd_field, 1, 3)
    values = psd_field.finest().values
    direct = operators._mkn_direct(line, values, 1, 3)
    assert np.allclose(fast.values, direct, atol=1e-12)


def test_mkn_at_the_finest_level_reads_the_half_covered_end_cells(line, psd_field):
    k = 2
    r = 2 ** (line.K - k)
    values = psd_field.finest().values
    ends = 0.5 * (np.roll(values, r, axis=0) + np.roll(values, -r, axis=0)) / (2 * r)
    result = mkn(psd_field, k, line.K)
    assert result.max_abs() > 0
    assert np.allclose(result.finest().values, ends, atol=1e-12)


def test_mkn_of_the_identity_at_the_finest_level(line):
    field = OperatorField.identity(line, 1, line.K)
    result = mkn(field, 2, line.K).finest().values
    # two half-covered end cells over a ball of 2^(K-1) cells
    assert np.allclose(result, 1.0 / 2 ** (line.K - 1))


@pytest.mark.parametrize('k,n', [(1, 2), (2, 3), (2, 5)])
def test_mkn_equals_the_ball_average_on_mean_zero_cubes(psd_field, k, n):
    # df_{n+1} has zero mean on every level-n cube, so only partial cubes contribute
    f = mart_diff(psd_field, n + 1)
    assert _close(mkn(f, k, n), ball_avg(f, k))


def test_interior_mkn_keeps_the_finest_level_boundary(rng):
    domain = DyadicDomain(1, 5, 'interior')
    field = OperatorField(domain, domain.K, rng.standard_normal(domain.shape() + (1, 1)))
    assert mkn(field, 1, domain.K).max_abs() > 0


def test_rademacher_sum(psd_field):
    levels = LevelRange(0, 2)
    eps = SignPattern((1, -1, 1))
    expected = tk(psd_field, 0) - tk(psd_field, 1) + tk(psd_field, 2)
    assert _close(operators.rademacher_T(psd_field, eps, levels), expected)
    with pytest.raises(InvalidInput):
        operators.rademacher_T(psd_field, SignPattern((1, 1)), levels)


def test_signed_sums_shape(psd_field):
    stack = operators.tk_stack(psd_field, [0, 1])
    signs = np.array([[1.0, 1.0], [1.0, -1.0]])
    sums = operators.signed_sums(stack, signs)
    assert sums.shape == (2,) + stack.shape[1:]
    assert np.allclose(sums[0] + sums[1], 2 * stack[0])


def test_empty_field_sum_needs_shape(line):
    with pytest.raises(InvalidInput):
        operators.field_sum([])
    assert operators.field_sum([], line, 2).max_abs() == 0.0
