"""
Operator service: the dyadic conditional expectations E_k, the ball
averages M_k and the operators built from them (T_k, R_k, M_{k,n},
martingale differences and the Rademacher linearization).

Ball averages on the torus are FFT convolutions of every matrix entry with
the symmetric ball kernel; interior mode extends f by zero outside the
window and pads the transform so nothing wraps.
"""

import logging
from typing import Iterable, Sequence

import numpy as np
from scipy import fft

from czlab.exceptions import InvalidInput
from czlab.models.field import OperatorField
from czlab.models.sequences import LevelRange, SignPattern
from czlab.services import grid

logger = logging.getLogger(__name__)


def _grid_axes(d: int):
    return tuple(range(d))


def _block_mean(values: np.ndarray, d: int, coarse: int, fine: int) -> np.ndarray:
    """Average a level-`fine` value grid down to level `coarse`"""
    b = 2 ** (fine - coarse)
    m = 2 ** coarse
    tail = values.shape[d:]
    if d == 1:
        return values.reshape((m, b) + tail).mean(axis=1)
    return values.reshape((m, b, m, b) + tail).mean(axis=(1, 3))


def cond_exp(f: OperatorField, k: int) -> OperatorField:
    """E_k f: constant on level-k cubes, equal there to the mean of f"""
    f.domain.check_level(k, 'k')
    if k >= f.level:
        return f
    return OperatorField(f.domain, k, _block_mean(f.values, f.d, k, f.level), f.hermitian)


def _padded_size(domain, k: int) -> int:
    reach = grid.ball_radius_cells(domain, k)
    size = 1
    while size < domain.side + reach:
        size *= 2
    return size


def _convolve(values: np.ndarray, kernel: np.ndarray, d: int) -> np.ndarray:
    axes = _grid_axes(d)
    kernel_hat = fft.fftn(kernel, axes=axes)
    spectrum = fft.fftn(values, axes=axes)
    expand = (slice(None),) * d + (None, None)
    return fft.ifftn(spectrum * kernel_hat[expand], axes=axes)


def _correlate(spectrum: np.ndarray, kernel: np.ndarray, d: int) -> np.ndarray:
    """out(x) = sum_a kernel(a) values(x + a) on the torus, for a real kernel

    `spectrum` is the transform of the values over the grid axes.
    """
    axes = _grid_axes(d)
    kernel_hat = np.conj(fft.fftn(kernel, axes=axes))
    expand = (slice(None),) * d + (None, None)
    return fft.ifftn(spectrum * kernel_hat[expand], axes=axes)


def ball_avg(f: OperatorField, k: int) -> OperatorField:
    """M_k f(x) = |B_k|^-1 int_{B_k} f(x + y) dy, evaluated on level-K cells"""
    domain = f.domain
    grid.check_ball_level(domain, k)
    values = f.finest().values
    if domain.periodic:
        out = _convolve(values, grid.kernel_on_grid(domain, k), f.d)
    else:
        size = _padded_size(domain, k)
        padded = np.zeros((size,) * f.d + values.shape[f.d:], dtype=np.complex128)
        window = (slice(0, domain.side),) * f.d
        padded[window] = values
        out = _convolve(padded, grid.kernel_on_grid(domain, k, size), f.d)[window]
    result = OperatorField(domain, domain.K, out, hermitian=False)
    return result.hermitian_part() if f.hermitian else result


def tk(f: OperatorField, k: int) -> OperatorField:
    """T_k f = (M_k - E_k) f"""
    return ball_avg(f, k) - cond_exp(f, k)


def tk_prime(f: OperatorField, k: int) -> OperatorField:
    """(M_{k-1} - E_{k-1}) f written as its own operator for the R_k split"""
    return tk(f, k - 1)


def rk(f: OperatorField, k: int) -> OperatorField:
    """R_k f = (M_k - M_{k-1}) f"""
    if k < 1:
        raise InvalidInput(f"R_k needs k >= 1, got {k}", 'k')
    return ball_avg(f, k) - ball_avg(f, k - 1)


def mkn(f: OperatorField, k: int, n: int) -> OperatorField:
    """M_{k,n} f(x) = |B_k|^-1 int over I(B_k + x, n) of f"""
    domain = f.domain
    values = f.finest().values
    if domain.periodic:
        kernels = grid.mkn_kernels(domain, k, n)
        L = 2 ** (domain.K - n)
        out = np.empty_like(values, dtype=np.complex128)
        residues = np.indices(domain.shape()) % L
        spectrum = fft.fftn(values, axes=_grid_axes(f.d))
        for residue, kernel in kernels.items():
            select = np.logical_and.reduce([residues[a] == residue[a] for a in range(f.d)])
            out[select] = _correlate(spectrum, kernel, f.d)[select]
    else:
        out = _mkn_direct(domain, values, k, n)
    result = OperatorField(domain, domain.K, out, hermitian=False)
    return result.hermitian_part() if f.hermitian else result


def _mkn_direct(domain, values: np.ndarray, k: int, n: int) -> np.ndarray:
    total = grid.ball_volume_cells(domain, k)
    flat = values.reshape(-1, *values.shape[domain.d:])
    out = np.empty_like(flat, dtype=np.complex128)
    for x in range(domain.cell_count):
        cells, weights = grid.boundary_cubes(domain, x, k, n)
        out[x] = np.tensordot(weights, flat[cells], axes=(0, 0)) / total
    return out.reshape(values.shape)


def mart_diff(f: OperatorField, n: int) -> OperatorField:
    """df_n = E_n f - E_{n-1} f"""
    if n < 1:
        raise InvalidInput("Martingale differences start at n = 1", 'n')
    f.domain.check_level(n, 'n')
    return cond_exp(f, n) - cond_exp(f, n - 1)


def mart_diffs(f: OperatorField) -> dict:
    """All differences df_1..df_K keyed by level"""
    return {n: mart_diff(f, n) for n in range(1, f.domain.K + 1)}


def rademacher_T(f: OperatorField, eps: SignPattern, level_range: LevelRange) -> OperatorField:
    """sum over the range of eps_k T_k f"""
    if len(eps) != len(level_range):
        raise InvalidInput(
            f"{len(eps)} signs for a range of {len(level_range)} levels", 'eps')
    level_range.check_within(grid.resolution_limit(f.domain))
    return field_sum([tk(f, k) * float(sign) for sign, k in zip(eps.signs, level_range)])


def tk_stack(f: OperatorField, levels: Iterable[int]) -> np.ndarray:
    """T_k f for every level, stacked as (m, cells, n, n) at the finest level"""
    return np.stack([tk(f, k).flat() for k in levels])


def apply_stack(op, f: OperatorField, levels: Iterable[int]) -> np.ndarray:
    """Any level-indexed operator applied at every level, stacked like tk_stack"""
    return np.stack([op(f, k).finest().flat() for k in levels])


def signed_sums(stack: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """For each sign row, sum_k eps_k stack[k]; shape (patterns, cells, n, n)"""
    return np.einsum('pk,kcij->pcij', np.asarray(signs, dtype=float), stack)


def field_sum(fields: Sequence[OperatorField], domain=None, n: int = None) -> OperatorField:
    """Sum of a possibly empty sequence of fields"""
    fields = list(fields)
    if not fields:
        if domain is None or n is None:
            raise InvalidInput("Empty sum needs a domain and matrix size", 'fields')
        return OperatorField.zeros(domain, n)
    total = fields[0]
    for field in fields[1:]:
        total = total + field
    return total
