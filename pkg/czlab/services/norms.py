"""
Norm service: L_p(N) norms, the weak-L_1 quasi-norm through pooled singular
values, row and column square functions, rc witness bounds and the dyadic
BMO norms in both frames.

The trace on N is phi = (cell volume) x (matrix trace), summed over cells.
Averages over a finite sign set Omega are folded into the same pooling by
giving every (pattern, cell) singular value the measure volume / |Omega|.
"""

import logging
from typing import Optional, Sequence

import numpy as np

from czlab.exceptions import InvalidInput
from czlab.models.field import OperatorField
from czlab.models.spectral import RcDecomposition, SpectralDistribution
from czlab.services import algebra

logger = logging.getLogger(__name__)

ROW = 'row'
COL = 'col'
SIDES = (ROW, COL)
FRAME_COLUMN = 'e_k1'
FRAME_ROW = 'e_1k'
FRAMES = (FRAME_COLUMN, FRAME_ROW)

_PATTERN_CHUNK = 64


def _adjoint(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def integral(f: OperatorField) -> np.ndarray:
    """int f, an n x n matrix"""
    return f.cell_volume * f.flat().sum(axis=0)


def phi(f: OperatorField) -> float:
    """phi(f) = int tr f"""
    return float(algebra.trace(integral(f)))


def lp_norm(f: OperatorField, p: float) -> float:
    """(int tr |f|^p)^(1/p); the largest cell operator norm when p = inf"""
    if p < 1:
        raise InvalidInput(f"Norm exponent must be >= 1, got {p}", 'p')
    s = algebra.singular_values(f.flat())
    if np.isinf(p):
        return float(s.max()) if s.size else 0.0
    return float((f.cell_volume * np.sum(s ** p)) ** (1.0 / p))


def spectral_distribution(f: OperatorField) -> SpectralDistribution:
    return SpectralDistribution.from_values(algebra.singular_values(f.flat()), f.cell_volume)


def distribution(f: OperatorField, lam: float) -> float:
    """phi(|f| > lam)"""
    s = algebra.singular_values(f.flat())
    return float(f.cell_volume * np.count_nonzero(s > lam))


def weak_l1(f: OperatorField) -> float:
    """sup over lam of lam * phi(|f| > lam), read off the pooled breakpoints"""
    return spectral_distribution(f).weak_norm()


def _pooled_singular_values(stack: np.ndarray, signs: np.ndarray,
                            left: Optional[np.ndarray], right: Optional[np.ndarray]) -> np.ndarray:
    chunks = []
    for start in range(0, signs.shape[0], _PATTERN_CHUNK):
        block = np.einsum('pk,kcij->pcij', signs[start:start + _PATTERN_CHUNK], stack)
        if left is not None:
            block = left[None] @ block @ right[None]
        chunks.append(algebra.singular_values(block).ravel())
    return np.concatenate(chunks) if chunks else np.zeros(0)


def omega_distribution(stack: np.ndarray, signs: np.ndarray, cell_volume: float,
                       left: np.ndarray = None, right: np.ndarray = None) -> SpectralDistribution:
    """Distribution of |sum_k eps_k x_k| under E_Omega x phi

    stack is (m, cells, n, n) at one level; signs is (patterns, m). When
    `left` is given every signed sum is sandwiched as left . sum . right
    (right defaults to left).
    """
    stack = np.asarray(stack)
    signs = np.asarray(signs, dtype=float)
    if stack.shape[0] != signs.shape[1]:
        raise InvalidInput(f"{signs.shape[1]} signs for {stack.shape[0]} levels", 'signs')
    if left is not None and right is None:
        right = left
    values = _pooled_singular_values(stack, signs, left, right)
    return SpectralDistribution.from_values(values, cell_volume / signs.shape[0])


def omega_weak(stack: np.ndarray, signs: np.ndarray, cell_volume: float, **sandwich) -> float:
    """sup over lam of lam * E_Omega phi(|sum_k eps_k x_k| > lam)"""
    return omega_distribution(stack, signs, cell_volume, **sandwich).weak_norm()


def _check_sequence(seq: Sequence[OperatorField]):
    if not seq:
        raise InvalidInput("Empty sequence", 'seq')
    first = seq[0]
    for field in seq[1:]:
        if field.domain != first.domain or field.n != first.n:
            raise InvalidInput("Sequence members differ in domain or matrix size", 'seq')


def square_function(seq: Sequence[OperatorField], side: str = COL) -> OperatorField:
    """(sum_k |f_k|^2)^(1/2) with |x|^2 = x*x (col) or x x* (row)"""
    if side not in SIDES:
        raise InvalidInput(f"Unknown side: {side}", 'side')
    seq = list(seq)
    _check_sequence(seq)
    level = max(field.level for field in seq)
    total = np.zeros(seq[0].domain.shape(level) + (seq[0].n, seq[0].n), dtype=np.complex128)
    for field in seq:
        values = field.refine(level).values
        total += _adjoint(values) @ values if side == COL else values @ _adjoint(values)
    return OperatorField(seq[0].domain, level, algebra.psd_sqrt(total))


def sq_norm(seq: Sequence[OperatorField], p: float, side: str = COL) -> float:
    return lp_norm(square_function(seq, side), p)


def sq_weak(seq: Sequence[OperatorField], side: str = COL) -> float:
    return weak_l1(square_function(seq, side))


def _witness_parts(seq, dec: RcDecomposition, tolerance: float):
    from czlab.config import config_manager
    dec.validate_against(list(seq), tolerance or config_manager.tolerance('identity'))
    return list(dec.g), list(dec.h)


def rc_weak_upper(seq: Sequence[OperatorField], dec: RcDecomposition,
                  tolerance: float = None) -> float:
    """Column weak norm of g plus row weak norm of h: an upper witness for the rc quasi-norm"""
    g, h = _witness_parts(seq, dec, tolerance)
    return sq_weak(g, COL) + sq_weak(h, ROW)


def rc_lp_upper(seq: Sequence[OperatorField], dec: RcDecomposition, p: float,
                tolerance: float = None) -> float:
    """Column L_p norm of g plus row L_p norm of h"""
    g, h = _witness_parts(seq, dec, tolerance)
    return sq_norm(g, p, COL) + sq_norm(h, p, ROW)


def finest_stack(seq: Sequence[OperatorField]) -> np.ndarray:
    """(m, grid..., n, n) values of a sequence at the finest level"""
    seq = list(seq)
    _check_sequence(seq)
    return np.stack([field.finest().values for field in seq])


def cube_groups(stack: np.ndarray, d: int, K: int, level: int) -> np.ndarray:
    """Regroup (m, grid..., n, n) as (m, cubes, cells per cube, n, n) for level-`level` cubes"""
    m = stack.shape[0]
    n = stack.shape[-1]
    c = 2 ** level
    b = 2 ** (K - level)
    if d == 1:
        return stack.reshape(m, c, b, n, n)
    grouped = stack.reshape(m, c, b, c, b, n, n).transpose(0, 1, 3, 2, 4, 5, 6)
    return grouped.reshape(m, c * c, b * b, n, n)


def _gram_norm(D: np.ndarray, side: str, frame: str) -> np.ndarray:
    """Per cube, || average over the cube of |F - centre|^2 ||, D being (m, cubes, cells, n, n)"""
    if side not in SIDES:
        raise InvalidInput(f"Unknown side: {side}", 'side')
    if frame not in FRAMES:
        raise InvalidInput(f"Unknown frame: {frame}", 'frame')
    m, q, c, n, _ = D.shape
    diagonal = (side == COL) == (frame == FRAME_COLUMN)
    if diagonal:
        # F = sum f_k e_k1 with |F|^2 = F*F, or F = sum f_k e_1k with |F*|^2 = FF*
        prod = _adjoint(D) @ D if side == COL else D @ _adjoint(D)
        block = prod.sum(axis=0).mean(axis=1)
        return algebra.op_norm(block)
    if side == ROW:
        gram = np.einsum('aqcil,bqcjl->qaibj', D, np.conj(D)) / c
    else:
        gram = np.einsum('aqcli,bqclj->qaibj', np.conj(D), D) / c
    return algebra.op_norm(gram.reshape(q, m * n, m * n))


def oscillation(values: np.ndarray, centres: np.ndarray, side: str, frame: str) -> float:
    """(|Q|^-1 int_Q |F - centre|^2)^(1/2) on one cube

    values is (m, cells of Q, n, n); centres is (m, n, n), one per sequence member.
    """
    D = (np.asarray(values) - np.asarray(centres)[:, None])[:, None]
    return float(np.sqrt(max(float(_gram_norm(D, side, frame)[0]), 0.0)))


def bmo_levels(seq: Sequence[OperatorField], side: str = COL,
               frame: str = FRAME_COLUMN) -> np.ndarray:
    """Mean-based oscillation sup per cube level 0..K"""
    seq = list(seq)
    stack = finest_stack(seq)
    domain = seq[0].domain
    per_level = np.zeros(domain.K + 1)
    for level in range(domain.K + 1):
        G = cube_groups(stack, domain.d, domain.K, level)
        D = G - G.mean(axis=2, keepdims=True)
        per_level[level] = np.sqrt(np.maximum(_gram_norm(D, side, frame), 0.0)).max()
    return per_level


def bmo_d(seq: Sequence[OperatorField], side: str = COL, frame: str = FRAME_COLUMN) -> float:
    """Dyadic BMO norm of sum_k f_k (x) e_k1 or e_1k, over all dyadic cubes of the window"""
    return float(bmo_levels(seq, side, frame).max())


def bmo_all(seq: Sequence[OperatorField]) -> dict:
    """bmo_d in all four side/frame combinations"""
    return {f"{side}/{frame}": bmo_d(seq, side, frame) for frame in FRAMES for side in SIDES}
