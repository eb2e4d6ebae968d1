"""
Calderon-Zygmund service: Cuculescu's projections, the noncommutative
Calderon-Zygmund decomposition, the projection zeta, pseudo-localization
supports and the maximal projection q with sup_k ||q M_k f q|| controlled.
"""

import logging
from typing import Dict, Optional, Tuple

import numpy as np

from czlab.config import config_manager
from czlab.exceptions import InvalidInput, PreconditionError
from czlab.models.bundle import CuculescuSequence, CZBundle
from czlab.models.field import OperatorField, ProjectionField
from czlab.models.sequences import LevelRange
from czlab.models.spectral import RcDecomposition
from czlab.services import algebra, grid, norms
from czlab.services.operators import ball_avg, cond_exp, tk
from czlab.utils.decorators import timing_decorator

logger = logging.getLogger(__name__)


def _adjoint(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def check_positive(f: OperatorField):
    """f must be Hermitian with nonnegative spectrum on every cell"""
    if not f.hermitian:
        raise InvalidInput("Expected a Hermitian field", 'f')
    eigenvalues = np.linalg.eigvalsh(f.flat())
    scale = max(1.0, float(np.max(np.abs(eigenvalues)))) if eigenvalues.size else 1.0
    if eigenvalues.size and eigenvalues.min() < -config_manager.tolerance('eps_proj') * scale:
        raise InvalidInput(f"Field is not positive: eigenvalue {eigenvalues.min():.3e}", 'f')


def admissibility_floor(f: OperatorField) -> float:
    """||E_0 f||_op, the smallest lambda with m_lambda(f) = 0"""
    return float(algebra.op_norm(cond_exp(f, 0).flat()).max())


def split_positive(f: OperatorField) -> Tuple[OperatorField, OperatorField]:
    """f = f_plus - f_minus with both parts positive"""
    plus, minus = algebra.positive_parts(f.flat())
    shape = f.values.shape
    return (OperatorField(f.domain, f.level, plus.reshape(shape)),
            OperatorField(f.domain, f.level, minus.reshape(shape)))


@timing_decorator
def cuculescu(f: OperatorField, lam: float) -> CuculescuSequence:
    """q_k = 1_(0,lam](q_{k-1} f_k q_{k-1}) read in the corner q_{k-1} M q_{k-1}

    Equivalently q_k = q_{k-1} - 1_(lam,inf)(q_{k-1} f_k q_{k-1}), so that the
    kernel of q_{k-1} f_k q_{k-1} inside ran q_{k-1} survives.
    """
    if lam <= 0:
        raise InvalidInput(f"lambda must be positive, got {lam}", 'lam')
    check_positive(f)
    floor = admissibility_floor(f)
    if floor > lam * (1.0 + config_manager.tolerance('eps_eig')):
        raise PreconditionError(
            f"||E_0 f|| = {floor:.6g} exceeds lambda = {lam:.6g}; use lambda >= {floor:.6g}",
            'level 0')
    domain = f.domain
    q = {0: ProjectionField.identity(domain, f.n, 0)}
    p = {}
    for k in range(1, domain.K + 1):
        parent = q[k - 1].refine(k).values
        fk = cond_exp(f, k).refine(k).values
        corner = parent @ fk @ parent
        exceed = algebra.spectral_proj_gt(0.5 * (corner + _adjoint(corner)), lam)
        p[k] = ProjectionField(domain, k, exceed)
        q[k] = ProjectionField(domain, k, parent - exceed)
    logger.debug("Cuculescu at lambda=%.4g: active levels %s", lam,
                 [k for k in p if p[k].rank_field().any()])
    return CuculescuSequence(lam, q, p)


@timing_decorator
def cz_decompose(f: OperatorField, lam: float, cu: CuculescuSequence = None) -> CZBundle:
    """g_d + g_off + b_d + b_off with all indexed pieces, evaluated on level-K cells"""
    cu = cu if cu is not None else cuculescu(f, lam)
    domain = f.domain
    K = domain.K
    fine = f.finest()
    F = fine.values
    fk = {k: cond_exp(f, k).finest().values for k in range(K + 1)}
    P = {k: cu.p[k].finest().values for k in cu.levels()}
    Qk = {k: cu.q[k].finest().values for k in range(K + 1)}
    q = Qk[K]
    eye = np.broadcast_to(np.eye(f.n), F.shape)
    q_perp = eye - q

    def make(values, hermitian=False):
        field = OperatorField(domain, K, values, hermitian=False)
        return field.hermitian_part() if hermitian else field

    g_d = q @ F @ q + sum(P[k] @ fk[k] @ P[k] for k in P)
    b_diag = {k: make(P[k] @ (F - fk[k]) @ P[k], True) for k in P}
    b_pairs = {}
    g_off = q @ F @ q_perp + q_perp @ F @ q
    for i in P:
        for j in P:
            if i == j:
                continue
            top = max(i, j)
            g_off = g_off + P[i] @ fk[top] @ P[j]
            b_pairs[(i, j)] = make(P[i] @ (F - fk[top]) @ P[j])
    b_offdiag = {}
    for (i, j), piece in b_pairs.items():
        if i < j:
            b_offdiag[(i, j - i)] = piece + b_pairs[(j, i)]
    g_left, g_right = {}, {}
    for k in P:
        for s in range(1, K - k + 1):
            df = fk[k + s] - fk[k + s - 1]
            left = P[k] @ df @ Qk[k + s - 1]
            g_left[(s, k)] = make(left)
            g_right[(s, k)] = make(_adjoint(left))
    b_d = sum((piece.values for piece in b_diag.values()), np.zeros_like(F))
    b_off = sum((piece.values for piece in b_offdiag.values()), np.zeros_like(F))
    return CZBundle(
        f=fine,
        cuculescu=cu,
        g_d=make(g_d, True),
        g_off=make(g_off, True),
        b_d=make(b_d, True),
        b_off=make(b_off, True),
        zeta=zeta(cu),
        b_diag=b_diag,
        b_pairs=b_pairs,
        b_offdiag=b_offdiag,
        g_left=g_left,
        g_right=g_right,
    )


def _shift(values: np.ndarray, offset: Tuple[int, ...], periodic: bool) -> np.ndarray:
    """out[y] = values[y + offset] over the grid axes, zero outside when not periodic"""
    if periodic:
        return np.roll(values, tuple(-o for o in offset), axis=tuple(range(len(offset))))
    out = np.zeros_like(values)
    src, dst = [], []
    for o, size in zip(offset, values.shape):
        lo, hi = max(0, -o), min(size, size - o)
        dst.append(slice(lo, max(lo, hi)))
        src.append(slice(lo + o, max(lo, hi) + o))
    out[tuple(dst)] = values[tuple(src)]
    return out


def dilated_sum(projection: OperatorField, factor: int = 5) -> np.ndarray:
    """sum over Q of A_Q 1_{iQ}, on the level of the projection field

    x lies in iQ exactly when its own level-k cube is within (i-1)/2 cubes of Q.
    """
    if factor < 1 or factor % 2 == 0:
        raise InvalidInput(f"Dilation factor must be a positive odd integer, got {factor}", 'i')
    reach = (factor - 1) // 2
    values = projection.values
    total = np.zeros_like(values)
    for offset in np.ndindex(*((factor,) * projection.d)):
        total += _shift(values, tuple(o - reach for o in offset), projection.domain.periodic)
    return total


def dilated_join(projections: Dict[int, ProjectionField], domain, n: int,
                 factor: int = 5) -> ProjectionField:
    """join over k of i A_k, returned on level-K cells"""
    total = np.zeros(domain.shape() + (n, n), dtype=np.complex128)
    for k, projection in sorted(projections.items()):
        spread = OperatorField(domain, projection.level, dilated_sum(projection, factor))
        total += spread.finest().values
    return ProjectionField(domain, domain.K, algebra.support_projection(total))


def zeta(cu: CuculescuSequence) -> ProjectionField:
    """zeta = (join over k, Q of p_Q 1_{5Q})^perp"""
    first = cu.q[0]
    return dilated_join(cu.p, first.domain, first.n).complement()


def _hypothesis_residual(A: ProjectionField, dh: OperatorField, right: bool) -> np.ndarray:
    perp = A.complement().refine(dh.level).values
    product = dh.values @ perp if right else perp @ dh.values
    return algebra.op_norm(product.reshape(-1, dh.n, dh.n))


def pseudo_loc_support(dh: Dict[int, OperatorField], s: int, A: Dict[int, ProjectionField],
                       B: Dict[int, ProjectionField] = None) -> ProjectionField:
    """A_{h,s} = join over k of 5A_k, after checking A_k^perp dh_{k+s} = 0 (and dh_{k+s} B_k^perp = 0)"""
    if s < 1:
        raise InvalidInput(f"s must be >= 1, got {s}", 's')
    if not A:
        raise InvalidInput("No projections given", 'A')
    eps = config_manager.tolerance('exact_check')
    for k, projection in sorted(A.items()):
        difference = dh.get(k + s)
        if difference is None:
            continue
        if projection.level > k:
            raise InvalidInput(f"A_{k} is not constant on level-{k} cubes", 'A')
        scale = max(1.0, difference.max_abs())
        sides = [(projection, False)]
        if B is not None and k in B:
            sides.append((B[k], True))
        for proj, right in sides:
            residual = _hypothesis_residual(proj, difference, right)
            worst = int(np.argmax(residual))
            if residual[worst] > eps * scale:
                side = 'dh B^perp' if right else 'A^perp dh'
                raise PreconditionError(
                    f"{side} = {residual[worst]:.3e} at k={k}, cell {worst}",
                    f"k={k}, cell={worst}")
    first = next(iter(A.values()))
    return dilated_join(A, first.domain, first.n)


def maximal_projection(f: OperatorField, lam: float,
                       level_range: Optional[LevelRange] = None,
                       bundle: CZBundle = None) -> Tuple[ProjectionField, Dict]:
    """q = e_1 meet e_2 meet e_3 with sup_k ||q M_k f q|| <= 3 lambda

    e_1 is Cuculescu's q; e_2 and e_3 cut the column square function of
    zeta T_k f and the row square function of (1 - zeta) T_k f at lambda.
    """
    domain = f.domain
    if level_range is None:
        level_range = LevelRange(0, grid.resolution_limit(domain))
    level_range.check_within(grid.resolution_limit(domain))
    bundle = bundle if bundle is not None else cz_decompose(f, lam)
    e1 = bundle.q.values
    zeta_field = bundle.zeta
    outside = zeta_field.complement()
    seq = [tk(f, k) for k in level_range]
    g = [zeta_field @ item for item in seq]
    h = [outside @ item for item in seq]
    col = norms.square_function(g, norms.COL).values
    row = norms.square_function(h, norms.ROW).values
    eye = np.broadcast_to(np.eye(f.n), e1.shape)
    e2 = eye - algebra.spectral_proj_gt(col, lam)
    e3 = eye - algebra.spectral_proj_gt(row, lam)
    q_values = algebra.proj_meet([e1, e2, e3])
    q = ProjectionField(domain, domain.K, q_values)

    sup = 0.0
    for k in level_range:
        averaged = ball_avg(f, k).values
        sup = max(sup, float(algebra.op_norm((q_values @ averaged @ q_values)
                                             .reshape(-1, f.n, f.n)).max()))
    norm1 = norms.lp_norm(f, 1)
    masses = {name: norms.phi(OperatorField(domain, domain.K, eye - e))
              for name, e in (('e1', e1), ('e2', e2), ('e3', e3), ('q', q_values))}
    witness = norms.rc_weak_upper(seq, RcDecomposition(g, h))
    report = {
        'lambda': lam,
        'range': level_range.label(),
        'sup_qMq': sup,
        'sup_ratio': sup / lam,
        'mass_ratio': lam * masses['q'] / norm1 if norm1 else 0.0,
        'masses': masses,
        'witness_rc_weak': witness,
        'witness_ratio': witness / norm1 if norm1 else 0.0,
    }
    return q, report
