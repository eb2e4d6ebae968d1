"""
Primary verification checkers: almost orthogonality, weak type (1,1),
BMO, strong (p,p) and the ball-difference square function.

Each checker takes plain fields and parameters and returns one CheckReport;
the registry in `checks` feeds them corpus instances.
"""

import logging
from functools import lru_cache
from typing import Callable, Dict, Mapping, Optional, Sequence

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from czlab.config import config_manager
from czlab.exceptions import InvalidInput
from czlab.models.field import OperatorField
from czlab.models.geometry import DyadicCube, DyadicDomain
from czlab.models.report import CheckReport
from czlab.models.sequences import LevelRange, sign_matrix
from czlab.models.spectral import RcDecomposition
from czlab.services import algebra, czd, grid, norms
from czlab.services.operators import apply_stack, field_sum, mart_diff, rk, tk, tk_prime

logger = logging.getLogger(__name__)


def default_signs(level_range: LevelRange, seed: int = 0) -> np.ndarray:
    limit = config_manager.get_app_config('EXHAUSTIVE_OMEGA_LIMIT')
    samples = None if len(level_range) <= limit else config_manager.get_app_config('OMEGA_SAMPLES')
    return sign_matrix(len(level_range), samples, seed, limit)[0]


def _instance(instance: Optional[Dict], f: OperatorField, level_range: LevelRange = None, **extra):
    data = dict(instance or {})
    data.update({'d': f.d, 'K': f.domain.K, 'n': f.n})
    if level_range is not None:
        data['range'] = level_range.label()
    data.update(extra)
    return data


# Almost orthogonality

def fit_sigma_constant(S: Callable, u: Mapping[int, OperatorField], v: Mapping[int, OperatorField],
                       levels: Sequence[int], profile: Callable[[int], float]) -> float:
    """Smallest C with ||S_k u_n||_2 <= C profile(n - k) ||v_n||_2 on every pair"""
    best = 0.0
    for n, piece in u.items():
        size = norms.lp_norm(v[n], 2)
        for k in levels:
            weight = profile(n - k) * size
            if weight > 0:
                best = max(best, norms.lp_norm(S(piece, k), 2) / weight)
    return best


def check_almost_orthogonality(S: Callable, u: Mapping[int, OperatorField],
                               v: Mapping[int, OperatorField], sigma: Callable[[int], float],
                               levels: Sequence[int], h: OperatorField = None,
                               check_id: str = 'almost_orthogonality',
                               instance: Dict = None) -> CheckReport:
    """Hypothesis ||S_k u_n|| <= sigma(n-k) ||v_n|| on every pair, then
    sum_k ||S_k h||^2 <= w^2 sum_n ||v_n||^2 with w = sum_j sigma(j)
    """
    if not u:
        raise InvalidInput("Empty decomposition", 'u')
    if set(u) != set(v):
        raise InvalidInput("u and v are indexed differently", 'v')
    tol = config_manager.tolerance('exact_check')
    total = field_sum(list(u.values()))
    if h is None:
        h = total
    else:
        scale = max(1.0, h.max_abs())
        if (total - h).max_abs() > config_manager.tolerance('identity') * scale:
            raise InvalidInput("h differs from the sum of the u_n", 'u')
    v_norms = {n: norms.lp_norm(field, 2) for n, field in v.items()}
    scale = max(v_norms.values()) or 1.0
    worst = 0.0
    violations = 0
    for n, piece in u.items():
        for k in levels:
            lhs = norms.lp_norm(S(piece, k), 2)
            rhs = sigma(n - k) * v_norms[n]
            if lhs > rhs * (1.0 + tol) + tol * scale:
                violations += 1
            if rhs > 0:
                worst = max(worst, lhs / rhs)
    differences = range(min(u) - max(levels), max(u) - min(levels) + 1)
    w = sum(sigma(j) for j in differences)
    lhs = sum(norms.lp_norm(S(h, k), 2) ** 2 for k in levels)
    rhs = w ** 2 * sum(x ** 2 for x in v_norms.values())
    conclusion = lhs <= rhs * (1.0 + tol) + tol * scale ** 2
    report = CheckReport(
        check_id, instance or {}, lhs, rhs, violations == 0 and conclusion, tol,
        ratio=lhs / rhs if rhs > 0 else None,
        details={'hypothesis_violations': violations, 'hypothesis_worst_ratio': worst,
                 'w': w, 'conclusion_holds': conclusion})
    return report


# Weak type (1,1)

def check_weak11(f: OperatorField, lam_grid: Sequence[float], level_range: LevelRange,
                 signs: np.ndarray = None, instance: Dict = None,
                 bundle_for: Callable = None) -> CheckReport:
    """sup over the grid of lam phi~(|Tf| > lam) / ||f||_1, with the CZ splitting checked

    Non-positive f is split into positive parts first; with m pieces in all
    phi~(|Tf| > lam) <= sum_i phi~(|T h_i| > lam / m) is checked at every lam.
    """
    levels = level_range.levels()
    signs = default_signs(level_range) if signs is None else signs
    bundle_for = bundle_for or czd.cz_decompose
    vol = f.domain.cell_volume
    tol = config_manager.tolerance('exact_check')
    norm1 = norms.lp_norm(f, 1)
    if norm1 == 0:
        return CheckReport.empirical('weak11', _instance(instance, f, level_range), 0.0,
                                     config_manager.empirical_cap('weak11'))
    dist_f = norms.omega_distribution(apply_stack(tk, f, levels), signs, vol)
    try:
        czd.check_positive(f)
        parts = [('plus', f)]
    except InvalidInput:
        plus, minus = czd.split_positive(f)
        parts = [(name, part) for name, part in (('plus', plus), ('minus', minus))
                 if part.max_abs() > 0]
    per_lambda = []
    holds = True
    for lam in lam_grid:
        pieces = []
        zeta_terms = {}
        for name, part in parts:
            bundle = bundle_for(part, lam)
            zeta = bundle.zeta.flat()
            zeta_terms[f'{name}:1-zeta'] = lam * norms.phi(bundle.zeta.complement()) / norm1
            for piece_name, piece in bundle.parts().items():
                stack = apply_stack(tk, piece, levels)
                pieces.append(norms.omega_distribution(stack, signs, vol))
                inner = norms.omega_distribution(stack, signs, vol, left=zeta)
                zeta_terms[f'{name}:{piece_name}'] = lam * inner.measure_above(lam / 16) / norm1
        m = len(pieces)
        lhs = dist_f.measure_above(lam * (1.0 + tol))
        rhs = sum(piece.measure_above(lam / m * (1.0 - tol)) for piece in pieces)
        holds = holds and lhs <= rhs + tol * vol
        per_lambda.append({'lambda': lam, 'constant': lam * lhs / norm1,
                           'split_bound': lam * rhs / norm1, 'pieces': m, 'zeta': zeta_terms})
    measured = max(entry['constant'] for entry in per_lambda) if per_lambda else 0.0
    cap = config_manager.empirical_cap('weak11')
    details = {'per_lambda': per_lambda, 'distribution_split_holds': holds,
               'weak_constant': dist_f.weak_norm() / norm1, 'norm1': norm1,
               'omega_patterns': int(signs.shape[0])}
    return CheckReport.empirical('weak11', _instance(instance, f, level_range), measured, cap,
                                 details=details).require(holds)


# BMO

def _cube_cells(domain, cube) -> np.ndarray:
    mask = np.zeros(domain.shape(), dtype=bool)
    mask[cube.cell_slices(domain.K)] = True
    return np.flatnonzero(mask)


def _centre_cell(domain, cube) -> int:
    L = cube.side_cells(domain.K)
    return domain.index(tuple(c * L + L // 2 for c in cube.coords))


def sample_cubes(domain, per_level: int, rng: np.random.Generator, levels: Sequence[int]):
    """Up to per_level distinct cubes of each level"""
    chosen = []
    for level in levels:
        count = 2 ** (level * domain.d)
        picks = rng.choice(count, size=min(per_level, count), replace=False)
        for pick in sorted(int(p) for p in picks):
            coords = tuple(int(c) for c in np.unravel_index(pick, domain.shape(level)))
            chosen.append(DyadicCube(level, coords))
    return chosen


def check_bmo(f: OperatorField, level_range: LevelRange, instance: Dict = None,
              seed: int = 0, cubes_per_level: int = 2) -> CheckReport:
    """BMO of (T_k f) in all frames and sides against ||f||_inf, plus the local geometry

    For sampled Q with f_2 = f 1_{(3Q)^c} and F_{k,Q}(x) = T_k f_2(x) - T_k f_2(c_Q):
    F_{k,Q} = 0 on Q when 2^-k < l(Q), and ||F_{k,Q}(x)|| <= C 2^k l(Q) ||f||_inf otherwise.
    """
    domain = f.domain
    levels = level_range.levels()
    tol = config_manager.tolerance('exact_check')
    sup = norms.lp_norm(f, np.inf)
    inst = _instance(instance, f, level_range)
    cap = config_manager.empirical_cap('bmo')
    if sup == 0:
        return CheckReport.empirical('bmo', inst, 0.0, cap)
    seq = [tk(f, k) for k in levels]
    combos = norms.bmo_all(seq)
    measured = max(combos.values()) / sup

    rng = np.random.default_rng([seed, 4])
    fine = f.finest()
    flat_seq = np.stack([item.finest().flat() for item in seq])
    geometry_constant = 0.0
    vanishing = 0.0
    alpha_ok = True
    for cube in sample_cubes(domain, cubes_per_level, rng, range(1, domain.K + 1)):
        keep = np.ones(domain.shape(), dtype=bool)
        keep.flat[grid.dilate(domain, cube, 3)] = False
        f2 = fine.with_values(fine.values * keep[(...,) + (None, None)])
        cells = _cube_cells(domain, cube)
        centre = _centre_cell(domain, cube)
        alphas = np.zeros((len(levels), f.n, f.n), dtype=np.complex128)
        for i, k in enumerate(levels):
            local = tk(f2, k).flat()
            F = local[cells] - local[centre]
            size = float(algebra.op_norm(F).max()) if F.size else 0.0
            if k > cube.level:
                vanishing = max(vanishing, float(np.abs(local[cells]).max()) / sup)
            else:
                geometry_constant = max(geometry_constant,
                                        size / (2.0 ** (k - cube.level) * sup))
                alphas[i] = local[centre]
        values = flat_seq[:, cells]
        for side in norms.SIDES:
            for frame in norms.FRAMES:
                mean_based = norms.oscillation(values, values.mean(axis=1), side, frame)
                alpha_based = norms.oscillation(values, alphas, side, frame)
                if mean_based > alpha_based * (1.0 + tol) + tol * sup:
                    alpha_ok = False
    geometry_cap = 2.0 * domain.d
    details = {'combinations': {key: value / sup for key, value in combos.items()},
               'vanishing_residual': vanishing, 'geometry_constant': geometry_constant,
               'geometry_cap': geometry_cap, 'alpha_within_mean': alpha_ok, 'norm_inf': sup}
    local_ok = vanishing <= tol and geometry_constant <= geometry_cap and alpha_ok
    return CheckReport.empirical('bmo', inst, measured, cap, details=details).require(local_ok)


# Strong (p,p)

def check_strong_pp(f: OperatorField, p_list: Sequence[float], level_range: LevelRange,
                    instance: Dict = None, lam: float = None,
                    bundle_for: Callable = None) -> CheckReport:
    """||(T_k f)||_{L_p(rc)} / ||f||_p per p

    For p >= 2 this is the larger of the row and column norms; for p < 2 the
    column norm of zeta T_k f plus the row norm of (1 - zeta) T_k f, with
    zeta from the decomposition of |f|.
    """
    levels = level_range.levels()
    inst = _instance(instance, f, level_range)
    cap = config_manager.empirical_cap('strong_pp')
    seq = [tk(f, k) for k in levels]
    ratios = {}
    witness = None
    for p in p_list:
        if not 1 < p < np.inf:
            raise InvalidInput(f"p must lie in (1, inf), got {p}", 'p_list')
        norm_p = norms.lp_norm(f, p)
        if norm_p == 0:
            ratios[str(p)] = 0.0
            continue
        if p >= 2:
            value = max(norms.sq_norm(seq, p, norms.ROW), norms.sq_norm(seq, p, norms.COL))
        else:
            if witness is None:
                witness = _zeta_witness(f, seq, lam, bundle_for)
            value = norms.rc_lp_upper(seq, witness, p)
        ratios[str(p)] = value / norm_p
    measured = max(ratios.values()) if ratios else 0.0
    return CheckReport.empirical('strong_pp', inst, measured, cap, details={'ratios': ratios})


def _zeta_witness(f: OperatorField, seq, lam: float = None, bundle_for: Callable = None):
    modulus = OperatorField(f.domain, f.level, algebra.modulus(f.values))
    floor = czd.admissibility_floor(modulus)
    lam = lam if lam is not None else 2.0 * floor if floor > 0 else 1.0
    bundle = (bundle_for or czd.cz_decompose)(modulus, lam)
    inside = bundle.zeta
    outside = inside.complement()
    return RcDecomposition([inside @ item for item in seq], [outside @ item for item in seq])


# Ball-difference square function

def check_corollary1(f: OperatorField, level_range: LevelRange, signs: np.ndarray = None,
                     instance: Dict = None, quantiles: int = 16) -> CheckReport:
    """Weak constant of (R_k f) with R_k f = T_k f + df_k - (M_{k-1} - E_{k-1}) f checked exactly"""
    k_lo = max(1, level_range.k_lo)
    if k_lo > level_range.k_hi:
        raise InvalidInput("R_k needs a range reaching k >= 1", 'range')
    rrange = LevelRange(k_lo, level_range.k_hi)
    levels = rrange.levels()
    signs = default_signs(rrange) if signs is None else signs
    inst = _instance(instance, f, rrange)
    cap = config_manager.empirical_cap('ball_differences')
    tol = config_manager.tolerance('exact_check')
    vol = f.domain.cell_volume
    stacks = {
        'R': apply_stack(rk, f, levels),
        'T': apply_stack(tk, f, levels),
        'df': apply_stack(mart_diff, f, levels),
        'T_prev': apply_stack(tk_prime, f, levels),
    }
    scale = max(1.0, float(np.abs(stacks['R']).max()))
    identity = float(np.abs(stacks['R'] - (stacks['T'] + stacks['df'] - stacks['T_prev'])).max())
    norm1 = norms.lp_norm(f, 1)
    if norm1 == 0:
        return CheckReport.empirical('ball_differences', inst, 0.0, cap)
    dists = {name: norms.omega_distribution(stack, signs, vol) for name, stack in stacks.items()}
    holds = True
    breakpoints = dists['R'].breakpoints
    if breakpoints.size:
        picks = np.unique(np.quantile(breakpoints, np.linspace(0.0, 1.0, quantiles)))
        for lam in picks:
            lhs = dists['R'].measure_above(lam * (1.0 + tol))
            rhs = sum(dists[name].measure_above(lam / 3 * (1.0 - tol)) for name in ('T', 'df', 'T_prev'))
            holds = holds and lhs <= rhs + tol * vol
    constants = {name: dist.weak_norm() / norm1 for name, dist in dists.items()}
    details = {'identity_residual': identity / scale, 'constants': constants,
               'distribution_split_holds': holds}
    exact = holds and identity <= config_manager.tolerance('identity') * scale
    return CheckReport.empirical('ball_differences', inst, constants['R'], cap,
                                 details=details).require(exact)


# Square function on L_2

@lru_cache(maxsize=None)
def square_function_constant(domain: DyadicDomain, level_range: LevelRange) -> float:
    """C_d = ||sum_k T_k^2||, the best constant in sum_k ||T_k f||_2^2 <= C_d ||f||_2^2

    T_k acts entrywise and is self-adjoint, so the scalar operator norm is
    also the norm on matrix-valued fields.
    """
    levels = level_range.levels()
    size = domain.cell_count

    def apply(vector: np.ndarray) -> np.ndarray:
        values = np.asarray(vector, dtype=float).reshape(domain.shape() + (1, 1))
        field = OperatorField(domain, domain.K, values.astype(np.complex128))
        total = sum(tk(tk(field, k), k).values for k in levels)
        return np.real(total).ravel()

    operator = LinearOperator((size, size), matvec=apply, dtype=float)
    start = np.random.default_rng(0).standard_normal(size)
    top = eigsh(operator, k=1, which='LA', v0=start, return_eigenvectors=False, tol=1e-10)
    logger.debug("C_d at K=%d over %s: %.6f", domain.K, level_range.label(), float(top[0]))
    return float(top[0])
