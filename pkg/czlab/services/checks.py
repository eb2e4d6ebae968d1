"""
Check registry: every verified statement is one check id, run on each
corpus instance, once per run, or as an aggregate over other reports.
"""

import hashlib
import logging
import math
import threading
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from czlab.config import config_manager
from czlab.config.run_config import RunConfig
from czlab.exceptions import InvalidInput
from czlab.models.bundle import CZBundle
from czlab.models.field import OperatorField
from czlab.models.geometry import DyadicCube, DyadicDomain
from czlab.models.report import AGGREGATE, CheckReport, DecaySweep
from czlab.models.sequences import LevelRange, sign_matrix
from czlab.services import algebra, corpus, czd, grid, norms, verify
from czlab.services.oracle import ScalarOracle
from czlab.services.operators import (apply_stack, ball_avg, cond_exp, mart_diff, mkn,
                                      signed_sums, tk, rk)

logger = logging.getLogger(__name__)

INSTANCE = 'instance'
RUN = 'run'
AGGREGATE_SCOPE = 'aggregate'


@dataclass(frozen=True)
class CheckSpec:
    check_id: str
    claim: str
    scope: str
    func: Callable
    acceptance: bool = True
    families: Tuple[str, ...] = ()

    def applies_to(self, instance: corpus.CorpusInstance) -> bool:
        return not self.families or instance.family in self.families


REGISTRY: Dict[str, CheckSpec] = {}


def register(check_id: str, claim: str, scope: str = INSTANCE, acceptance: bool = True,
             families: Sequence[str] = ()):
    """Decorator adding a check function to the registry under check_id"""
    def decorator(func):
        if check_id in REGISTRY:
            raise ValueError(f"Check {check_id} registered twice")
        REGISTRY[check_id] = CheckSpec(check_id, claim, scope, func, acceptance, tuple(families))
        return func
    return decorator


def claims() -> Dict[str, str]:
    """Verified statement -> check id"""
    return {spec.claim: spec.check_id for spec in REGISTRY.values()}


def known_checks() -> Tuple[str, ...]:
    return tuple(REGISTRY)


class CheckContext:
    """Everything a check needs for one run, with the decompositions cached"""

    def __init__(self, config: RunConfig, instances: List[corpus.CorpusInstance] = None):
        self.config = config
        self.domain = DyadicDomain(config.d, config.K, config.boundary_mode)
        guard = config_manager.get_app_config('RESOLUTION_GUARD')
        self.level_range = LevelRange(*config.resolved_range(guard))
        self.signs, self.provenance = sign_matrix(
            len(self.level_range), config.omega_samples, config.seed,
            config_manager.get_app_config('EXHAUSTIVE_OMEGA_LIMIT'))
        if instances is None:
            instances = corpus.gen_corpus(self.domain, config.n, config.corpus, config.seed)
        self.corpus = instances
        self._bundles: Dict = {}
        self._lock = threading.Lock()

    def parts(self, f: OperatorField) -> List[Tuple[str, OperatorField]]:
        """f itself when positive, else its nonzero positive parts"""
        try:
            czd.check_positive(f)
            return [('plus', f)]
        except InvalidInput:
            plus, minus = czd.split_positive(f)
            return [(name, part) for name, part in (('plus', plus), ('minus', minus))
                    if part.max_abs() > 0]

    def lambdas(self, f: OperatorField) -> List[float]:
        """The lambda grid of an instance; relative entries scale ||E_0 f||"""
        if self.config.lambda_mode == 'absolute':
            return list(self.config.lambda_grid)
        floor = max(czd.admissibility_floor(part) for _, part in self.parts(f))
        base = floor if floor > 0 else 1.0
        return [multiple * base for multiple in self.config.lambda_grid]

    @staticmethod
    def _key(f: OperatorField, lam: float):
        return hashlib.sha1(np.ascontiguousarray(f.values).tobytes()).hexdigest(), f.level, float(lam)

    def remember(self, bundle: CZBundle):
        """Serve a stored decomposition instead of recomputing it"""
        with self._lock:
            self._bundles[self._key(bundle.f, bundle.lam)] = bundle

    def bundle(self, f: OperatorField, lam: float) -> CZBundle:
        key = self._key(f, lam)
        with self._lock:
            cached = self._bundles.get(key)
        if cached is not None:
            return cached
        bundle = czd.cz_decompose(f, lam)
        with self._lock:
            self._bundles.setdefault(key, bundle)
        return bundle

    def decompositions(self, f: OperatorField):
        """(part name, part, lambda, bundle) over the parts and the lambda grid"""
        for lam in self.lambdas(f):
            for name, part in self.parts(f):
                yield name, part, lam, self.bundle(part, lam)

    def describe(self, instance: corpus.CorpusInstance, **extra) -> Dict:
        data = instance.descriptor()
        data.update({'d': self.domain.d, 'K': self.domain.K, 'n': self.config.n,
                     'boundary_mode': self.domain.boundary_mode,
                     'range': self.level_range.label(), 'omega': self.provenance})
        data.update(extra)
        return data


def _scale(f: OperatorField) -> float:
    return max(1.0, f.max_abs())


# Cuculescu and the decomposition

@register('cuculescu_properties', 'Cuculescu projections: commutation, corner bound, mass bound')
def cuculescu_properties(ctx: CheckContext, instance) -> List[CheckReport]:
    reports = []
    identity_tol = config_manager.tolerance('identity')
    for name, part, lam, bundle in ctx.decompositions(instance.field):
        cu = bundle.cuculescu
        eye = np.eye(part.n)
        commutation = corner = 0.0
        for k in cu.levels():
            q_prev = cu.q[k - 1].finest().values
            q_k = cu.q[k].finest().values
            fk = cond_exp(part, k).finest().values
            compressed = q_prev @ fk @ q_prev
            commutation = max(commutation, float(algebra.commutator_norm(q_k, compressed).max()))
            corner = max(corner, float(algebra.op_norm(q_k @ fk @ q_k).max()) / lam)
        partition = bundle.q.finest().values + sum(cu.p[k].finest().values for k in cu.levels())
        partition_residual = float(np.abs(partition - eye).max())
        monotone = max(float(np.abs(cu.q[k].finest().values @ cu.q[k - 1].finest().values
                                    - cu.q[k].finest().values).max()) for k in cu.levels())
        norm1 = norms.lp_norm(part, 1)
        mass = lam * norms.phi(bundle.q.complement())
        scale = _scale(part)
        report = CheckReport.exact(
            'cuculescu_properties', ctx.describe(instance, part=name, lam=lam), mass, norm1,
            config_manager.tolerance('exact_check'),
            details={'commutation': commutation, 'corner_ratio': corner,
                     'partition_residual': partition_residual, 'monotone_residual': monotone})
        reports.append(report.require(
            commutation <= config_manager.tolerance('commutation') * scale
            and corner <= 1.0 + config_manager.tolerance('eps_eig') * max(1.0, scale / lam)
            and partition_residual <= identity_tol and monotone <= identity_tol))
    return reports


@register('cz_reconstruction', 'Decomposition reconstructs f; large lambda leaves f good')
def cz_reconstruction(ctx: CheckContext, instance) -> List[CheckReport]:
    reports = []
    threshold = config_manager.tolerance('identity')
    for name, part, lam, bundle in ctx.decompositions(instance.field):
        residual = (bundle.reconstruction() - part).max_abs() / _scale(part)
        reports.append(CheckReport.residual(
            'cz_reconstruction', ctx.describe(instance, part=name, lam=lam), residual, threshold,
            details={'active_levels': list(bundle.cuculescu.active_levels())}))
    for name, part in ctx.parts(instance.field):
        lam = 2.0 * max(norms.lp_norm(part, np.inf), 1e-300)
        bundle = czd.cz_decompose(part, lam)
        residual = (bundle.g_d - part).max_abs() / _scale(part)
        reports.append(CheckReport.residual(
            'cz_reconstruction', ctx.describe(instance, part=name, lam=lam, regime='large_lambda'),
            residual, threshold, details={'active_levels': list(bundle.cuculescu.active_levels())}))
    return reports


@register('diagonal_estimates', 'Diagonal parts: ||g_d||_2^2 <= 2^d lam ||f||_1, ||b_d||_1 <= 2 ||f||_1')
def diagonal_estimates(ctx: CheckContext, instance) -> List[CheckReport]:
    reports = []
    d = ctx.domain.d
    for name, part, lam, bundle in ctx.decompositions(instance.field):
        norm1 = norms.lp_norm(part, 1)
        good = norms.lp_norm(bundle.g_d, 2) ** 2 / (2 ** d * lam * norm1)
        bad = norms.lp_norm(bundle.b_d, 1) / (2.0 * norm1)
        sup = norms.lp_norm(bundle.g_d, np.inf) / (2 ** d * lam)
        measured = max(good, bad, sup)
        reports.append(CheckReport.exact(
            'diagonal_estimates', ctx.describe(instance, part=name, lam=lam), measured, 1.0,
            config_manager.tolerance('exact_check'),
            details={'good_l2_ratio': good, 'bad_l1_ratio': bad, 'good_sup_ratio': sup}))
    return reports


@register('off_diagonal_reorganization',
          'Good off-diagonal part: g_off = sum_s (g^l_s + g^r_s) with Delta_{k+s} g^l_{s,k} = g^l_{s,k}')
def off_diagonal_reorganization(ctx: CheckContext, instance) -> List[CheckReport]:
    reports = []
    threshold = config_manager.tolerance('identity')
    cap = config_manager.empirical_cap('off_diagonal_reorganization')
    for name, part, lam, bundle in ctx.decompositions(instance.field):
        scale = _scale(part)
        difference = 0.0
        for (s, k), piece in bundle.g_left.items():
            difference = max(difference, (mart_diff(piece, k + s) - piece).max_abs() / scale)
            mirrored = bundle.g_right[(s, k)]
            difference = max(difference, (mart_diff(mirrored, k + s) - mirrored).max_abs() / scale)
        total = bundle.g_off - bundle.g_off
        sizes = {}
        for s in bundle.offsets():
            left = bundle.g_left_sum(s)
            total = total + left + bundle.g_right_sum(s)
            sizes[s] = norms.lp_norm(left, 2) ** 2
        reorganized = (total - bundle.g_off).max_abs() / scale
        support = 0.0
        for s in bundle.offsets():
            dh = {k + s: piece for (t, k), piece in bundle.g_left.items() if t == s}
            joined = czd.pseudo_loc_support(dh, s, bundle.cuculescu.p)
            support = max(support, (joined - bundle.zeta.complement()).max_abs())
        norm1 = norms.lp_norm(part, 1)
        size = max(sizes.values(), default=0.0) / (lam * norm1)
        total_size = norms.lp_norm(bundle.g_off, 2) ** 2 / (lam * norm1)
        report = CheckReport.empirical(
            'off_diagonal_reorganization', ctx.describe(instance, part=name, lam=lam),
            max(size, total_size), cap,
            details={'difference_residual': difference, 'reorganization_residual': reorganized,
                     'support_residual': support, 'sup_s_ratio': size, 'g_off_ratio': total_size})
        reports.append(report.require(max(difference, reorganized, support) <= threshold))
    return reports


@register('zeta_projection', 'zeta: lam phi(1 - zeta) <= 5^d ||f||_1 and zeta p_Q = 0 on 5Q')
def zeta_projection(ctx: CheckContext, instance) -> List[CheckReport]:
    reports = []
    domain = ctx.domain
    exhaustive = domain.K <= 6
    rng = np.random.default_rng([ctx.config.seed, 3])
    for name, part, lam, bundle in ctx.decompositions(instance.field):
        zeta = bundle.zeta.flat()
        vanishing = 0.0
        for k in bundle.cuculescu.active_levels():
            P = bundle.cuculescu.p[k].flat()
            active = np.flatnonzero(bundle.cuculescu.p[k].rank_field().ravel())
            if not exhaustive and active.size > 64:
                active = rng.choice(active, size=64, replace=False)
            for c in active:
                cube = DyadicCube(k, domain.coords(int(c), k))
                cells = grid.dilate(domain, cube, 5)
                vanishing = max(vanishing, float(algebra.op_norm(zeta[cells] @ P[c]).max()))
        mass = lam * norms.phi(bundle.zeta.complement())
        report = CheckReport.exact(
            'zeta_projection', ctx.describe(instance, part=name, lam=lam), mass,
            5 ** domain.d * norms.lp_norm(part, 1), config_manager.tolerance('exact_check'),
            details={'vanishing_residual': vanishing, 'exhaustive': exhaustive})
        reports.append(report.require(vanishing <= config_manager.tolerance('identity')))
    return reports


@register('bad_cancellation', 'Bad pieces: mean zero on Q_{i v j}; zeta(x) b_ij(y) zeta(x) = 0 for y in 5Q_{x, i ^ j}')
def bad_cancellation(ctx: CheckContext, instance) -> List[CheckReport]:
    reports = []
    domain = ctx.domain
    rng = np.random.default_rng([ctx.config.seed, 5])
    cells = np.arange(domain.cell_count)
    if domain.cell_count > 64:
        cells = np.sort(rng.choice(domain.cell_count, size=32, replace=False))
    for name, part, lam, bundle in ctx.decompositions(instance.field):
        scale = _scale(part)
        zeta = bundle.zeta.flat()
        pieces = {(k, k): piece for k, piece in bundle.b_diag.items()}
        pieces.update(bundle.b_pairs)
        mean = support = 0.0
        for (i, j), piece in pieces.items():
            if piece.max_abs() == 0:
                continue
            mean = max(mean, cond_exp(piece, max(i, j)).max_abs() / scale)
            values = piece.flat()
            for x in cells:
                near = grid.dilate(domain, grid.cube_of(domain, int(x), min(i, j)), 5)
                z = zeta[x]
                sandwiched = z[None] @ values[near] @ z[None]
                support = max(support, float(algebra.op_norm(sandwiched).max()) / scale)
        reports.append(CheckReport.residual(
            'bad_cancellation', ctx.describe(instance, part=name, lam=lam), max(mean, support),
            config_manager.tolerance('identity'),
            details={'mean_residual': mean, 'support_residual': support}))
    return reports


# Almost orthogonality and the bad parts

@register('almost_orthogonality', 'Almost orthogonality: sum_k ||S_k h||^2 <= w^2 sum_n ||v_n||^2')
def almost_orthogonality(ctx: CheckContext, instance) -> List[CheckReport]:
    f = instance.field
    K = ctx.domain.K
    diffs = {n: mart_diff(f, n) for n in range(1, K + 1)}

    def delta(h, k):
        return mart_diff(h, k)

    reports = [verify.check_almost_orthogonality(
        delta, diffs, diffs, lambda j: 1.0 if j == 0 else 0.0, range(1, K + 1), h=None,
        instance=ctx.describe(instance, variant='martingale'))]

    def profile(j):
        return 2.0 ** (-abs(j) / 2)

    levels = ctx.level_range.levels()
    C = verify.fit_sigma_constant(tk, diffs, diffs, levels, profile)
    report = verify.check_almost_orthogonality(
        tk, diffs, diffs, lambda j: C * profile(j), levels,
        instance=ctx.describe(instance, variant='single_difference'))
    reports.append(report.with_details(sigma_constant=C))
    return reports


@register('bad_diagonal_vanishing', 'zeta T_k b_n zeta = 0 for k >= n')
def bad_diagonal_vanishing(ctx: CheckContext, instance) -> List[CheckReport]:
    reports = []
    levels = ctx.level_range.levels()
    for name, part, lam, bundle in ctx.decompositions(instance.field):
        zeta = bundle.zeta
        residual = 0.0
        for n, piece in bundle.b_diag.items():
            scale = max(piece.max_abs(), 1e-300)
            for k in levels:
                if k >= n and piece.max_abs() > 0:
                    residual = max(residual, (zeta @ tk(piece, k) @ zeta).max_abs() / scale)
        reports.append(CheckReport.residual(
            'bad_diagonal_vanishing', ctx.describe(instance, part=name, lam=lam), residual,
            config_manager.tolerance('identity')))
    return reports


@register('bad_diagonal_orthogonality',
          'Bad diagonal part: ||zeta T_k b_n zeta|| <= C lam 2^-|n-k| ||p_n||_2 and the orthogonality bound')
def bad_diagonal_orthogonality(ctx: CheckContext, instance) -> List[CheckReport]:
    reports = []
    levels = ctx.level_range.levels()
    for name, part, lam, bundle in ctx.decompositions(instance.field):
        zeta = bundle.zeta

        def inner(h, k):
            return zeta @ tk(h, k) @ zeta

        def profile(j):
            return lam * 2.0 ** (-abs(j))

        u = dict(bundle.b_diag)
        v = {n: bundle.cuculescu.p[n] for n in u}
        C = verify.fit_sigma_constant(inner, u, v, levels, profile)
        report = verify.check_almost_orthogonality(
            inner, u, v, lambda j: C * profile(j), levels, h=bundle.b_d,
            check_id='bad_diagonal_orthogonality', instance=ctx.describe(instance, part=name, lam=lam))
        mean = max((cond_exp(piece, k).max_abs() / _scale(part)
                    for n, piece in u.items() for k in range(n + 1)), default=0.0)
        report = report.with_details(sigma_constant=C, mean_residual=mean)
        reports.append(report.require(mean <= config_manager.tolerance('identity')))
    return reports


@register('bad_offdiagonal_surface', 'Bad off-diagonal part: zeta T_k b_{n,s} zeta vanishes for k >= n, decays in s and n-k')
def bad_offdiagonal_surface(ctx: CheckContext, instance) -> List[CheckReport]:
    reports = []
    levels = ctx.level_range.levels()
    for name, part, lam, bundle in ctx.decompositions(instance.field):
        zeta = bundle.zeta
        residual = 0.0
        surface: Dict[Tuple[int, int], float] = {}
        for (n, s), piece in bundle.b_offdiag.items():
            size = norms.lp_norm(piece, 1)
            if size == 0:
                continue
            for k in levels:
                value = norms.lp_norm(zeta @ tk(piece, k) @ zeta, 1) / size
                if k >= n:
                    residual = max(residual, value)
                else:
                    key = (s, n - k)
                    surface[key] = max(surface.get(key, 0.0), value)
        sweeps = []
        for s in sorted({s for s, _ in surface}):
            samples = sorted((j, value) for (t, j), value in surface.items() if t == s)
            if len(samples) >= 4:
                sweeps.append(DecaySweep.fit('n-k', samples, label=f's={s}'))
        reports.append(CheckReport.residual(
            'bad_offdiagonal_surface', ctx.describe(instance, part=name, lam=lam), residual,
            config_manager.tolerance('identity'),
            details={'surface': {f'{s},{j}': value for (s, j), value in sorted(surface.items())}},
            sweeps=tuple(sweeps)))
    return reports


# Square-function estimates

@register('square_function_l2', 'sum_k ||T_k f||_2^2 <= C_d ||f||_2^2')
def square_function_l2(ctx: CheckContext, instance) -> List[CheckReport]:
    f = instance.field
    constant = verify.square_function_constant(ctx.domain, ctx.level_range)
    norm = norms.lp_norm(f, 2) ** 2
    total = sum(norms.lp_norm(tk(f, k), 2) ** 2 for k in ctx.level_range)
    report = CheckReport.exact(
        'square_function_l2', ctx.describe(instance), total, constant * norm,
        config_manager.tolerance('exact_check'),
        details={'C_d': constant, 'cap': config_manager.empirical_cap('square_function_l2')})
    return [report.require(constant <= config_manager.empirical_cap('square_function_l2'))]


@register('weak11', 'Weak type (1,1) of the square function')
def weak11(ctx: CheckContext, instance) -> List[CheckReport]:
    f = instance.field
    return [verify.check_weak11(f, ctx.lambdas(f), ctx.level_range, ctx.signs,
                                ctx.describe(instance), bundle_for=ctx.bundle)]


@register('bmo', 'L_inf to BMO of the square function, all sides and frames')
def bmo(ctx: CheckContext, instance) -> List[CheckReport]:
    return [verify.check_bmo(instance.field, ctx.level_range, ctx.describe(instance),
                             ctx.config.seed)]


@register('strong_pp', 'Strong type (p,p) of the square function')
def strong_pp(ctx: CheckContext, instance) -> List[CheckReport]:
    return [verify.check_strong_pp(instance.field, ctx.config.p_list, ctx.level_range,
                                   ctx.describe(instance), bundle_for=ctx.bundle)]


@register('ball_differences', 'Weak type (1,1) of the ball-difference square function')
def ball_differences(ctx: CheckContext, instance) -> List[CheckReport]:
    return [verify.check_corollary1(instance.field, ctx.level_range,
                                    instance=ctx.describe(instance))]


@register('maximal_projection', 'Maximal projection: sup_k ||q M_k f q|| <= 3 lam, lam phi(1-q) <= C ||f||_1')
def maximal_projection(ctx: CheckContext, instance) -> List[CheckReport]:
    reports = []
    factor = config_manager.get_app_config('MAXIMAL_SUP_FACTOR')
    cap = config_manager.empirical_cap('maximal_projection')
    name, part = ctx.parts(instance.field)[0]
    for lam in ctx.lambdas(instance.field):
        _, summary = czd.maximal_projection(part, lam, ctx.level_range, ctx.bundle(part, lam))
        report = CheckReport.exact(
            'maximal_projection', ctx.describe(instance, part=name, lam=lam), summary['sup_qMq'],
            factor * lam, config_manager.tolerance('exact_check'), details=summary)
        reports.append(report.require(summary['mass_ratio'] <= cap))
    return reports


# Sweeps over the whole run

def _first_per_family(ctx: CheckContext) -> Dict[str, corpus.CorpusInstance]:
    chosen = {}
    for instance in ctx.corpus:
        chosen.setdefault(instance.family, instance)
    return chosen


@register('boundary_scaling', '|I(B_k + x, n)| <= C 2^-n 2^-k(d-1)', scope=RUN)
def boundary_scaling(ctx: CheckContext) -> List[CheckReport]:
    domain = ctx.domain
    rng = np.random.default_rng([ctx.config.seed, 11])
    cells = rng.choice(domain.cell_count, size=min(16, domain.cell_count), replace=False)
    worst = 0.0
    adjacent = 0.0
    # k = 0 balls wrap around the torus
    for k in range(1, grid.resolution_limit(domain) + 1):
        for n in range(k + 1, domain.K + 1):
            scale = 2.0 ** (-n) * 2.0 ** (-k * (domain.d - 1))
            for x in cells:
                ratio = grid.boundary_measure(domain, int(x), k, n) / scale
                worst = max(worst, ratio)
                if n == k + 1:
                    adjacent = max(adjacent, ratio)
    report = CheckReport.empirical(
        'boundary_scaling', {'d': domain.d, 'K': domain.K, 'boundary_mode': domain.boundary_mode},
        worst, config_manager.empirical_cap('boundary_scaling'),
        details={'adjacent_level_ratio': adjacent, 'cells_sampled': len(cells)})
    return [report.require(domain.d != 1 or adjacent <= 2.0 * (1.0 + 1e-12))]


@register('boundary_operator_decay', '||M_{k,n} h||_2 <= C 2^(k-n) ||h||_2', scope=RUN)
def boundary_operator_decay(ctx: CheckContext) -> List[CheckReport]:
    """Sweep n - k = 1..6 at k = 2 with h = E_n f taken from each family"""
    domain = ctx.domain
    k = min(2, grid.resolution_limit(domain))
    top = min(k + 6, domain.K)
    if top - k < 4:
        raise InvalidInput(f"Depth K={domain.K} is too shallow for the M_kn sweep", 'K')
    sweeps = []
    constants = {}
    for family, instance in _first_per_family(ctx).items():
        samples = []
        for n in range(k + 1, top + 1):
            probe = cond_exp(instance.field, n).finest()
            size = norms.lp_norm(probe, 2)
            if size == 0:
                logger.debug("boundary_operator_decay: E_%d f of %s vanishes, skipped", n, family)
                continue
            samples.append((n - k, norms.lp_norm(mkn(probe, k, n), 2) / size))
        if len(samples) < 4:
            logger.debug("boundary_operator_decay: %s has %d usable levels, no sweep", family, len(samples))
            continue
        sweeps.append(DecaySweep.fit('n-k', samples, label=family))
        constants[family] = max(ratio * 2.0 ** j for j, ratio in samples)
    if not sweeps:
        raise InvalidInput("No family produced a usable M_kn sweep", 'corpus')
    return [CheckReport.decay(
        'boundary_operator_decay', {'d': domain.d, 'K': domain.K, 'k': k},
        sweeps, config_manager.decay_window('boundary_operator_decay'),
        details={'schur_constants': constants})]


@register('single_difference_decay', '||T_k df_n||_2 <= C 2^(-|n-k|/2) ||df_n||_2', scope=RUN)
def single_difference_decay(ctx: CheckContext) -> List[CheckReport]:
    domain = ctx.domain
    levels = [k for k in ctx.level_range.levels() if k >= min(2, ctx.level_range.k_hi)]
    sweeps = []
    for family, instance in _first_per_family(ctx).items():
        f = instance.field
        coarse: Dict[int, float] = {}
        fine: Dict[int, float] = {}
        for n in range(1, domain.K + 1):
            diff = mart_diff(f, n)
            size = norms.lp_norm(diff, 2)
            if size == 0:
                logger.debug("single_difference_decay: df_%d of %s vanishes, skipped", n, family)
                continue
            for k in levels:
                ratio = norms.lp_norm(tk(diff, k), 2) / size
                table = coarse if k >= n else fine
                table[abs(n - k)] = max(table.get(abs(n - k), 0.0), ratio)
        for regime, table in (('k>=n', coarse), ('k<n', fine)):
            if len(table) >= 4:
                sweeps.append(DecaySweep.fit('|n-k|', sorted(table.items()),
                                             label=f'{family} {regime}'))
    if not sweeps:
        raise InvalidInput("No family produced a usable single-difference sweep", 'corpus')
    return [CheckReport.decay(
        'single_difference_decay', {'d': domain.d, 'K': domain.K,
                                    'range': ctx.level_range.label()},
        sweeps, config_manager.decay_window('single_difference_decay'))]


# Offsets s = 1..6 need K = 10; in the plane the cell guard caps K at 8
PSEUDO_LOCALIZATION_OFFSETS = 6


def pseudo_localization_domain(d: int, boundary_mode: str) -> Tuple[DyadicDomain, int, int]:
    """Sweep geometry: (domain, top offset s, level k0 of the single projection)"""
    K = 10 if d == 1 else 8
    top = min(PSEUDO_LOCALIZATION_OFFSETS, K - 4)
    return DyadicDomain(d, K, boundary_mode), top, K - top


@register('pseudo_localization', 'Pseudo-localization: ||A^perp T h|| decays like 2^-s', scope=RUN)
def pseudo_localization(ctx: CheckContext) -> List[CheckReport]:
    """h = A D A with A one rank-1 cube projection at level k0 and D a level-(k0+s) difference

    Measures sqrt(sum_k ||A_{h,s}^perp T_k h||_2^2) / ||h||_2 for s = 1..top and
    checks A_{h,s}^perp T_k dh_n = 0 for k >= n - s.
    """
    domain, top, k0 = pseudo_localization_domain(ctx.domain.d, ctx.domain.boundary_mode)
    levels = range(grid.resolution_limit(domain) + 1)
    draws = 3
    samples = []
    vanishing = 0.0
    for s in range(1, top + 1):
        energy = 0.0
        for draw in range(draws):
            rng = np.random.default_rng([ctx.config.seed, 7, s, draw])
            h, dh, A = corpus.adversarial(domain, ctx.config.n, rng, s, levels=(k0,))
            outside = czd.pseudo_loc_support(dh, s, A).complement()
            size = norms.lp_norm(h, 2)
            total = 0.0
            for k in levels:
                term = outside @ tk(h, k)
                if k >= k0:
                    vanishing = max(vanishing, term.max_abs() / max(h.max_abs(), 1e-300))
                else:
                    total += norms.lp_norm(term, 2) ** 2
            energy += total / size ** 2
        samples.append((s, math.sqrt(energy / draws)))
    sweep = DecaySweep.fit('s', samples, label=f'k0={k0}')
    report = CheckReport.decay(
        'pseudo_localization', {'d': domain.d, 'K': domain.K, 'n': ctx.config.n, 'k0': k0},
        [sweep], config_manager.decay_window('pseudo_localization'),
        details={'vanishing_residual': vanishing, 'draws': draws,
                 'offsets': [1, top], 'offsets_requested': [1, PSEUDO_LOCALIZATION_OFFSETS],
                 'offsets_reduced': top < PSEUDO_LOCALIZATION_OFFSETS})
    return [report.require(vanishing <= config_manager.tolerance('identity'))]


# Identities of the setting

@register('dyadic_filtration', 'Filtration: tower, trace, bimodule, contractivity, telescoping')
def dyadic_filtration(ctx: CheckContext, instance) -> List[CheckReport]:
    f = instance.field
    domain = ctx.domain
    K = domain.K
    scale = _scale(f)
    rng = np.random.default_rng([ctx.config.seed, 13, instance.index])
    residuals = {}
    residuals['tower'] = max(
        (cond_exp(cond_exp(f, j), k) - cond_exp(f, min(j, k))).max_abs() / scale
        for j in range(K + 1) for k in range(K + 1))
    trace = norms.phi(f)
    residuals['trace_E'] = max(abs(norms.phi(cond_exp(f, k)) - trace) for k in range(K + 1)) / scale
    if domain.periodic:
        residuals['trace_M'] = max(abs(norms.phi(ball_avg(f, k)) - trace)
                                   for k in ctx.level_range) / scale
    bimodule = 0.0
    for k in range(K + 1):
        a = OperatorField(domain, k, corpus.random_hermitian(rng, domain.shape(k), f.n))
        b = OperatorField(domain, k, corpus.random_hermitian(rng, domain.shape(k), f.n))
        bimodule = max(bimodule, (cond_exp(a @ f @ b, k) - a @ cond_exp(f, k) @ b).max_abs()
                       / (scale * max(1.0, a.max_abs() * b.max_abs())))
    residuals['bimodule'] = bimodule
    contraction = 0.0
    for p in (1.0, 2.0, np.inf):
        size = norms.lp_norm(f, p)
        for k in ctx.level_range:
            for image in (cond_exp(f, k), ball_avg(f, k)):
                contraction = max(contraction, (norms.lp_norm(image, p) - size) / max(size, 1e-300))
    residuals['contraction'] = max(contraction, 0.0)
    diffs = [mart_diff(f, n) for n in range(1, K + 1)]
    centred = f - cond_exp(f, 0)
    telescoped = diffs[0]
    for item in diffs[1:]:
        telescoped = telescoped + item
    residuals['telescoping'] = (telescoped - centred).max_abs() / scale
    energy = sum(norms.lp_norm(item, 2) ** 2 for item in diffs)
    residuals['parseval'] = abs(energy - norms.lp_norm(centred, 2) ** 2) / max(1.0, energy)
    return [CheckReport.residual('dyadic_filtration', ctx.describe(instance),
                                 max(residuals.values()), config_manager.tolerance('identity'),
                                 details=residuals)]


@register('rademacher_orthogonality', 'E_Omega |sum eps_k x_k|^2 = sum_k |x_k|^2 over the full sign set')
def rademacher_orthogonality(ctx: CheckContext, instance) -> List[CheckReport]:
    f = instance.field
    limit = config_manager.get_app_config('EXHAUSTIVE_OMEGA_LIMIT')
    levels = ctx.level_range.levels()[:limit]
    signs, _ = sign_matrix(len(levels), None, 0, limit)
    stack = apply_stack(tk, f, levels)
    sums = signed_sums(stack, signs)
    adj = np.conj(np.swapaxes(sums, -1, -2))
    stack_adj = np.conj(np.swapaxes(stack, -1, -2))
    scale = max(1.0, float(np.abs(stack).max()) ** 2)
    col = np.abs((adj @ sums).mean(axis=0) - (stack_adj @ stack).sum(axis=0)).max() / scale
    row = np.abs((sums @ adj).mean(axis=0) - (stack @ stack_adj).sum(axis=0)).max() / scale
    return [CheckReport.residual('rademacher_orthogonality',
                                 ctx.describe(instance, levels=f'[{levels[0]},{levels[-1]}]'),
                                 max(col, row), config_manager.tolerance('identity'),
                                 details={'col': float(col), 'row': float(row),
                                          'patterns': int(signs.shape[0])})]


@register('norm_identities', 'Norm facts: row = col at p = 2, Chebyshev, Hoelder, quasi-triangle, adjoints')
def norm_identities(ctx: CheckContext, instance) -> List[CheckReport]:
    f = instance.field
    seq = [tk(f, k) for k in ctx.level_range]
    residuals = {}
    energy = math.sqrt(sum(norms.lp_norm(item, 2) ** 2 for item in seq))
    row = norms.sq_norm(seq, 2, norms.ROW)
    col = norms.sq_norm(seq, 2, norms.COL)
    residuals['row_col_l2'] = max(abs(row - energy), abs(col - energy)) / max(1.0, energy)
    norm1 = norms.lp_norm(f, 1)
    residuals['chebyshev'] = max(0.0, norms.weak_l1(f) - norm1) / max(norm1, 1e-300)
    support = norms.spectral_distribution(f).support_measure
    residuals['hoelder'] = max(0.0, norm1 - norms.lp_norm(f, 2) * math.sqrt(support)) / max(norm1, 1e-300)
    other = seq[-1]
    dist_sum = norms.spectral_distribution(f + other)
    dist_f = norms.spectral_distribution(f)
    dist_g = norms.spectral_distribution(other)
    tol = config_manager.tolerance('exact_check')
    violation = 0.0
    for lam in dist_sum.breakpoints[::max(1, dist_sum.breakpoints.size // 32)]:
        lhs = dist_sum.measure_above(lam * (1.0 + tol))
        rhs = dist_f.measure_above(lam / 2 * (1.0 - tol)) + dist_g.measure_above(lam / 2 * (1.0 - tol))
        violation = max(violation, lhs - rhs)
    residuals['quasi_triangle'] = max(violation, 0.0)
    adjoints = [item.adjoint() for item in seq]
    for p in (1.0, 2.0, 4.0):
        left = norms.sq_norm(seq, p, norms.COL)
        right = norms.sq_norm(adjoints, p, norms.ROW)
        residuals[f'adjoint_p{p:g}'] = abs(left - right) / max(1.0, left)
    dense = max((lam * (1.0 - 1e-12) * dist_f.measure_above(lam * (1.0 - 1e-12))
                 for lam in dist_f.breakpoints), default=0.0)
    residuals['weak_sup'] = abs(dense - dist_f.weak_norm()) / max(1.0, dist_f.weak_norm())
    return [CheckReport.residual('norm_identities', ctx.describe(instance),
                                 max(residuals.values()), config_manager.tolerance('exact_check'),
                                 details=residuals)]


@register('interior_fidelity', 'Interior and periodic ball averages agree where the ball fits')
def interior_fidelity(ctx: CheckContext, instance) -> List[CheckReport]:
    f = instance.field
    periodic = OperatorField(ctx.domain.with_mode('periodic'), f.level, f.values, f.hermitian)
    interior = OperatorField(ctx.domain.with_mode('interior'), f.level, f.values, f.hermitian)
    residual = 0.0
    compared = 0
    for k in ctx.level_range:
        fits = grid.ball_fits(interior.domain, k).ravel()
        if not fits.any():
            continue
        a = ball_avg(periodic, k).flat()[fits]
        b = ball_avg(interior, k).flat()[fits]
        residual = max(residual, float(np.abs(a - b).max()) / _scale(f))
        compared += int(fits.sum())
    return [CheckReport.residual('interior_fidelity', ctx.describe(instance), residual,
                                 config_manager.tolerance('identity'),
                                 details={'cells_compared': compared})]


@register('scalar_oracle_match', 'Matrix code agrees with the scalar oracle on diagonal fields',
          families=('diagonal',))
def scalar_oracle_match(ctx: CheckContext, instance) -> List[CheckReport]:
    f = instance.field
    domain = ctx.domain
    oracle = ScalarOracle(domain.d, domain.K, domain.boundary_mode,
                          config_manager.get_app_config('BALL_SUBSAMPLING'))
    entries = [np.real(f.finest().values[..., i, i]) for i in range(f.n)]
    levels = ctx.level_range.levels()
    scale = _scale(f)
    residuals: Dict[str, float] = {}

    def compare(name, matrix_field, reference):
        values = matrix_field.finest().values
        worst = max(float(np.abs(values[..., i, i] - ref).max()) for i, ref in enumerate(reference))
        off = values.copy()
        for i in range(f.n):
            off[..., i, i] = 0
        residuals[name] = max(residuals.get(name, 0.0), worst, float(np.abs(off).max())) / scale

    for k in levels:
        compare('E_k', cond_exp(f, k), [oracle.cond_exp(s, k) for s in entries])
        compare('M_k', ball_avg(f, k), [oracle.ball_avg(s, k) for s in entries])
        compare('T_k', tk(f, k), [oracle.tk(s, k) for s in entries])
        if k >= 1:
            compare('R_k', rk(f, k), [oracle.rk(s, k) for s in entries])
    for n in range(1, domain.K + 1):
        compare('df', mart_diff(f, n), [oracle.mart_diff(s, n) for s in entries])
    k = levels[-1]
    compare('M_kn', mkn(f, k, k + 1), [oracle.mkn(s, k, k + 1) for s in entries])
    seq = [tk(f, k) for k in levels]
    compare('square', norms.square_function(seq, norms.COL),
            [oracle.square([oracle.tk(s, k) for k in levels]) for s in entries])

    for p in (1.0, 2.0, np.inf):
        expected = (max(oracle.lp(s, p) for s in entries) if np.isinf(p)
                    else sum(oracle.lp(s, p) ** p for s in entries) ** (1.0 / p))
        residuals[f'lp_{p:g}'] = abs(norms.lp_norm(f, p) - expected) / scale

    samples = np.concatenate([oracle.rademacher_samples(s, levels, ctx.signs).ravel()
                              for s in entries])
    oracle_weak = oracle.weak_from_samples(samples, domain.cell_volume / ctx.signs.shape[0])
    matrix_weak = norms.omega_weak(apply_stack(tk, f, levels), ctx.signs, domain.cell_volume)
    residuals['weak_rademacher'] = abs(matrix_weak - oracle_weak) / max(1.0, oracle_weak)

    combos = norms.bmo_all(seq)
    scalar_seqs = [[oracle.tk(s, k) for k in levels] for s in entries]
    sum_form = max(oracle.bmo(item) for item in scalar_seqs)
    gram_form = max(oracle.bmo(item, gram=True) for item in scalar_seqs)
    for key, value in combos.items():
        side, frame = key.split('/')
        diagonal = (side == norms.COL) == (frame == norms.FRAME_COLUMN)
        expected = sum_form if diagonal else gram_form
        residuals[f'bmo_{key}'] = abs(value - expected) / scale

    stopping = 0.0
    for lam in ctx.lambdas(f):
        cu = ctx.bundle(f, lam).cuculescu
        for i, s in enumerate(entries):
            classical = oracle.stopping(s, lam)
            for k, q in cu.q.items():
                diagonal_q = np.real(q.finest().values[..., i, i])
                stopping = max(stopping, float(np.abs(diagonal_q - classical[k]).max()))
    residuals['stopping'] = stopping

    norm1 = norms.lp_norm(f, 1)
    details = dict(residuals, oracle_weak_constant=oracle_weak / norm1 if norm1 else 0.0)
    return [CheckReport.residual('scalar_oracle_match', ctx.describe(instance),
                                 max(residuals.values()), config_manager.tolerance('identity'),
                                 details=details)]


# Aggregates over finished reports

def _by_family(reports: Sequence[CheckReport], check_id: str, key=None) -> Dict[str, float]:
    out: Dict[str, float] = {}
    for report in reports:
        if report.check_id != check_id or not math.isfinite(report.measured):
            continue
        family = report.instance.get('family', '?')
        value = report.details.get(key, report.measured) if key else report.measured
        out[family] = max(out.get(family, 0.0), float(value))
    return out


def _aggregate(check_id: str, measured: float, bound, passed: bool, details: Dict) -> CheckReport:
    return CheckReport(check_id, {'scope': 'run'}, float(measured), bound, bool(passed), 0.0,
                       AGGREGATE, details=details)


@register('weak11_uniformity', 'Weak (1,1) constants are uniform across families', scope=AGGREGATE_SCOPE)
def weak11_uniformity(ctx: CheckContext, reports: Sequence[CheckReport]) -> List[CheckReport]:
    constants = _by_family(reports, 'weak11', 'weak_constant')
    cap = config_manager.empirical_cap('weak11')
    factor = config_manager.get_app_config('WEAK11_FAMILY_FACTOR')
    oracle = _by_family(reports, 'scalar_oracle_match', 'oracle_weak_constant')
    details = {'per_family': constants, 'oracle_diagonal': oracle.get('diagonal'), 'cap': cap}
    passed = all(value <= cap for value in constants.values())
    measured = max(constants.values(), default=0.0)
    spike, diagonal = constants.get('spike'), oracle.get('diagonal')
    if spike and diagonal:
        spread = max(spike / diagonal, diagonal / spike)
        details['spike_to_oracle'] = spike / diagonal
        passed = passed and spread <= factor
    return [_aggregate('weak11_uniformity', measured, cap, passed, details)]


@register('square_function_stability', 'C_d is stable across depths', scope=AGGREGATE_SCOPE)
def square_function_stability(ctx: CheckContext, reports: Sequence[CheckReport]) -> List[CheckReport]:
    guard = config_manager.get_app_config('RESOLUTION_GUARD')
    depths = ctx.config.stability_depths or tuple(
        K for K in (ctx.domain.K - 2, ctx.domain.K) if K >= guard + 1)
    constants = {}
    for K in depths:
        domain = DyadicDomain(ctx.domain.d, K, ctx.domain.boundary_mode)
        constants[K] = verify.square_function_constant(domain, LevelRange(0, K - guard))
    top = max(constants.values())
    spread = (top - min(constants.values())) / top if top > 0 else 0.0
    tolerance = config_manager.get_app_config('L2_STABILITY')
    return [_aggregate('square_function_stability', spread, tolerance, spread <= tolerance,
                       {'C_d': {str(K): value for K, value in constants.items()}})]


@register('bmo_uniformity', 'BMO constants are uniform across families', scope=AGGREGATE_SCOPE)
def bmo_uniformity(ctx: CheckContext, reports: Sequence[CheckReport]) -> List[CheckReport]:
    constants = _by_family(reports, 'bmo')
    cap = config_manager.empirical_cap('bmo')
    measured = max(constants.values(), default=0.0)
    return [_aggregate('bmo_uniformity', measured, cap, measured <= cap, {'per_family': constants})]


@register('harness_completeness', 'Every statement maps to one check and every selected check ran',
          scope=AGGREGATE_SCOPE)
def harness_completeness(ctx: CheckContext, reports: Sequence[CheckReport]) -> List[CheckReport]:
    selected = selected_checks(ctx.config.checks)
    ran = {report.check_id for report in reports}
    expected = [check_id for check_id in selected
                if REGISTRY[check_id].scope == RUN
                or (REGISTRY[check_id].scope == INSTANCE
                    and any(REGISTRY[check_id].applies_to(item) for item in ctx.corpus))]
    missing = [check_id for check_id in expected if check_id not in ran]
    mapping = claims()
    unique = len(mapping) == len(REGISTRY)
    return [_aggregate('harness_completeness', len(missing), 0, not missing and unique,
                       {'missing': missing, 'claims': len(mapping)})]


def selected_checks(requested: Sequence[str]) -> List[str]:
    """Registry order, restricted to the requested ids ('all' selects everything)"""
    if 'all' in requested:
        return list(REGISTRY)
    unknown = [check_id for check_id in requested if check_id not in REGISTRY]
    if unknown:
        raise InvalidInput(f"Unknown check ids: {', '.join(unknown)}", 'checks')
    return [check_id for check_id in REGISTRY if check_id in requested]
