"""
Corpus generation: the four instance families the checks run on.

random_psd   smooth random positive fields (low-pass spectral synthesis)
spike        a few tall rank-r bumps on a small support, ||f||_1 = 1
diagonal     diagonal embeddings of nonnegative scalar step functions
adversarial  Hermitian fields with prescribed martingale differences
             dh_{k+s} = A_k D A_k supported under level-k projections A_k
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy import fft

from czlab.config.run_config import CORPUS_FAMILIES, CorpusSpec
from czlab.exceptions import InvalidInput
from czlab.models.field import OperatorField, ProjectionField
from czlab.models.geometry import DyadicDomain
from czlab.services.norms import lp_norm

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CorpusInstance:
    """One generated field with the descriptor that goes into its reports"""
    family: str
    index: int
    field: OperatorField
    params: Dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        return f"{self.family}#{self.index}"

    def descriptor(self) -> Dict:
        return {'family': self.family, 'index': self.index, **self.params}


def instance_rng(seed: int, family: str, index: int) -> np.random.Generator:
    """Independent stream per (seed, family, index) so instances never depend on each other"""
    return np.random.default_rng([int(seed), CORPUS_FAMILIES.index(family), int(index)])


def random_hermitian(rng: np.random.Generator, shape: Tuple[int, ...], n: int) -> np.ndarray:
    G = rng.standard_normal(shape + (n, n)) + 1j * rng.standard_normal(shape + (n, n))
    return 0.5 * (G + np.conj(np.swapaxes(G, -1, -2)))


def random_projection(rng: np.random.Generator, n: int, rank: int) -> np.ndarray:
    if not 0 <= rank <= n:
        raise InvalidInput(f"Rank {rank} outside [0, {n}]", 'rank')
    if rank == 0:
        return np.zeros((n, n), dtype=np.complex128)
    G = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    Q, _ = np.linalg.qr(G)
    return Q @ np.conj(Q.T)


def _normalize_l1(values: np.ndarray, cell_volume: float) -> np.ndarray:
    """Scale a positive field to ||f||_1 = 1"""
    mass = cell_volume * float(np.real(np.trace(values, axis1=-2, axis2=-1)).sum())
    if mass <= 0:
        raise InvalidInput("Generated field has no mass", 'field')
    return values / mass


def random_psd(domain: DyadicDomain, n: int, rng: np.random.Generator,
               modes: int = 4, floor: float = 0.0) -> OperatorField:
    """G G* + floor I with G a low-pass filtered complex noise field"""
    shape = domain.shape()
    noise = rng.standard_normal(shape + (n, n)) + 1j * rng.standard_normal(shape + (n, n))
    axes = tuple(range(domain.d))
    spectrum = fft.fftn(noise, axes=axes)
    freqs = np.meshgrid(*([np.abs(fft.fftfreq(domain.side, 1.0 / domain.side))] * domain.d),
                        indexing='ij')
    keep = np.max(np.stack(freqs), axis=0) <= modes
    G = fft.ifftn(spectrum * keep[(...,) + (None, None)], axes=axes)
    values = G @ np.conj(np.swapaxes(G, -1, -2)) + floor * np.eye(n)
    return OperatorField(domain, domain.K, _normalize_l1(values, domain.cell_volume))


def spike(domain: DyadicDomain, n: int, rng: np.random.Generator,
          support_fraction: float = 1.0 / 16, rank: int = 1) -> Tuple[OperatorField, Dict]:
    """Rank-r spikes of equal height on a random cell set; the height follows from ||f||_1 = 1"""
    if not 0 < support_fraction <= 1:
        raise InvalidInput("support_fraction must lie in (0, 1]", 'support_fraction')
    count = max(1, int(round(support_fraction * domain.cell_count)))
    cells = rng.choice(domain.cell_count, size=count, replace=False)
    rank = min(rank, n)
    height = 1.0 / (count * domain.cell_volume * rank)
    values = np.zeros((domain.cell_count, n, n), dtype=np.complex128)
    for cell in cells:
        values[cell] = height * random_projection(rng, n, rank)
    spiked = OperatorField(domain, domain.K, values.reshape(domain.shape() + (n, n)))
    return spiked, {'h': height, 'rho': count / domain.cell_count, 'rank': rank}


def scalar_profile(domain: DyadicDomain, rng: np.random.Generator, profile: str) -> np.ndarray:
    """A nonnegative scalar step function on level-K cells"""
    if profile == 'indicator':
        values = np.zeros(domain.shape())
        values[(slice(0, domain.side // 2),) * domain.d] = 1.0
        return values
    if profile == 'random':
        level = max(1, domain.K // 2)
        coarse = rng.exponential(size=(2 ** level,) * domain.d)
        values = coarse
        for axis in range(domain.d):
            values = np.repeat(values, 2 ** (domain.K - level), axis=axis)
        bumps = rng.random(domain.shape()) < 0.05
        return values + 4.0 * bumps * rng.exponential(size=domain.shape())
    if profile == 'spike':
        # isolated unit cells on about a sixteenth of the grid
        values = (rng.random(domain.shape()) < 1.0 / 16).astype(float)
        if not values.any():
            values.flat[rng.integers(values.size)] = 1.0
        return values
    raise InvalidInput(f"Unknown scalar profile: {profile}", 'profile')


def diagonal(domain: DyadicDomain, n: int, rng: np.random.Generator,
             profile: str = 'random', normalize: bool = True) -> OperatorField:
    """diag(phi_1(x), ..., phi_n(x)) with independent scalar profiles"""
    values = np.zeros(domain.shape() + (n, n), dtype=np.complex128)
    for i in range(n):
        values[..., i, i] = scalar_profile(domain, rng, profile)
    if normalize:
        values = _normalize_l1(values, domain.cell_volume)
    return OperatorField(domain, domain.K, values)


def martingale_difference(domain: DyadicDomain, n: int, rng: np.random.Generator,
                          level: int) -> np.ndarray:
    """A random Hermitian level-`level` field with zero mean on every level-(level-1) cube"""
    X = random_hermitian(rng, domain.shape(level), n)
    m = 2 ** (level - 1)
    if domain.d == 1:
        means = X.reshape(m, 2, n, n).mean(axis=1, keepdims=True)
        X = (X.reshape(m, 2, n, n) - means).reshape(X.shape)
    else:
        view = X.reshape(m, 2, m, 2, n, n)
        X = (view - view.mean(axis=(1, 3), keepdims=True)).reshape(X.shape)
    return OperatorField(domain, level, X).finest().values


def adversarial(domain: DyadicDomain, n: int, rng: np.random.Generator, s: int = 2,
                levels: Sequence[int] = None, rank: int = 1
                ) -> Tuple[OperatorField, Dict[int, OperatorField], Dict[int, ProjectionField]]:
    """h = sum_k A_k D_{k+s} A_k with A_k a rank-r projection on one random level-k cube

    Returns h, its nonzero martingale differences keyed by level and the A_k.
    """
    if levels is None:
        levels = tuple(range(1, domain.K - s + 1))
    dh, A = {}, {}
    total = np.zeros(domain.shape() + (n, n), dtype=np.complex128)
    for k in levels:
        if k < 1 or k + s > domain.K:
            raise InvalidInput(f"Level {k} with offset {s} leaves the depth {domain.K}", 'levels')
        projection = np.zeros(domain.shape(k) + (n, n), dtype=np.complex128)
        cube = tuple(int(c) for c in rng.integers(0, 2 ** k, size=domain.d))
        projection[cube] = random_projection(rng, n, min(rank, n))
        A[k] = ProjectionField(domain, k, projection)
        Afine = A[k].finest().values
        D = martingale_difference(domain, n, rng, k + s)
        piece = Afine @ D @ Afine
        dh[k + s] = OperatorField(domain, domain.K, piece)
        total += piece
    return OperatorField(domain, domain.K, total), dh, A


def generate(domain: DyadicDomain, n: int, spec: CorpusSpec, seed: int) -> List[CorpusInstance]:
    """Instances of one family, reproducible from (seed, family, index)"""
    spec.validate()
    params = dict(spec.params)
    instances = []
    for index in range(spec.count):
        rng = instance_rng(seed, spec.family, index)
        descriptor = {'seed': seed, **params}
        if spec.family == 'random_psd':
            generated = random_psd(domain, n, rng, params.get('modes', 4), params.get('floor', 0.0))
        elif spec.family == 'spike':
            generated, extra = spike(domain, n, rng, params.get('support_fraction', 1.0 / 16),
                                     params.get('rank', 1))
            descriptor.update(extra)
        elif spec.family == 'diagonal':
            generated = diagonal(domain, n, rng, params.get('profile', 'random'),
                                 params.get('normalize', True))
        else:
            s = int(params.get('s', 2))
            generated, _, _ = adversarial(domain, n, rng, s, params.get('levels'), params.get('rank', 1))
            descriptor['s'] = s
            mass = lp_norm(generated, 1)
            if mass > 0:
                generated = generated * (1.0 / mass)
        instances.append(CorpusInstance(spec.family, index, generated, descriptor))
    logger.debug("Generated %d %s instances", len(instances), spec.family)
    return instances


def gen_corpus(domain: DyadicDomain, n: int, specs: Sequence[CorpusSpec],
               seed: int) -> List[CorpusInstance]:
    """The whole corpus of a run, in configuration order"""
    corpus = []
    for spec in specs:
        corpus.extend(generate(domain, n, spec, seed))
    return corpus
