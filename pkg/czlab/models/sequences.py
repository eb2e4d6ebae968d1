"""
Index sets for the square-function sums: level ranges and Rademacher signs
"""

from dataclasses import dataclass
from itertools import product
from typing import Tuple

import numpy as np

from czlab.exceptions import InvalidInput
from czlab.models.base import BaseModel

EXHAUSTIVE = 'exhaustive-index'
SAMPLED = 'seeded-sample'


@dataclass(frozen=True)
class LevelRange(BaseModel):
    """The finite index set k_lo..k_hi over which every sum over k runs"""
    k_lo: int
    k_hi: int

    def __post_init__(self):
        if not 0 <= self.k_lo <= self.k_hi:
            raise InvalidInput(f"Empty or negative level range [{self.k_lo}, {self.k_hi}]", 'range')

    def levels(self) -> Tuple[int, ...]:
        return tuple(range(self.k_lo, self.k_hi + 1))

    def __len__(self) -> int:
        return self.k_hi - self.k_lo + 1

    def __iter__(self):
        return iter(self.levels())

    def check_within(self, max_level: int):
        if self.k_hi > max_level:
            raise InvalidInput(f"Level range reaches {self.k_hi}, beyond {max_level}", 'range')
        return self

    def label(self) -> str:
        return f"[{self.k_lo},{self.k_hi}]"


@dataclass(frozen=True)
class SignPattern(BaseModel):
    """One Rademacher sign vector (eps_k), indexed along a LevelRange"""
    signs: Tuple[int, ...]
    provenance: str = EXHAUSTIVE

    def __post_init__(self):
        if any(s not in (-1, 1) for s in self.signs):
            raise InvalidInput("Signs must be +1 or -1", 'signs')

    def __len__(self) -> int:
        return len(self.signs)


def sign_matrix(m: int, samples: int = None, seed: int = 0,
                exhaustive_limit: int = 10) -> Tuple[np.ndarray, str]:
    """All 2^m sign vectors when m is small, else a seeded Monte-Carlo sample

    Returns the (patterns, m) matrix and its provenance tag.
    """
    if m < 1:
        raise InvalidInput("Need at least one level", 'm')
    if samples is None and m <= exhaustive_limit:
        return np.array(list(product((1, -1), repeat=m)), dtype=float), EXHAUSTIVE
    rng = np.random.default_rng(seed)
    count = samples or 256
    return rng.choice((-1.0, 1.0), size=(count, m)), SAMPLED


def sign_patterns(m: int, samples: int = None, seed: int = 0, exhaustive_limit: int = 10):
    matrix, provenance = sign_matrix(m, samples, seed, exhaustive_limit)
    return [SignPattern(tuple(int(s) for s in row), provenance) for row in matrix]
