"""
Dyadic geometry of the finite window [0,1)^d
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from czlab.exceptions import InvalidInput
from czlab.models.base import BaseModel

PERIODIC = 'periodic'
INTERIOR = 'interior'


@dataclass(frozen=True)
class DyadicDomain(BaseModel):
    """The window [0,1)^d resolved down to cells of side 2^-K"""
    d: int
    K: int
    boundary_mode: str = PERIODIC

    def __post_init__(self):
        if self.d not in (1, 2):
            raise InvalidInput(f"Dimension must be 1 or 2, got {self.d}", 'd')
        if self.K < 0:
            raise InvalidInput(f"Depth must be nonnegative, got {self.K}", 'K')
        if self.boundary_mode not in (PERIODIC, INTERIOR):
            raise InvalidInput(f"Unknown boundary mode: {self.boundary_mode}", 'boundary_mode')

    @property
    def periodic(self) -> bool:
        return self.boundary_mode == PERIODIC

    @property
    def side(self) -> int:
        """Cells per axis at the finest level"""
        return 2 ** self.K

    @property
    def cell_count(self) -> int:
        return 2 ** (self.K * self.d)

    @property
    def cell_volume(self) -> float:
        return 2.0 ** (-self.K * self.d)

    def shape(self, level: int = None) -> Tuple[int, ...]:
        """Grid shape of a field constant on level-`level` cubes"""
        level = self.K if level is None else level
        return (2 ** level,) * self.d

    def check_level(self, k: int, name: str = 'level'):
        if not 0 <= k <= self.K:
            raise InvalidInput(f"{name} {k} outside [0, {self.K}]", name)

    def coords(self, x: int, level: int = None) -> Tuple[int, ...]:
        """Grid coordinates of linear cell index x"""
        shape = self.shape(level)
        if not 0 <= x < int(np.prod(shape)):
            raise InvalidInput(f"Cell index {x} outside the grid", 'x')
        return tuple(int(c) for c in np.unravel_index(x, shape))

    def index(self, coords, level: int = None) -> int:
        """Linear cell index of grid coordinates"""
        return int(np.ravel_multi_index(tuple(coords), self.shape(level)))

    def cubes(self, k: int):
        """Iterate over all cubes of level k"""
        self.check_level(k)
        for coords in np.ndindex(*self.shape(k)):
            yield DyadicCube(k, tuple(int(c) for c in coords))

    def with_mode(self, boundary_mode: str) -> 'DyadicDomain':
        return DyadicDomain(self.d, self.K, boundary_mode)


@dataclass(frozen=True)
class DyadicCube(BaseModel):
    """A standard dyadic cube of side 2^-level"""
    level: int
    coords: Tuple[int, ...]

    @property
    def side_length(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def volume(self) -> float:
        return 2.0 ** (-self.level * len(self.coords))

    @property
    def center(self) -> Tuple[float, ...]:
        return tuple((c + 0.5) * self.side_length for c in self.coords)

    def side_cells(self, K: int) -> int:
        """Side length counted in level-K cells"""
        return 2 ** (K - self.level)

    def cell_slices(self, K: int) -> Tuple[slice, ...]:
        """Index slices selecting the level-K cells of this cube"""
        L = self.side_cells(K)
        return tuple(slice(c * L, (c + 1) * L) for c in self.coords)
