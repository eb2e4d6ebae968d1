"""
Matrix-valued step functions on a dyadic domain
"""

from dataclasses import dataclass
from numbers import Number, Real

import numpy as np

from czlab.exceptions import InvalidInput
from czlab.models.geometry import DyadicDomain


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=np.complex128, copy=True)
    values.setflags(write=False)
    return values


def hermitian_residual(values: np.ndarray) -> float:
    """Largest entrywise deviation from Hermitian symmetry, relative to scale"""
    if values.size == 0:
        return 0.0
    scale = max(1.0, float(np.max(np.abs(values))))
    return float(np.max(np.abs(values - np.conj(np.swapaxes(values, -1, -2))))) / scale


@dataclass(frozen=True, eq=False)
class OperatorField:
    """One n x n matrix per level-`level` cell; an element of L_p(N) at finite resolution"""
    domain: DyadicDomain
    level: int
    values: np.ndarray
    hermitian: bool = True

    def __post_init__(self):
        self.domain.check_level(self.level)
        values = np.asarray(self.values)
        expected = self.domain.shape(self.level)
        if values.ndim != self.domain.d + 2 or values.shape[:self.domain.d] != expected:
            raise InvalidInput(
                f"Field values of shape {values.shape} do not match grid {expected} + (n, n)",
                'values')
        if values.shape[-1] != values.shape[-2]:
            raise InvalidInput("Cell values must be square matrices", 'values')
        object.__setattr__(self, 'values', _frozen(values))
        if self.hermitian:
            from czlab.config import config_manager
            if hermitian_residual(self.values) > config_manager.tolerance('eps_herm'):
                raise InvalidInput("Field flagged Hermitian has non-Hermitian cells", 'values')

    # Constructors

    @classmethod
    def zeros(cls, domain: DyadicDomain, n: int, level: int = 0) -> 'OperatorField':
        return cls(domain, level, np.zeros(domain.shape(level) + (n, n), dtype=np.complex128))

    @classmethod
    def constant(cls, domain: DyadicDomain, matrix, level: int = 0,
                 hermitian: bool = True) -> 'OperatorField':
        matrix = np.asarray(matrix, dtype=np.complex128)
        values = np.broadcast_to(matrix, domain.shape(level) + matrix.shape)
        return cls(domain, level, values, hermitian=hermitian)

    @classmethod
    def identity(cls, domain: DyadicDomain, n: int, level: int = 0) -> 'OperatorField':
        return cls.constant(domain, np.eye(n), level)

    # Shape

    @property
    def n(self) -> int:
        return self.values.shape[-1]

    @property
    def d(self) -> int:
        return self.domain.d

    @property
    def cell_volume(self) -> float:
        return 2.0 ** (-self.level * self.domain.d)

    def flat(self) -> np.ndarray:
        """Cell values as a (cells, n, n) stack in row-major cell order"""
        return self.values.reshape(-1, self.n, self.n)

    def cell(self, x: int) -> np.ndarray:
        return self.flat()[x]

    def with_values(self, values: np.ndarray, level: int = None,
                    hermitian: bool = None) -> 'OperatorField':
        return OperatorField(self.domain, self.level if level is None else level, values,
                             self.hermitian if hermitian is None else hermitian)

    def refine(self, level: int) -> 'OperatorField':
        """Re-express the field on the finer level-`level` grid"""
        if level < self.level:
            raise InvalidInput(f"Cannot refine level {self.level} field to coarser level {level}",
                               'level')
        if level == self.level:
            return self
        self.domain.check_level(level)
        factor = 2 ** (level - self.level)
        values = self.values
        for axis in range(self.domain.d):
            values = np.repeat(values, factor, axis=axis)
        return OperatorField(self.domain, level, values, self.hermitian)

    def finest(self) -> 'OperatorField':
        return self.refine(self.domain.K)

    # Algebra

    def _aligned(self, other: 'OperatorField'):
        if other.domain != self.domain or other.n != self.n:
            raise InvalidInput("Fields live on different domains or matrix sizes", 'other')
        level = max(self.level, other.level)
        return self.refine(level), other.refine(level), level

    def __add__(self, other: 'OperatorField') -> 'OperatorField':
        a, b, level = self._aligned(other)
        return OperatorField(self.domain, level, a.values + b.values,
                             self.hermitian and other.hermitian)

    def __sub__(self, other: 'OperatorField') -> 'OperatorField':
        a, b, level = self._aligned(other)
        return OperatorField(self.domain, level, a.values - b.values,
                             self.hermitian and other.hermitian)

    def __neg__(self) -> 'OperatorField':
        return self.with_values(-self.values)

    def __mul__(self, scalar) -> 'OperatorField':
        if not isinstance(scalar, Number):
            return NotImplemented
        hermitian = self.hermitian and isinstance(scalar, Real)
        return self.with_values(self.values * scalar, hermitian=hermitian)

    __rmul__ = __mul__

    def __matmul__(self, other: 'OperatorField') -> 'OperatorField':
        """Pointwise matrix product"""
        a, b, level = self._aligned(other)
        return OperatorField(self.domain, level, a.values @ b.values, hermitian=False)

    def adjoint(self) -> 'OperatorField':
        return self.with_values(np.conj(np.swapaxes(self.values, -1, -2)))

    def hermitian_part(self) -> 'OperatorField':
        values = 0.5 * (self.values + np.conj(np.swapaxes(self.values, -1, -2)))
        return self.with_values(values, hermitian=True)

    def sandwich(self, left: 'OperatorField', right: 'OperatorField' = None) -> 'OperatorField':
        """left f right; Hermitian-symmetrized when right is omitted"""
        if right is None:
            return (left @ self @ left).hermitian_part() if self.hermitian else left @ self @ left
        return left @ self @ right

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def __repr__(self):
        return (f"OperatorField(d={self.d}, K={self.domain.K}, level={self.level}, "
                f"n={self.n}, hermitian={self.hermitian})")


class ProjectionField(OperatorField):
    """An OperatorField whose every value is an orthogonal projection"""

    def __post_init__(self):
        super().__post_init__()
        from czlab.services.algebra import is_projection
        if not is_projection(self.values):
            raise InvalidInput("ProjectionField cells must be orthogonal projections", 'values')

    @classmethod
    def of(cls, field: OperatorField) -> 'ProjectionField':
        return cls(field.domain, field.level, field.values, True)

    @classmethod
    def identity(cls, domain: DyadicDomain, n: int, level: int = 0) -> 'ProjectionField':
        return cls(domain, level, np.broadcast_to(np.eye(n), domain.shape(level) + (n, n)), True)

    @classmethod
    def zeros(cls, domain: DyadicDomain, n: int, level: int = 0) -> 'ProjectionField':
        return cls(domain, level, np.zeros(domain.shape(level) + (n, n)), True)

    def refine(self, level: int) -> 'ProjectionField':
        return ProjectionField.of(super().refine(level))

    def complement(self) -> 'ProjectionField':
        eye = np.broadcast_to(np.eye(self.n), self.values.shape)
        return ProjectionField(self.domain, self.level, eye - self.values, True)

    def rank_field(self) -> np.ndarray:
        """Per-cell rank, read off the trace"""
        return np.rint(np.real(np.trace(self.values, axis1=-2, axis2=-1))).astype(int)
