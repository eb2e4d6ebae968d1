"""
Outputs of Cuculescu's construction and of the Calderon-Zygmund decomposition
"""

from dataclasses import dataclass, field
from typing import Dict, Tuple

from czlab.models.field import OperatorField, ProjectionField


@dataclass(frozen=True, eq=False)
class CuculescuSequence:
    """q_k for k = 0..K (q_0 the identity) and p_k = q_{k-1} - q_k for k = 1..K"""
    lam: float
    q: Dict[int, ProjectionField]
    p: Dict[int, ProjectionField]

    @property
    def K(self) -> int:
        return max(self.q)

    @property
    def q_final(self) -> ProjectionField:
        """q = meet of all q_k; the q_k decrease, so it is q_K"""
        return self.q[self.K]

    def levels(self) -> Tuple[int, ...]:
        return tuple(sorted(self.p))

    def active_levels(self) -> Tuple[int, ...]:
        """Levels whose p_k is not identically zero"""
        return tuple(k for k in self.levels() if self.p[k].rank_field().any())


@dataclass(frozen=True, eq=False)
class CZBundle:
    """f = g_d + g_off + b_d + b_off together with the indexed pieces

    b_diag[n] = p_n (f - f_n) p_n
    b_pairs[(i, j)] = p_i (f - f_{max(i,j)}) p_j for i != j
    b_offdiag[(n, s)] = b_pairs[(n, n+s)] + b_pairs[(n+s, n)]
    g_left[(s, k)] = p_k df_{k+s} q_{k+s-1} and g_right[(s, k)] its adjoint
    """
    f: OperatorField
    cuculescu: CuculescuSequence
    g_d: OperatorField
    g_off: OperatorField
    b_d: OperatorField
    b_off: OperatorField
    zeta: ProjectionField
    b_diag: Dict[int, OperatorField] = field(default_factory=dict)
    b_pairs: Dict[Tuple[int, int], OperatorField] = field(default_factory=dict)
    b_offdiag: Dict[Tuple[int, int], OperatorField] = field(default_factory=dict)
    g_left: Dict[Tuple[int, int], OperatorField] = field(default_factory=dict)
    g_right: Dict[Tuple[int, int], OperatorField] = field(default_factory=dict)

    @property
    def lam(self) -> float:
        return self.cuculescu.lam

    @property
    def q(self) -> ProjectionField:
        return self.cuculescu.q_final

    def parts(self) -> Dict[str, OperatorField]:
        return {'g_d': self.g_d, 'g_off': self.g_off, 'b_d': self.b_d, 'b_off': self.b_off}

    def reconstruction(self) -> OperatorField:
        return self.g_d + self.g_off + self.b_d + self.b_off

    def g_left_sum(self, s: int) -> OperatorField:
        """g^l_s = sum over k of g^l_{s,k}"""
        return _sum([v for (t, _), v in sorted(self.g_left.items()) if t == s], self.f)

    def g_right_sum(self, s: int) -> OperatorField:
        return _sum([v for (t, _), v in sorted(self.g_right.items()) if t == s], self.f)

    def offsets(self) -> Tuple[int, ...]:
        """The s values present in the indexed good pieces"""
        return tuple(sorted({s for s, _ in self.g_left}))

    def manifest(self) -> Dict:
        domain = self.f.domain
        return {
            'lambda': self.lam,
            'd': domain.d,
            'K': domain.K,
            'n': self.f.n,
            'boundary_mode': domain.boundary_mode,
            'active_levels': list(self.cuculescu.active_levels()),
            'offsets': list(self.offsets()),
        }


def _sum(fields, like: OperatorField) -> OperatorField:
    if not fields:
        zero = OperatorField.zeros(like.domain, like.n, like.domain.K)
        return zero.with_values(zero.values, hermitian=False)
    total = fields[0]
    for item in fields[1:]:
        total = total + item
    return total
