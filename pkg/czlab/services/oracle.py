"""
Scalar reference implementation.

Everything here works on plain real arrays (n = 1) by direct summation and
shares no code with the matrix services, so that agreement on diagonal
embeddings is an independent confirmation of the operator and norm code.
"""

import logging
from itertools import product
from typing import Dict, List, Tuple

import numpy as np

from czlab.exceptions import InvalidInput
from czlab.models.field import OperatorField

logger = logging.getLogger(__name__)


class ScalarOracle:
    """Brute-force operators and norms for real step functions on [0,1)^d"""

    OPERATIONS = ('E_k', 'M_k', 'T_k', 'R_k', 'M_kn', 'df', 'square', 'distribution',
                  'weak_rademacher', 'lp', 'stopping', 'bmo')

    def __init__(self, d: int, K: int, boundary_mode: str = 'periodic', subsampling: int = 8):
        self.d = d
        self.K = K
        self.N = 2 ** K
        self.periodic = boundary_mode == 'periodic'
        self.subsampling = subsampling
        self._tables: Dict[int, Tuple[List, float]] = {}

    @classmethod
    def for_field(cls, field: OperatorField, subsampling: int = 8) -> 'ScalarOracle':
        return cls(field.domain.d, field.domain.K, field.domain.boundary_mode, subsampling)

    # Input handling

    def scalar(self, f) -> np.ndarray:
        """Real grid values of a scalar field (or array), refined to level K"""
        if isinstance(f, OperatorField):
            if f.n != 1:
                raise InvalidInput(f"Oracle needs a scalar field, got n = {f.n}", 'f')
            if np.max(np.abs(np.imag(f.values))) > 0:
                raise InvalidInput("Oracle needs real values", 'f')
            values = np.real(f.values[..., 0, 0])
        else:
            values = np.asarray(f, dtype=float)
        if values.ndim != self.d:
            raise InvalidInput(f"Expected a {self.d}-dimensional scalar grid", 'f')
        factor = self.N // values.shape[0]
        for axis in range(self.d):
            values = np.repeat(values, factor, axis=axis)
        return values

    # Geometry

    def _coverage(self, a: Tuple[int, ...], r: int) -> float:
        """Fraction of the cell at integer offset a lying inside the radius-r ball at 0"""
        if self.d == 1:
            return max(0.0, min(a[0] + 0.5, r) - max(a[0] - 0.5, -r))
        s = self.subsampling
        sub = (np.arange(s) + 0.5) / s - 0.5
        u = a[0] + sub[:, None]
        v = a[1] + sub[None, :]
        return float(np.count_nonzero(u ** 2 + v ** 2 < r * r)) / (s * s)

    def offset_table(self, k: int) -> Tuple[List, float]:
        """Nonzero (offset, weight) pairs of B_k and the full ball weight

        On the torus offsets are reduced modulo N and their weights added.
        """
        if k in self._tables:
            return self._tables[k]
        r = 2 ** (self.K - k)
        raw = {}
        total = 0.0
        for a in product(range(-r - 1, r + 2), repeat=self.d):
            w = self._coverage(a, r)
            if w <= 0:
                continue
            total += w
            key = tuple(c % self.N for c in a) if self.periodic else a
            raw[key] = raw.get(key, 0.0) + w
        self._tables[k] = (sorted(raw.items()), total)
        return self._tables[k]

    def _shifted(self, f: np.ndarray, a: Tuple[int, ...]) -> np.ndarray:
        """g(x) = f(x + a), zero outside the window when not periodic"""
        if self.periodic:
            return np.roll(f, tuple(-c for c in a), axis=tuple(range(self.d)))
        out = np.zeros_like(f)
        for x in product(range(self.N), repeat=self.d):
            y = tuple(xi + ai for xi, ai in zip(x, a))
            if all(0 <= yi < self.N for yi in y):
                out[x] = f[y]
        return out

    def weight_map(self, x: Tuple[int, ...], k: int) -> np.ndarray:
        """Coverage of every cell by the ball B_k around cell x"""
        table, _ = self.offset_table(k)
        wmap = np.zeros((self.N,) * self.d)
        for a, w in table:
            y = tuple(xi + ai for xi, ai in zip(x, a))
            if self.periodic:
                wmap[tuple(yi % self.N for yi in y)] += w
            elif all(0 <= yi < self.N for yi in y):
                wmap[y] += w
        return wmap

    def _cube_id(self, cell, level: int):
        shift = self.K - level
        return tuple(c >> shift for c in cell)

    def _cube_members(self, level: int) -> Dict:
        groups: Dict = {}
        for cell in product(range(self.N), repeat=self.d):
            groups.setdefault(self._cube_id(cell, level), []).append(cell)
        return groups

    # Operators

    def cond_exp(self, f: np.ndarray, k: int) -> np.ndarray:
        out = np.zeros_like(f)
        for cells in self._cube_members(k).values():
            mean = sum(f[c] for c in cells) / len(cells)
            for c in cells:
                out[c] = mean
        return out

    def ball_avg(self, f: np.ndarray, k: int) -> np.ndarray:
        table, total = self.offset_table(k)
        out = np.zeros_like(f)
        for a, w in table:
            out += w * self._shifted(f, a)
        return out / total

    def tk(self, f: np.ndarray, k: int) -> np.ndarray:
        return self.ball_avg(f, k) - self.cond_exp(f, k)

    def rk(self, f: np.ndarray, k: int) -> np.ndarray:
        return self.ball_avg(f, k) - self.ball_avg(f, k - 1)

    def mkn(self, f: np.ndarray, k: int, n: int) -> np.ndarray:
        _, total = self.offset_table(k)
        members = list(self._cube_members(n).values())
        out = np.zeros_like(f)
        for x in product(range(self.N), repeat=self.d):
            wmap = self.weight_map(x, k)
            tol = 1e-12 * max(1.0, float(wmap.max()))
            acc = 0.0
            for cells in members:
                w = np.array([wmap[c] for c in cells])
                covered = float(w.sum())
                # partly covered: some mass but not all of it, or uneven coverage
                if (tol < covered < len(cells) * (1.0 - tol)) or w.max() - w.min() > tol:
                    acc += sum(wi * f[c] for wi, c in zip(w, cells))
            out[x] = acc / total
        return out

    def mart_diff(self, f: np.ndarray, n: int) -> np.ndarray:
        return self.cond_exp(f, n) - self.cond_exp(f, n - 1)

    def square(self, seq: List[np.ndarray]) -> np.ndarray:
        return np.sqrt(sum(np.abs(item) ** 2 for item in seq))

    # Norms and distributions

    def lp(self, f: np.ndarray, p: float) -> float:
        if np.isinf(p):
            return float(np.max(np.abs(f)))
        return float((np.sum(np.abs(f) ** p) / f.size) ** (1.0 / p))

    def distribution(self, f: np.ndarray, lam: float) -> float:
        return float(np.count_nonzero(np.abs(f) > lam)) / f.size

    def weak_from_samples(self, magnitudes: np.ndarray, measure: float) -> float:
        """max over mu of mu * (measure of {value >= mu})"""
        best = 0.0
        running = 0.0
        ordered = np.sort(np.abs(magnitudes).ravel())[::-1]
        i = 0
        while i < ordered.size:
            mu = ordered[i]
            j = i
            while j < ordered.size and ordered[j] == mu:
                j += 1
            running += (j - i) * measure
            if mu > 0:
                best = max(best, mu * running)
            i = j
        return best

    def rademacher_samples(self, f: np.ndarray, levels, signs=None) -> np.ndarray:
        """sum_k eps_k T_k f for every sign pattern, stacked along the first axis"""
        terms = [self.tk(f, k) for k in levels]
        patterns = list(product((1, -1), repeat=len(terms))) if signs is None else signs
        return np.array([sum(e * t for e, t in zip(eps, terms)) for eps in patterns])

    def weak_rademacher(self, f: np.ndarray, levels, signs=None) -> float:
        """sup over lam of lam * E_Omega |{|sum eps_k T_k f| > lam}|"""
        samples = self.rademacher_samples(f, levels, signs)
        return self.weak_from_samples(samples, 1.0 / samples.size)

    def stopping(self, f: np.ndarray, lam: float, eps: float = 1e-10) -> Dict[int, np.ndarray]:
        """Classical stopping sets: q_k(x) = 1 while every average f_j(x), j <= k, stays <= lam"""
        alive = np.ones_like(f)
        q = {0: alive.copy()}
        for k in range(1, self.K + 1):
            fk = self.cond_exp(f, k)
            alive = alive * (fk <= lam + eps * np.maximum(np.abs(fk), lam))
            q[k] = alive.copy()
        return q

    def bmo(self, seq: List[np.ndarray], gram: bool = False) -> float:
        """Classical dyadic BMO of a scalar sequence, sum form or Gram form"""
        best = 0.0
        for level in range(self.K + 1):
            for cells in self._cube_members(level).values():
                D = np.array([[item[c] for c in cells] for item in seq])
                D = D - D.mean(axis=1, keepdims=True)
                if gram:
                    value = float(np.max(np.linalg.eigvalsh(D @ D.T / len(cells))))
                else:
                    value = float(np.sum(D ** 2) / len(cells))
                best = max(best, float(np.sqrt(max(value, 0.0))))
        return best

    def evaluate(self, op_id: str, f, params: Dict = None):
        """Dispatch an operation by id"""
        params = dict(params or {})
        if op_id not in self.OPERATIONS:
            raise InvalidInput(f"Unknown oracle operation: {op_id}", 'op_id')
        values = self.scalar(f)
        levels = params.get('levels', [params.get('k', 0)])
        if op_id == 'E_k':
            return self.cond_exp(values, params['k'])
        if op_id == 'M_k':
            return self.ball_avg(values, params['k'])
        if op_id == 'T_k':
            return self.tk(values, params['k'])
        if op_id == 'R_k':
            return self.rk(values, params['k'])
        if op_id == 'M_kn':
            return self.mkn(values, params['k'], params['n'])
        if op_id == 'df':
            return self.mart_diff(values, params['n'])
        if op_id == 'square':
            return self.square([self.tk(values, k) for k in levels])
        if op_id == 'distribution':
            return self.distribution(values, params['lam'])
        if op_id == 'weak_rademacher':
            return self.weak_rademacher(values, levels)
        if op_id == 'lp':
            return self.lp(values, params.get('p', 2.0))
        if op_id == 'stopping':
            return self.stopping(values, params['lam'])
        return self.bmo([self.tk(values, k) for k in levels], params.get('gram', False))


def scalar_oracle(op_id: str, f_scalar, params: Dict = None):
    """Reference values for a scalar field, computed without the matrix services"""
    if not isinstance(f_scalar, OperatorField):
        raise InvalidInput("Oracle input must be a field", 'f')
    return ScalarOracle.for_field(f_scalar).evaluate(op_id, f_scalar, params)
