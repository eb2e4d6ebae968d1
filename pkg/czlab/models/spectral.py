"""
Spectral data: eigen-decompositions and trace-measure distributions
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from czlab.exceptions import InvalidInput
from czlab.models.base import BaseModel


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Eigenpairs of a (stack of) Hermitian matrices, eigenvalues ascending"""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self, eigenvalues: np.ndarray = None) -> np.ndarray:
        """U diag(values) U*, by default with the stored eigenvalues"""
        values = self.eigenvalues if eigenvalues is None else eigenvalues
        U = self.eigenvectors
        return (U * values[..., None, :]) @ np.conj(np.swapaxes(U, -1, -2))

    def residual(self, A: np.ndarray) -> float:
        """Reconstruction error relative to the operator norm of A"""
        scale = max(float(np.max(np.abs(self.eigenvalues))), 1e-300)
        return float(np.max(np.linalg.norm(self.reconstruct() - A, ord=2, axis=(-2, -1)))) / scale


@dataclass(frozen=True, eq=False)
class SpectralDistribution(BaseModel):
    """The distribution function lambda -> phi(|x| > lambda) of a field

    breakpoints hold the distinct singular values in ascending order;
    weights[i] is the phi-measure of the spectral projection {|x| >= breakpoints[i]}.
    """
    breakpoints: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_values(cls, magnitudes: np.ndarray, measures: np.ndarray) -> 'SpectralDistribution':
        """Pool eigenvalue magnitudes, each carrying a phi-measure"""
        magnitudes = np.abs(np.asarray(magnitudes, dtype=float)).ravel()
        measures = np.broadcast_to(np.asarray(measures, dtype=float), magnitudes.shape).ravel()
        keep = magnitudes > 0
        magnitudes, measures = magnitudes[keep], measures[keep]
        if magnitudes.size == 0:
            return cls(np.zeros(0), np.zeros(0))
        breakpoints, inverse = np.unique(magnitudes, return_inverse=True)
        per_value = np.bincount(inverse, weights=measures, minlength=breakpoints.size)
        weights = np.cumsum(per_value[::-1])[::-1]
        return cls(breakpoints, weights)

    @property
    def support_measure(self) -> float:
        """phi(supp |x|), the total weight at 0+"""
        return float(self.weights[0]) if self.weights.size else 0.0

    def measure_above(self, lam: float) -> float:
        """phi(|x| > lam)"""
        i = np.searchsorted(self.breakpoints, lam, side='right')
        return float(self.weights[i]) if i < self.weights.size else 0.0

    def weak_norm(self) -> float:
        """sup over lambda of lambda * phi(|x| > lambda), attained as lambda -> breakpoint-"""
        if self.breakpoints.size == 0:
            return 0.0
        return float(np.max(self.breakpoints * self.weights))


@dataclass(frozen=True)
class RcDecomposition:
    """A column part g and a row part h with g_k + h_k equal to the target sequence"""
    g: List
    h: List

    def validate_against(self, seq: List, tol: float):
        if len(seq) != len(self.g) or len(seq) != len(self.h):
            raise InvalidInput("Decomposition length differs from the sequence", 'dec')
        for target, col, row in zip(seq, self.g, self.h):
            scale = max(1.0, target.max_abs())
            if (col + row - target).max_abs() > tol * scale:
                raise InvalidInput("g_k + h_k does not reproduce the sequence", 'dec')
