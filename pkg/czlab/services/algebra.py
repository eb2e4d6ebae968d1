"""
Matrix algebra service: the tracial algebra M_n with spectral calculus
and the projection lattice.

Every function accepts a single n x n matrix or a stack (..., n, n) and
works batch-wise, so a whole field can be processed in one call.
"""

import logging
from typing import Callable, Optional, Sequence

import numpy as np

from czlab.config import config_manager
from czlab.exceptions import InvalidInput
from czlab.models.spectral import SpectralData

logger = logging.getLogger(__name__)


def _tol(name: str, value: Optional[float]) -> float:
    return config_manager.tolerance(name) if value is None else float(value)


def _adjoint(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def ensure_hermitian(A, eps: float = None) -> np.ndarray:
    """Return A as a complex array, symmetrized, after checking it is Hermitian"""
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise InvalidInput(f"Expected square matrices, got shape {A.shape}", 'A')
    eps = _tol('eps_herm', eps)
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if A.size and float(np.max(np.abs(A - _adjoint(A)))) > eps * scale:
        raise InvalidInput("Matrix is not Hermitian within tolerance", 'A')
    return 0.5 * (A + _adjoint(A))


def spectral_decompose(A) -> SpectralData:
    """Eigenpairs of a Hermitian matrix (or stack), eigenvalues ascending"""
    A = ensure_hermitian(A)
    eigenvalues, eigenvectors = np.linalg.eigh(A)
    return SpectralData(eigenvalues, eigenvectors)


def func_calc(A, g: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """U g(Lambda) U*; g acts entrywise on the real eigenvalues"""
    spectral = spectral_decompose(A)
    values = np.asarray(g(spectral.eigenvalues), dtype=float)
    values = np.broadcast_to(values, spectral.eigenvalues.shape)
    return spectral.reconstruct(values)


def _operator_scale(eigenvalues: np.ndarray) -> np.ndarray:
    return np.max(np.abs(eigenvalues), axis=-1, keepdims=True)


def spectral_proj_leq(A, lam: float, include_zero: bool = False,
                      eps_eig: float = None, eps_zero: float = None) -> np.ndarray:
    """1_{(0, lam]}(A) for PSD A; with include_zero the interval is [0, lam]

    Eigenvalues within eps_eig * ||A|| of lam count as <= lam; eigenvalues
    within eps_zero of 0 count as 0.
    """
    if lam <= 0:
        raise InvalidInput(f"Threshold must be positive, got {lam}", 'lam')
    spectral = spectral_decompose(A)
    values = spectral.eigenvalues
    scale = _operator_scale(values)
    upper = values <= lam + _tol('eps_eig', eps_eig) * np.maximum(scale, lam)
    if include_zero:
        mask = upper
    else:
        mask = upper & (values > _tol('eps_zero', eps_zero) * np.maximum(scale, 1.0))
    return spectral.reconstruct(mask.astype(float))


def spectral_proj_gt(A, lam: float, eps_eig: float = None) -> np.ndarray:
    """1_{(lam, inf)}(A), the complement of the closed threshold projection"""
    if lam <= 0:
        raise InvalidInput(f"Threshold must be positive, got {lam}", 'lam')
    spectral = spectral_decompose(A)
    values = spectral.eigenvalues
    scale = _operator_scale(values)
    mask = values > lam + _tol('eps_eig', eps_eig) * np.maximum(scale, lam)
    return spectral.reconstruct(mask.astype(float))


def positive_parts(A):
    """Split a Hermitian A as A_plus - A_minus with both parts PSD"""
    spectral = spectral_decompose(A)
    values = spectral.eigenvalues
    return spectral.reconstruct(np.maximum(values, 0.0)), spectral.reconstruct(np.maximum(-values, 0.0))


def support_projection(S, eps_rank: float = None) -> np.ndarray:
    """Projection onto the range of a PSD matrix, rank cut at eps_rank relative"""
    spectral = spectral_decompose(S)
    values = spectral.eigenvalues
    cutoff = _tol('eps_rank', eps_rank) * np.maximum(_operator_scale(values), 1.0)
    return spectral.reconstruct((values > cutoff).astype(float))


def proj_join(ps: Sequence, n: int = None, eps_rank: float = None) -> np.ndarray:
    """Projection onto the sum of the ranges of ps"""
    ps = list(ps)
    if not ps:
        if n is None:
            raise InvalidInput("Empty join needs the matrix dimension", 'n')
        return np.zeros((n, n), dtype=np.complex128)
    shapes = {np.shape(p) for p in ps}
    if len(shapes) != 1:
        raise InvalidInput("All projections must share one shape", 'ps')
    # range(sum of PSD) = sum of ranges
    return support_projection(sum(np.asarray(p, dtype=np.complex128) for p in ps), eps_rank)


def proj_meet(ps: Sequence, n: int = None, eps_rank: float = None) -> np.ndarray:
    """Projection onto the intersection of the ranges of ps"""
    ps = list(ps)
    if not ps:
        if n is None:
            raise InvalidInput("Empty meet needs the matrix dimension", 'n')
        return np.eye(n, dtype=np.complex128)
    eye = np.eye(np.shape(ps[0])[-1])
    return eye - proj_join([eye - np.asarray(p) for p in ps], eps_rank=eps_rank)


def is_projection(P, eps: float = None) -> bool:
    """Hermitian, idempotent (and hence PSD) within eps_proj"""
    P = np.asarray(P, dtype=np.complex128)
    if P.size == 0:
        return True
    eps = _tol('eps_proj', eps)
    if float(np.max(np.abs(P - _adjoint(P)))) > eps:
        return False
    return float(np.max(np.linalg.norm(P @ P - P, ord=2, axis=(-2, -1)))) <= eps


def trace(A) -> np.ndarray:
    """Real part of the matrix trace"""
    return np.real(np.trace(np.asarray(A), axis1=-2, axis2=-1))


def singular_values(A) -> np.ndarray:
    """Eigenvalues of |A| = (A*A)^(1/2)"""
    return np.linalg.svd(np.asarray(A, dtype=np.complex128), compute_uv=False)


def op_norm(A) -> np.ndarray:
    A = np.asarray(A, dtype=np.complex128)
    if A.size == 0:
        return np.zeros(A.shape[:-2])
    return singular_values(A)[..., 0]


def schatten_norm(A, p: float) -> np.ndarray:
    """(tr |A|^p)^(1/p); p = inf gives the operator norm"""
    if p < 1:
        raise InvalidInput(f"Schatten exponent must be >= 1, got {p}", 'p')
    s = singular_values(A)
    if np.isinf(p):
        return s[..., 0] if s.shape[-1] else np.zeros(s.shape[:-1])
    return np.sum(s ** p, axis=-1) ** (1.0 / p)


def modulus(A) -> np.ndarray:
    """|A| = (A*A)^(1/2)"""
    A = np.asarray(A, dtype=np.complex128)
    return psd_sqrt(_adjoint(A) @ A)


def psd_sqrt(S) -> np.ndarray:
    """Square root of a PSD matrix; negative rounding eigenvalues are clipped to 0"""
    return func_calc(S, lambda x: np.sqrt(np.maximum(x, 0.0)))


def commutator_norm(A, B) -> np.ndarray:
    A = np.asarray(A)
    B = np.asarray(B)
    return op_norm(A @ B - B @ A)
