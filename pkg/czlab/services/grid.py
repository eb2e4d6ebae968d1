"""
Grid service: dyadic cubes, dilations, discretized balls and the
boundary cube sets I(B_k + x, n).

Balls B_k have radius 2^-k and are centred at the centre of a level-K
cell. In d = 1 cell weights are exact interval overlaps; in d = 2 they are
the covered fraction of an s x s subsample of each cell.
"""

import logging
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np

from czlab.config import config_manager
from czlab.exceptions import InvalidInput, ResolutionError
from czlab.models.geometry import DyadicCube, DyadicDomain

logger = logging.getLogger(__name__)

_EQUAL_WEIGHTS = 1e-12


def resolution_limit(domain: DyadicDomain) -> int:
    """Finest level at which ball operators are allowed"""
    return domain.K - config_manager.get_app_config('RESOLUTION_GUARD')


def check_ball_level(domain: DyadicDomain, k: int):
    if k < 0:
        raise InvalidInput(f"Level {k} is negative", 'k')
    if k > resolution_limit(domain):
        raise ResolutionError(k, resolution_limit(domain))


def ball_radius_cells(domain: DyadicDomain, k: int) -> int:
    return 2 ** (domain.K - k)


def cube_of(domain: DyadicDomain, x: int, k: int) -> DyadicCube:
    """Q_{x,k}: the level-k cube containing finest cell x"""
    domain.check_level(k, 'k')
    coords = domain.coords(x)
    shift = domain.K - k
    return DyadicCube(k, tuple(c >> shift for c in coords))


def cube_center(domain: DyadicDomain, x: int, k: int) -> Tuple[float, ...]:
    """c_{x,k}"""
    return cube_of(domain, x, k).center


def _axis_span(domain: DyadicDomain, start: int, length: int) -> np.ndarray:
    idx = np.arange(start, start + length)
    if domain.periodic:
        return np.unique(np.mod(idx, domain.side))
    return idx[(idx >= 0) & (idx < domain.side)]


def dilate(domain: DyadicDomain, cube: DyadicCube, i: int) -> np.ndarray:
    """Sorted finest-cell indices covered by iQ (same centre, side i * l(Q))"""
    if i < 1 or i % 2 == 0:
        raise InvalidInput(f"Dilation factor must be a positive odd integer, got {i}", 'i')
    domain.check_level(cube.level)
    L = cube.side_cells(domain.K)
    reach = (i - 1) // 2 * L
    spans = [_axis_span(domain, c * L - reach, i * L) for c in cube.coords]
    grids = np.meshgrid(*spans, indexing='ij')
    cells = np.ravel_multi_index(tuple(g.ravel() for g in grids), domain.shape())
    return np.unique(cells)


@lru_cache(maxsize=None)
def ball_stencil(d: int, radius: int, subsampling: int) -> Tuple[np.ndarray, np.ndarray]:
    """Offsets (m, d) and coverage weights (m,) of a ball of `radius` cells"""
    offsets_1d = np.arange(-radius, radius + 1)
    if d == 1:
        upper = np.minimum(offsets_1d + 0.5, radius)
        lower = np.maximum(offsets_1d - 0.5, -radius)
        weights = np.clip(upper - lower, 0.0, None)
        offsets = offsets_1d[:, None]
    else:
        s = subsampling
        sub = (np.arange(s) + 0.5) / s - 0.5
        axis = (offsets_1d[:, None] + sub[None, :]).ravel()
        inside = (axis[:, None] ** 2 + axis[None, :] ** 2) < radius ** 2
        width = offsets_1d.size
        weights = inside.reshape(width, s, width, s).mean(axis=(1, 3)).ravel()
        grid = np.stack(np.meshgrid(offsets_1d, offsets_1d, indexing='ij'), axis=-1)
        offsets = grid.reshape(-1, 2)
    keep = weights > 0
    offsets, weights = offsets[keep], weights[keep]
    offsets.setflags(write=False)
    weights.setflags(write=False)
    return offsets, weights


def stencil(domain: DyadicDomain, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """Ball stencil for B_k on this domain, in cell-volume units"""
    check_ball_level(domain, k)
    return ball_stencil(domain.d, ball_radius_cells(domain, k),
                        config_manager.get_app_config('BALL_SUBSAMPLING'))


def kernel_on_grid(domain: DyadicDomain, k: int, size: int = None) -> np.ndarray:
    """Ball weights wrapped onto a periodic grid of `size` cells per axis, summing to 1"""
    offsets, weights = stencil(domain, k)
    size = domain.side if size is None else size
    kernel = np.zeros((size,) * domain.d)
    np.add.at(kernel, tuple(np.mod(offsets, size).T), weights)
    return kernel / weights.sum()


def ball_volume_cells(domain: DyadicDomain, k: int) -> float:
    """|B_k| measured in cell volumes"""
    return float(stencil(domain, k)[1].sum())


def weight_map(domain: DyadicDomain, x: int, k: int) -> np.ndarray:
    """Unnormalized coverage weight of every finest cell by B_k + x"""
    offsets, weights = stencil(domain, k)
    coords = np.array(domain.coords(x))
    targets = offsets + coords
    wmap = np.zeros(domain.shape())
    if domain.periodic:
        np.add.at(wmap, tuple(np.mod(targets, domain.side).T), weights)
    else:
        inside = np.all((targets >= 0) & (targets < domain.side), axis=1)
        np.add.at(wmap, tuple(targets[inside].T), weights[inside])
    return wmap


def ball_cells(domain: DyadicDomain, x: int, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """Cells met by B_k + x with their coverage weights (in [0, 1] per wrap)"""
    wmap = weight_map(domain, x, k)
    cells = np.flatnonzero(wmap)
    return cells, wmap.ravel()[cells]


def ball_fits(domain: DyadicDomain, k: int) -> np.ndarray:
    """Grid mask of finest cells whose ball B_k stays inside the window"""
    offsets, _ = stencil(domain, k)
    reach = int(np.max(np.abs(offsets)))
    axis = np.arange(domain.side)
    ok = (axis >= reach) & (axis < domain.side - reach)
    grids = np.meshgrid(*([ok] * domain.d), indexing='ij')
    return np.logical_and.reduce(grids)


def _cube_view(array: np.ndarray, d: int, n: int, L: int) -> np.ndarray:
    """View a finest-level grid as (cube coords..., inner coords...)"""
    if d == 1:
        return array.reshape(2 ** n, L)
    return array.reshape(2 ** n, L, 2 ** n, L).transpose(0, 2, 1, 3)


def partial_cube_mask(domain: DyadicDomain, wmap: np.ndarray, n: int) -> np.ndarray:
    """Cells of level-n cubes the ball covers only in part

    A cube is partial when its covered mass lies strictly between 0 and its
    volume, or when the coverage varies inside it. At n = K this keeps the
    half-covered end cells of a ball.
    """
    L = 2 ** (domain.K - n)
    view = _cube_view(wmap, domain.d, n, L)
    inner = tuple(range(domain.d, 2 * domain.d))
    tol = _EQUAL_WEIGHTS * max(1.0, float(wmap.max()))
    mass = view.sum(axis=inner)
    full = float(L ** domain.d)
    uneven = view.max(axis=inner) - view.min(axis=inner) > tol
    mask = uneven | ((mass > tol) & (mass < full * (1.0 - tol)))
    for axis in range(domain.d):
        mask = np.repeat(mask, L, axis=axis)
    return mask


def _check_boundary_levels(domain: DyadicDomain, k: int, n: int):
    check_ball_level(domain, k)
    if n <= k:
        raise InvalidInput(f"Boundary level n={n} must exceed ball level k={k}", 'n')
    domain.check_level(n, 'n')


def boundary_cubes(domain: DyadicDomain, x: int, k: int, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """I(B_k + x, n): cells of partially covered level-n cubes, clipped to the ball"""
    _check_boundary_levels(domain, k, n)
    wmap = weight_map(domain, x, k)
    wmap = np.where(partial_cube_mask(domain, wmap, n), wmap, 0.0)
    cells = np.flatnonzero(wmap)
    return cells, wmap.ravel()[cells]


def boundary_measure(domain: DyadicDomain, x: int, k: int, n: int) -> float:
    """|I(B_k + x, n)|"""
    _, weights = boundary_cubes(domain, x, k, n)
    return float(weights.sum()) * domain.cell_volume


@lru_cache(maxsize=None)
def _mkn_kernels(domain: DyadicDomain, k: int, n: int) -> Dict[Tuple[int, ...], np.ndarray]:
    """Per residue class of x inside its level-n cube: the masked, normalized kernel

    The partial/full pattern relative to x only depends on x modulo the
    level-n side on a torus, so one kernel serves every cell of a class.
    """
    L = 2 ** (domain.K - n)
    total = ball_volume_cells(domain, k)
    kernels = {}
    for residue in np.ndindex(*((L,) * domain.d)):
        x = domain.index(residue)
        wmap = weight_map(domain, x, k)
        masked = np.where(partial_cube_mask(domain, wmap, n), wmap, 0.0)
        # re-centre on offset 0 so the kernel reads h(x + a)
        kernel = np.roll(masked, tuple(-r for r in residue), axis=tuple(range(domain.d)))
        kernel.setflags(write=False)
        kernels[tuple(int(r) for r in residue)] = kernel / total
    return kernels


def mkn_kernels(domain: DyadicDomain, k: int, n: int) -> Dict[Tuple[int, ...], np.ndarray]:
    _check_boundary_levels(domain, k, n)
    if not domain.periodic:
        raise InvalidInput("Residue kernels only exist on the periodic domain", 'boundary_mode')
    return _mkn_kernels(domain, k, n)
