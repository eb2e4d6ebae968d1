"""
Tests for the grid service: cubes, dilations, balls and boundary sets
"""

import numpy as np
import pytest

from czlab.exceptions import InvalidInput, ResolutionError
from czlab.models.geometry import DyadicCube, DyadicDomain
from czlab.services import grid


def test_cube_of_finest_cell(line):
    cube = grid.cube_of(line, 37, 3)
    assert cube == DyadicCube(3, (37 >> 3,))
    assert grid.cube_of(line, 37, line.K) == DyadicCube(6, (37,))


def test_cube_center(line):
    assert grid.cube_center(line, 37, 3) == pytest.approx((4.5 / 8,))
    assert grid.cube_center(line, 0, 0) == pytest.approx((0.5,))


def test_ball_cells_wrap_on_the_torus(line):
    cells, weights = grid.ball_cells(line, 0, 2)
    # radius 16 cells, half-covered cells at both ends
    assert len(cells) == 33
    assert weights.sum() == pytest.approx(grid.ball_volume_cells(line, 2))
    assert weights.max() == pytest.approx(1.0)
    assert line.side - 1 in cells


def test_ball_cells_are_clipped_in_interior_mode():
    domain = DyadicDomain(1, 6, 'interior')
    cells, weights = grid.ball_cells(domain, 0, 2)
    assert cells.min() == 0 and cells.max() == 16
    assert weights.sum() == pytest.approx(16.5)


@pytest.mark.parametrize('level', [2, 3, 4])
def test_periodic_dilation_covers_five_cubes(line, level):
    cube = DyadicCube(level, (0,))
    cells = grid.dilate(line, cube, 5)
    L = cube.side_cells(line.K)
    assert len(cells) == min(5 * L, line.side)
    assert np.all(np.diff(cells) > 0)


def test_interior_dilation_is_clipped():
    domain = DyadicDomain(1, 6, 'interior')
    cells = grid.dilate(domain, DyadicCube(3, (0,)), 5)
    # two cubes to the left fall outside the window
    assert len(cells) == 3 * 8
    assert cells[0] == 0


def test_dilation_in_the_plane(plane):
    cells = grid.dilate(plane, DyadicCube(2, (1, 1)), 3)
    assert len(cells) == (3 * 4) ** 2


@pytest.mark.parametrize('factor', [0, 2, 4, -1])
def test_even_or_nonpositive_dilation_is_rejected(line, factor):
    with pytest.raises(InvalidInput):
        grid.dilate(line, DyadicCube(2, (0,)), factor)


def test_ball_volume_in_one_dimension(line):
    # B_k has radius 2^(K-k) cells, so length 2^(K-k+1) cells
    for k in range(0, line.K - 1):
        assert grid.ball_volume_cells(line, k) == pytest.approx(2.0 ** (line.K - k + 1))


def test_ball_volume_in_the_plane_approximates_the_disc(plane):
    r = 2 ** (plane.K - 1)
    assert grid.ball_volume_cells(plane, 1) == pytest.approx(np.pi * r * r, rel=0.05)


def test_resolution_guard(line):
    assert grid.resolution_limit(line) == line.K - 2
    with pytest.raises(ResolutionError):
        grid.stencil(line, line.K - 1)
    with pytest.raises(InvalidInput):
        grid.stencil(line, -1)


def test_kernel_is_normalized(plane):
    kernel = grid.kernel_on_grid(plane, 1)
    assert kernel.sum() == pytest.approx(1.0)
    assert np.allclose(kernel, np.flip(np.roll(kernel, -1, axis=(0, 1)), axis=(0, 1)))


def test_boundary_cells_in_one_dimension_lie_at_the_ends(line):
    # a 1d ball centred in a cell meets at most two partial level-n cubes
    k, n = 2, 4
    cells, weights = grid.boundary_cubes(line, 10, k, n)
    cubes = {c >> (line.K - n) for c in cells}
    assert 1 <= len(cubes) <= 2
    assert np.all(weights > 0)


def test_boundary_at_the_finest_level_is_the_two_end_cells(line):
    cells, weights = grid.boundary_cubes(line, 20, 2, line.K)
    assert list(cells) == [4, 36]
    assert np.allclose(weights, 0.5)
    assert grid.boundary_measure(line, 20, 2, line.K) == pytest.approx(line.cell_volume)


def test_boundary_in_the_plane_at_the_finest_level(plane):
    cells, weights = grid.boundary_cubes(plane, 0, 1, plane.K)
    assert len(cells) > 0
    assert np.all((weights > 0) & (weights < 1))


def test_boundary_measure_shrinks_with_n(line):
    k = 2
    measures = [grid.boundary_measure(line, 5, k, n) for n in range(k + 1, line.K + 1)]
    assert measures[-1] <= measures[0]
    assert all(m <= 2.0 ** -n * 2 + 1e-12 for m, n in zip(measures, range(k + 1, line.K + 1)))


def test_boundary_levels_must_be_ordered(line):
    with pytest.raises(InvalidInput):
        grid.boundary_cubes(line, 0, 3, 3)


def test_ball_fits_marks_the_interior(line):
    fits = grid.ball_fits(line, 2)
    reach = 2 ** (line.K - 2)
    assert not fits[:reach].any()
    assert fits[reach:line.side - reach].all()
