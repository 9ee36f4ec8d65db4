import numpy as np
import pytest

from gridtransit import build_grid


def test_default_geometry():
    grid = build_grid(10.0, 0.5)
    assert grid.n_cells == 20
    assert grid.area == 100.0
    assert grid.centers[0] == 0.25
    assert grid.centers[-1] == 9.75
    assert np.allclose(np.diff(grid.centers), 0.5)


def test_single_cell_grid():
    grid = build_grid(2.0, 2.0)
    assert grid.n_cells == 1
    assert grid.centers[0] == 1.0


def test_rejects_non_tiling_cell_size():
    with pytest.raises(ValueError):
        build_grid(10.0, 0.3)


@pytest.mark.parametrize("side,cell", [(0.0, 0.5), (10.0, 0.0), (-1.0, 0.5)])
def test_rejects_non_positive_dimensions(side, cell):
    with pytest.raises(ValueError):
        build_grid(side, cell)
