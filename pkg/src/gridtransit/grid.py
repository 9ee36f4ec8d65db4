"""Square study area discretized into uniform square cells.

All spatial quantities in this package live on this grid: demand densities
are evaluated at cell centers and integrals become midpoint sums weighted by
the cell size (line integrals) or its square (area integrals).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Grid:
    """A square of side ``side_length`` split into ``n_cells**2`` square cells.

    ``centers[k]`` is the center coordinate of 0-based cell ``k`` along either
    axis: (k + 1/2) * cell_size.
    """

    side_length: float
    cell_size: float
    n_cells: int
    centers: np.ndarray

    @property
    def area(self) -> float:
        return self.side_length * self.side_length


def build_grid(side_length: float, cell_size: float) -> Grid:
    """Build a grid, rejecting geometries the midpoint scheme cannot tile.

    ``side_length`` must be an integer multiple of ``cell_size`` (within
    1e-9 relative); otherwise cells would not tile the square.
    """
    if side_length <= 0.0:
        raise ValueError(f"side_length must be positive, got {side_length}")
    if cell_size <= 0.0:
        raise ValueError(f"cell_size must be positive, got {cell_size}")
    ratio = side_length / cell_size
    n = int(round(ratio))
    if n < 1 or abs(ratio - n) > 1e-9 * max(1.0, ratio):
        raise ValueError(
            f"side_length {side_length} is not an integer multiple of "
            f"cell_size {cell_size}; cells must tile the square exactly"
        )
    centers = (np.arange(n, dtype=float) + 0.5) * cell_size
    return Grid(
        side_length=float(side_length),
        cell_size=float(cell_size),
        n_cells=n,
        centers=centers,
    )
