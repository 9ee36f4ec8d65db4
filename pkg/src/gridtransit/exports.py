"""Deterministic CSV readers and writers.

All floats are rendered with ``repr``, which is the shortest string that
round-trips the exact double, so files are byte-stable across runs and
platforms; rows are emitted in a fixed order with plain "\n" endings.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .cost import CostBreakdown
from .demand import DIRECTION_NAMES, DemandAggregates, ODMatrix
from .grid import build_grid


def fmt(value) -> str:
    return repr(float(value))


def write_od_csv(od: ODMatrix, path: str | Path) -> None:
    """Demand matrix as sparse 1-based cell-index rows under a metadata header."""
    grid = od.grid
    lines = [
        f"# side_length,{fmt(grid.side_length)}",
        f"# cell_size,{fmt(grid.cell_size)}",
        f"# total_demand,{fmt(od.total_demand)}",
        "xo_idx,yo_idx,xd_idx,yd_idx,density",
    ]
    n = grid.n_cells
    density = od.density
    for xo in range(n):
        for yo in range(n):
            block = density[xo, yo]
            if not block.any():
                continue
            for xd in range(n):
                for yd in range(n):
                    value = block[xd, yd]
                    if value != 0.0:
                        lines.append(
                            f"{xo + 1},{yo + 1},{xd + 1},{yd + 1},{fmt(value)}"
                        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_od_csv(path: str | Path) -> ODMatrix:
    text = Path(path).read_text().splitlines()
    meta = {}
    body_start = 0
    for i, line in enumerate(text):
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(",")
            meta[key.strip()] = float(value)
        else:
            body_start = i
            break
    for key in ("side_length", "cell_size", "total_demand"):
        if key not in meta:
            raise ValueError(f"missing '{key}' metadata header")
    grid = build_grid(meta["side_length"], meta["cell_size"])
    n = grid.n_cells
    density = np.zeros((n, n, n, n))
    rows = csv.reader(text[body_start:])
    header = next(rows)
    if header != ["xo_idx", "yo_idx", "xd_idx", "yd_idx", "density"]:
        raise ValueError("unexpected demand CSV header")
    for row in rows:
        if not row:
            continue
        xo, yo, xd, yd = (int(v) - 1 for v in row[:4])
        if not all(0 <= v < n for v in (xo, yo, xd, yd)):
            raise ValueError(f"cell index out of range in row {row}")
        density[xo, yo, xd, yd] = float(row[4])
    return ODMatrix(grid=grid, density=density, total_demand=meta["total_demand"])


def write_aggregates_csv(agg: DemandAggregates, path: str | Path) -> None:
    """Per-cell, per-direction boarding/alighting/flux/transfer rates."""
    lines = ["direction,x_idx,y_idx,lambda_bo,lambda_al,lambda_fl,lambda_tr"]
    n = agg.grid.n_cells
    for d, name in enumerate(DIRECTION_NAMES):
        for x in range(n):
            for y in range(n):
                lines.append(
                    f"{name},{x + 1},{y + 1},{fmt(agg.bo[d, x, y])},"
                    f"{fmt(agg.al[d, x, y])},{fmt(agg.fl[d, x, y])},"
                    f"{fmt(agg.tr[d, x, y])}"
                )
    Path(path).write_text("\n".join(lines) + "\n")


BREAKDOWN_COLUMNS = (
    "pattern", "D", "vot", "network", "method",
    "agency_per_pax", "access_per_pax", "wait_per_pax",
    "ride_per_pax", "transfer_per_pax", "total_per_pax",
)


def breakdown_row(
    pattern: str, D: float, vot: float, network: str, method: str,
    breakdown: CostBreakdown, total_demand: float,
) -> dict:
    # vot is the $/hr conversion, so agency time-cost per passenger is
    # Z_A / (vot * demand) and the six component columns sum to the total
    return {
        "pattern": pattern,
        "D": D,
        "vot": vot,
        "network": network,
        "method": method,
        "agency_per_pax": breakdown.Z_A / (vot * total_demand),
        "access_per_pax": breakdown.T_a / total_demand,
        "wait_per_pax": breakdown.T_w / total_demand,
        "ride_per_pax": breakdown.T_r / total_demand,
        "transfer_per_pax": breakdown.T_t / total_demand,
        "total_per_pax": breakdown.Z_per_passenger,
    }


def write_breakdown_csv(rows, path: str | Path) -> None:
    """Per-passenger cost components; accepts one row dict or a list of them."""
    if isinstance(rows, dict):
        rows = [rows]
    lines = [",".join(BREAKDOWN_COLUMNS)]
    for row in rows:
        cells = []
        for col in BREAKDOWN_COLUMNS:
            value = row[col]
            cells.append(value if isinstance(value, str) else fmt(value))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def write_heatmap_csv(od: ODMatrix, path: str | Path) -> None:
    """Trip-end intensity per cell: origin plus destination demand density."""
    n = od.grid.n_cells
    d2 = od.grid.cell_size ** 2
    origin_mass = od.density.sum(axis=(2, 3))
    dest_mass = od.density.sum(axis=(0, 1))
    value = d2 * (origin_mass + dest_mass)
    lines = ["x_idx,y_idx,value"]
    for x in range(n):
        for y in range(n):
            lines.append(f"{x + 1},{y + 1},{fmt(value[x, y])}")
    Path(path).write_text("\n".join(lines) + "\n")
