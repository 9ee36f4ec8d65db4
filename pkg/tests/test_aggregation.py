"""OD aggregation kernels against hand counts and a loop-based reference."""

import numpy as np
import pytest

from gridtransit import ODMatrix, aggregate_demand, available_backends, build_grid
from gridtransit.demand import DIR_E, DIR_N, DIR_S, DIR_W, reduce_flux

from _oracles import passenger_km, route_od_loops, same_cell_mass, transfer_mass

BACKENDS = available_backends()


def _single_pair_od(grid, xo, yo, xd, yd, trips):
    density = np.zeros((grid.n_cells,) * 4)
    density[xo, yo, xd, yd] = trips / grid.cell_size**4
    return ODMatrix(grid=grid, density=density, total_demand=trips)


@pytest.mark.parametrize("backend", BACKENDS)
def test_single_l_pair_placement(backend):
    # 100 trips/hr from (0,1) to (2,3) on a 4x4 half-km grid: the horizontal
    # half rides E along row 1 and turns N at x=2, the vertical half rides N
    # along column 0 and turns E at y=3
    grid = build_grid(2.0, 0.5)
    agg = aggregate_demand(grid, _single_pair_od(grid, 0, 1, 2, 3, 100.0), backend)
    per_area = 0.5 * 100.0 / 0.25   # half the trips over one cell area
    per_km = 0.5 * 100.0 / 0.5      # half the trips over one cell width

    assert agg.bo[DIR_E, 0, 1] == per_area
    assert agg.bo[DIR_N, 0, 1] == per_area
    assert agg.bo.sum() == 2.0 * per_area
    assert agg.al[DIR_N, 2, 3] == per_area
    assert agg.al[DIR_E, 2, 3] == per_area
    assert agg.al.sum() == 2.0 * per_area
    assert agg.tr[DIR_N, 2, 1] == per_area
    assert agg.tr[DIR_E, 0, 3] == per_area
    assert agg.tr.sum() == 2.0 * per_area

    for x in (0, 1):
        assert agg.fl[DIR_E, x, 1] == per_km   # boarding cell in, corner out
        assert agg.fl[DIR_E, x, 3] == per_km
    for y in (1, 2):
        assert agg.fl[DIR_N, 2, y] == per_km
        assert agg.fl[DIR_N, 0, y] == per_km
    assert agg.fl.sum() == 8.0 * per_km


@pytest.mark.parametrize("backend", BACKENDS)
def test_single_pair_reverse_quadrant(backend):
    grid = build_grid(2.0, 0.5)
    agg = aggregate_demand(grid, _single_pair_od(grid, 3, 3, 1, 0, 80.0), backend)
    per_area = 0.5 * 80.0 / 0.25
    assert agg.bo[DIR_W, 3, 3] == per_area
    assert agg.bo[DIR_S, 3, 3] == per_area
    assert agg.tr[DIR_S, 1, 3] == per_area
    assert agg.tr[DIR_W, 3, 0] == per_area
    assert agg.al[DIR_S, 1, 0] == per_area
    assert agg.al[DIR_W, 1, 0] == per_area
    # W legs span x in {3,2}, S legs span y in {3,2,1}
    per_km = 0.5 * 80.0 / 0.5
    assert all(agg.fl[DIR_W, x, 3] == per_km for x in (3, 2))
    assert all(agg.fl[DIR_W, x, 0] == per_km for x in (3, 2))
    assert all(agg.fl[DIR_S, 1, y] == per_km for y in (3, 2, 1))
    assert all(agg.fl[DIR_S, 3, y] == per_km for y in (3, 2, 1))
    assert agg.fl.sum() == 10.0 * per_km


@pytest.mark.parametrize("backend", BACKENDS)
def test_same_row_pair_never_transfers(backend):
    grid = build_grid(2.0, 0.5)
    agg = aggregate_demand(grid, _single_pair_od(grid, 0, 2, 3, 2, 50.0), backend)
    assert agg.bo[DIR_E, 0, 2] == 50.0 / 0.25
    assert agg.al[DIR_E, 3, 2] == 50.0 / 0.25
    assert agg.tr.sum() == 0.0
    assert all(agg.fl[DIR_E, x, 2] == 50.0 / 0.5 for x in (0, 1, 2))
    assert agg.fl.sum() == 3.0 * 50.0 / 0.5


@pytest.mark.parametrize("backend", BACKENDS)
def test_same_cell_demand_is_ignored(backend):
    grid = build_grid(2.0, 0.5)
    agg = aggregate_demand(grid, _single_pair_od(grid, 2, 2, 2, 2, 10.0), backend)
    assert agg.bo.sum() == 0.0
    assert agg.al.sum() == 0.0
    assert agg.fl.sum() == 0.0
    assert agg.tr.sum() == 0.0


@pytest.mark.parametrize("backend", BACKENDS)
def test_kernels_match_loop_reference(backend):
    grid = build_grid(3.0, 0.5)
    rng = np.random.default_rng(11)
    density = rng.uniform(0.0, 5.0, (6, 6, 6, 6))
    density[rng.uniform(size=density.shape) < 0.3] = 0.0
    od = ODMatrix(
        grid=grid, density=density,
        total_demand=float(density.sum()) * grid.cell_size**4,
    )
    agg = aggregate_demand(grid, od, backend)
    want = route_od_loops(density, grid.cell_size)
    for got, ref in zip((agg.bo, agg.al, agg.fl, agg.tr), want):
        scale = max(1.0, float(np.abs(ref).max()))
        assert float(np.abs(got - ref).max()) <= 1e-12 * scale


def test_backends_agree_on_default_grid(od_of):
    if len(BACKENDS) < 2:
        pytest.skip("only one aggregation backend available")
    od = od_of("monocentric", 10000.0)
    results = [aggregate_demand(od.grid, od, b) for b in BACKENDS]
    first = results[0]
    for other in results[1:]:
        for name in ("bo", "al", "fl", "tr"):
            a, b = getattr(first, name), getattr(other, name)
            scale = max(1.0, float(np.abs(a).max()))
            assert float(np.abs(a - b).max()) <= 1e-12 * scale


def test_aggregation_is_deterministic(od_of):
    od = od_of("chessboard2", 10000.0)
    a = aggregate_demand(od.grid, od)
    b = aggregate_demand(od.grid, od)
    for name in ("bo", "al", "fl", "tr"):
        assert np.array_equal(getattr(a, name), getattr(b, name))


def test_flux_reduction_fields(agg_of):
    agg = agg_of("commute", 10000.0)
    want_row = np.maximum(agg.fl[DIR_E], agg.fl[DIR_W]).max(axis=0)
    want_col = np.maximum(agg.fl[DIR_N], agg.fl[DIR_S]).max(axis=1)
    assert np.array_equal(agg.row_flux_ew, want_row)
    assert np.array_equal(agg.col_flux_ns, want_col)
    assert agg.flux_ew_max == want_row.max()
    assert agg.flux_ns_max == want_col.max()
    red = reduce_flux(agg)
    assert np.array_equal(red.row_ew, want_row)
    assert red.ns_max == agg.flux_ns_max


def test_uniform_boardings_exclude_same_cell(od_of, agg_of, grid):
    od = od_of("uniform", 10000.0)
    agg = agg_of("uniform", 10000.0)
    d2 = grid.cell_size**2
    routed = 10000.0 - same_cell_mass(od.density, grid.cell_size)
    assert routed == 9975.0
    assert abs(float(agg.bo.sum()) * d2 - routed) <= 1e-9 * routed
    assert abs(float(agg.al.sum()) * d2 - routed) <= 1e-9 * routed


def test_boardings_balance_alightings(agg_of, grid):
    # final alightings and initial boardings both count each routed trip
    # once; leg count exceeds trip count by exactly the transfers
    d2 = grid.cell_size**2
    for pattern in ("uniform", "commute", "chessboard3"):
        agg = agg_of(pattern, 10000.0)
        trips_on = float(agg.bo.sum()) * d2
        trips_off = float(agg.al.sum()) * d2
        legs = float((agg.bo + agg.tr).sum()) * d2
        assert abs(trips_on - trips_off) <= 1e-9 * trips_on
        assert abs(legs - trips_on - float(agg.tr.sum()) * d2) <= 1e-9 * legs


def test_transfer_total_is_l_shaped_mass(od_of, agg_of, grid):
    od = od_of("monocentric", 10000.0)
    agg = agg_of("monocentric", 10000.0)
    want = transfer_mass(od.density, grid.cell_size)
    got = float(agg.tr.sum()) * grid.cell_size**2
    assert abs(got - want) <= 1e-9 * want


def test_passenger_km_identity(od_of, agg_of, grid):
    for pattern in ("uniform", "chessboard1"):
        od = od_of(pattern, 10000.0)
        agg = agg_of(pattern, 10000.0)
        want = passenger_km(od.density, grid.cell_size, grid.centers)
        got = float(agg.fl.sum()) * grid.cell_size**2
        assert abs(got - want) <= 1e-9 * want


def test_uniform_demand_symmetries(agg_of):
    agg = agg_of("uniform", 10000.0)
    scale = float(agg.bo.max())
    # mirror in x swaps E and W
    assert np.allclose(agg.bo[DIR_E], np.flip(agg.bo[DIR_W], axis=0),
                       rtol=0.0, atol=1e-12 * scale)
    assert np.allclose(agg.fl[DIR_E], np.flip(agg.fl[DIR_W], axis=0),
                       rtol=0.0, atol=1e-12 * float(agg.fl.max()))
    # swapping the axes swaps the E and N families
    assert np.allclose(agg.bo[DIR_N], agg.bo[DIR_E].T,
                       rtol=0.0, atol=1e-12 * scale)
    assert np.allclose(agg.tr[DIR_N], agg.tr[DIR_E].T,
                       rtol=0.0, atol=1e-12 * float(agg.tr.max()))
