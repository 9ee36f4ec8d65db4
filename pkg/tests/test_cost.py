"""Cost evaluator closed forms and the posynomial assembly."""

import numpy as np
import pytest

from gridtransit import (
    HETEROGENEOUS,
    HOMOGENEOUS,
    DesignVariables,
    ModelParams,
    ODMatrix,
    aggregate_demand,
    build_gp,
    build_grid,
    capacity_utilization,
    design_from_vector,
    design_to_vector,
    eval_posynomial,
    evaluate_cost,
)
from gridtransit.demand import DemandAggregates


def _empty_aggregates(grid):
    n = grid.n_cells
    zeros = np.zeros((4, n, n))
    return DemandAggregates(
        grid=grid, total_demand=1.0, bo=zeros, al=zeros, fl=zeros, tr=zeros,
        row_flux_ew=np.zeros(n), col_flux_ns=np.zeros(n),
        flux_ew_max=0.0, flux_ns_max=0.0,
    )


def test_agency_closed_forms_without_demand(grid, params):
    # with no demand the cost is pure agency: for a scalar design with both
    # axes at (delta, h) on an R x R city,
    #   line km         = 4 delta R^2
    #   stations        = 4 delta^2 R^2
    #   vehicle km      = 4 (delta/h) R^2
    #   vehicle hours   = 4 R^2 (delta/h) (1/v + tau delta)
    agg = _empty_aggregates(grid)
    r2 = grid.side_length**2
    for delta, h in [(0.7, 0.13), (0.25, 0.5), (2.0, 0.02)]:
        design = DesignVariables(
            kind=HOMOGENEOUS, delta_ew=delta, delta_ns=delta, h_ew=h, h_ns=h
        )
        b = evaluate_cost(design, agg, params)
        assert b.N_l == pytest.approx(4.0 * delta * r2, rel=1e-12)
        assert b.N_s == pytest.approx(4.0 * delta**2 * r2, rel=1e-12)
        assert b.N_k == pytest.approx(4.0 * r2 * delta / h, rel=1e-12)
        assert b.N_h == pytest.approx(
            4.0 * r2 * (delta / h) * (1.0 / params.v + params.tau * delta),
            rel=1e-12,
        )
        assert b.Z_P == 0.0
        assert b.Z == pytest.approx(b.Z_A / params.mu, rel=1e-12)


def test_agency_heterogeneous_sums(grid, params):
    agg = _empty_aggregates(grid)
    n = grid.n_cells
    rng = np.random.default_rng(3)
    dew, dns = rng.uniform(0.1, 2.0, n), rng.uniform(0.1, 2.0, n)
    hew, hns = rng.uniform(0.05, 0.5, n), rng.uniform(0.05, 0.5, n)
    design = DesignVariables(
        kind=HETEROGENEOUS, delta_ew=dew, delta_ns=dns, h_ew=hew, h_ns=hns
    )
    b = evaluate_cost(design, agg, params)
    side, d = grid.side_length, grid.cell_size
    assert b.N_l == pytest.approx(2.0 * side * d * (dew.sum() + dns.sum()), rel=1e-12)
    assert b.N_s == pytest.approx(4.0 * d * d * dew.sum() * dns.sum(), rel=1e-12)
    qe, qn = (dew / hew).sum(), (dns / hns).sum()
    assert b.N_k == pytest.approx(2.0 * side * d * (qe + qn), rel=1e-12)
    want_nh = (2.0 * side * d / params.v) * (qe + qn) + (
        2.0 * params.tau * d * d
    ) * (qe * dns.sum() + qn * dew.sum())
    assert b.N_h == pytest.approx(want_nh, rel=1e-12)


def test_passenger_components_single_pair(params):
    # one L-shaped pair: 100 trips/hr from (0,1) to (2,3) on a 4x4 half-km
    # grid, so both legs are 1 km long
    grid = build_grid(2.0, 0.5)
    density = np.zeros((4, 4, 4, 4))
    density[0, 1, 2, 3] = 100.0 / grid.cell_size**4
    od = ODMatrix(grid=grid, density=density, total_demand=100.0)
    agg = aggregate_demand(grid, od)
    de, dn, he, hn = 0.4, 0.8, 0.2, 0.05
    design = DesignVariables(
        kind=HOMOGENEOUS, delta_ew=de, delta_ns=dn, h_ew=he, h_ns=hn
    )
    b = evaluate_cost(design, agg, params)
    m, dx, dy = 100.0, 1.0, 1.0
    # both trip ends walk to both line families
    want_ta = (params.beta_w / (4.0 * params.v_w)) * 2.0 * m * (1 / de + 1 / dn)
    # one initial boarding and one transfer wait half a headway on each axis
    want_tw = 0.5 * m * (he + hn)
    # cruise over the L distance plus one dwell per crossed line
    want_tr = m * (dx + dy) / params.v + params.tau * m * (dy * de + dx * dn)
    assert b.T_a == pytest.approx(want_ta, rel=1e-12)
    assert b.T_w == pytest.approx(want_tw, rel=1e-12)
    assert b.T_r == pytest.approx(want_tr, rel=1e-12)
    assert b.T_t == pytest.approx(params.sigma * m, rel=1e-12)
    assert b.Z == pytest.approx(b.Z_A / params.mu + b.Z_P, rel=1e-12)
    assert b.Z_per_passenger == pytest.approx(b.Z / m, rel=1e-12)


def test_gp_structure_heterogeneous(agg_of, params):
    agg = agg_of("monocentric", 10000.0)
    problem, constant = build_gp(HETEROGENEOUS, agg, params)
    assert len(problem.variable_names) == 80
    assert problem.variable_names[0] == "delta_ew[0]"
    assert problem.variable_names[79] == "h_ns[19]"
    assert problem.variable_roles.count("line_density") == 40
    assert problem.variable_roles.count("headway") == 40
    # default prices zero the line and station terms: per axis that leaves
    # 20 vehicle, 20 access, 20 wait, 20 crossing and 400 dwell monomials
    assert problem.objective.n_terms == 960
    assert len(problem.inequalities) == 40
    assert all(c.n_terms == 1 for c in problem.inequalities)
    assert len(problem.equalities) == 0
    d2 = agg.grid.cell_size**2
    want_const = d2 * float(agg.fl.sum()) / params.v + params.sigma * d2 * float(
        agg.tr.sum()
    )
    assert constant == pytest.approx(want_const, rel=1e-12)


def test_gp_structure_with_infrastructure_prices(agg_of, params):
    # line-length terms merge into the existing pure-density monomials;
    # station terms add one density-pair monomial per row/column pair
    agg = agg_of("monocentric", 10000.0)
    priced = params.with_overrides(pi_l=1.0, pi_s=1.0)
    problem, _ = build_gp(HETEROGENEOUS, agg, priced)
    assert problem.objective.n_terms == 960 + 400


def test_gp_structure_homogeneous(agg_of, params):
    problem, _ = build_gp(HOMOGENEOUS, agg_of("uniform", 10000.0), params)
    assert problem.variable_names == ("delta_ew", "delta_ns", "h_ew", "h_ns")
    assert problem.objective.n_terms == 10
    assert len(problem.inequalities) == 2


def test_gp_matches_evaluator(agg_of, params):
    rng = np.random.default_rng(5)
    agg = agg_of("commute", 10000.0)
    n = agg.grid.n_cells
    for kind, size in ((HETEROGENEOUS, 4 * n), (HOMOGENEOUS, 4)):
        problem, constant = build_gp(kind, agg, params)
        for _ in range(5):
            r = np.exp(rng.uniform(np.log(0.05), np.log(2.0), size))
            design = design_from_vector(kind, n, r)
            want = evaluate_cost(design, agg, params).Z
            got = eval_posynomial(problem.objective, r) + constant
            assert got == pytest.approx(want, rel=1e-10)


def test_build_gp_rejects_bad_inputs(agg_of, params):
    agg = agg_of("uniform", 10000.0)
    with pytest.raises(ValueError):
        build_gp("diagonal", agg, params)
    with pytest.raises(ValueError):
        build_gp(HETEROGENEOUS, agg, params, grid=build_grid(10.0, 1.0))


def test_capacity_utilization_pins_peak_occupancy(grid, params):
    # 400 pas/(km hr) of peak flux at headway 0.1 and density 0.5 fills
    # 80-seat vehicles exactly
    n = grid.n_cells
    zeros = np.zeros((4, n, n))
    row = np.zeros(n)
    row[5] = 400.0
    agg = DemandAggregates(
        grid=grid, total_demand=1.0, bo=zeros, al=zeros, fl=zeros, tr=zeros,
        row_flux_ew=row, col_flux_ns=np.zeros(n),
        flux_ew_max=400.0, flux_ns_max=0.0,
    )
    dew = np.full(n, 0.5)
    hew = np.full(n, 0.1)
    design = DesignVariables(
        kind=HETEROGENEOUS, delta_ew=dew, delta_ns=dew, h_ew=hew, h_ns=hew
    )
    report = capacity_utilization(design, agg, params)
    assert report.ew[5] == 1.0
    assert report.ew[0] == 0.0
    assert report.max_utilization == 1.0
    hom = DesignVariables(
        kind=HOMOGENEOUS, delta_ew=0.5, delta_ns=0.5, h_ew=0.05, h_ns=0.1
    )
    hom_report = capacity_utilization(hom, agg, params)
    assert hom_report.max_utilization == 0.5


def test_design_vector_round_trip(grid):
    n = grid.n_cells
    rng = np.random.default_rng(9)
    r = np.exp(rng.uniform(-2.0, 0.5, 4 * n))
    design = design_from_vector(HETEROGENEOUS, n, r)
    assert np.array_equal(design_to_vector(design, n), r)
    hom = design_from_vector(HOMOGENEOUS, n, np.array([0.5, 0.6, 0.1, 0.2]))
    assert np.array_equal(design_to_vector(hom, n), [0.5, 0.6, 0.1, 0.2])
    with pytest.raises(ValueError):
        design_from_vector(HETEROGENEOUS, n, np.ones(7))


def test_design_variable_validation(grid):
    n = grid.n_cells
    with pytest.raises(ValueError):
        DesignVariables(kind=HOMOGENEOUS, delta_ew=np.ones(n),
                        delta_ns=1.0, h_ew=0.1, h_ns=0.1)
    with pytest.raises(ValueError):
        DesignVariables(kind=HETEROGENEOUS, delta_ew=np.ones(n),
                        delta_ns=np.ones(n), h_ew=np.ones(n), h_ns=0.1)
    with pytest.raises(ValueError):
        DesignVariables(kind=HOMOGENEOUS, delta_ew=-0.5,
                        delta_ns=1.0, h_ew=0.1, h_ns=0.1)
    design = DesignVariables(
        kind=HOMOGENEOUS, delta_ew=0.5, delta_ns=0.6, h_ew=0.1, h_ns=0.2
    )
    back = DesignVariables.from_dict(design.to_dict())
    assert design_to_vector(back, n).tolist() == [0.5, 0.6, 0.1, 0.2]


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(mu=0.0)
    with pytest.raises(ValueError):
        ModelParams(v=-1.0)
    with pytest.raises(ValueError):
        ModelParams(tau=-0.1)
    p = ModelParams().with_overrides(capacity=120.0)
    assert p.capacity == 120.0 and p.v == 25.0
