"""Generalized-cost model for a grid transit network.

The decision variables are line densities (lines per km) and headways
(hours) for the east-west and north-south line families. A heterogeneous
design lets both vary per row / per column; a homogeneous design uses one
scalar of each. The total cost rate

    Z = Z_A / mu + Z_P        (hours of passenger-equivalent cost per hour)

combines agency cost Z_A (infrastructure length, stations, vehicle distance
and vehicle hours) converted through the value of time ``mu`` with passenger
cost Z_P (access walking, waiting, riding, transfer penalties). Every term
is a midpoint sum over the grid of the corresponding area integral.

``evaluate_cost`` computes the breakdown directly; ``build_gp`` assembles
the identical cost as a posynomial objective plus a design-independent
constant, with one monomial capacity constraint per loaded row/column (or
per axis for homogeneous designs).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._agg_numpy import DIR_E, DIR_N, DIR_S, DIR_W
from .demand import DemandAggregates
from .grid import Grid
from .posynomial import GpProblem, Monomial, Posynomial

HETEROGENEOUS = "heterogeneous"
HOMOGENEOUS = "homogeneous"
NETWORK_KINDS = (HETEROGENEOUS, HOMOGENEOUS)


@dataclass(frozen=True)
class ModelParams:
    """Unit costs and operating parameters.

    pi_l: $/km of line infrastructure per hour
    pi_s: $/station per hour
    pi_k: $/vehicle-km
    pi_h: $/vehicle-hr
    v: cruise speed, km/hr
    v_w: walk speed, km/hr
    capacity: vehicle capacity, pas/veh
    beta_w: walk time weight (dimensionless)
    tau: dwell delay per stop passed, hr
    sigma: transfer penalty, hr
    mu: value of time, $/hr (converts agency dollars to passenger hours)
    """

    pi_l: float = 0.0
    pi_s: float = 0.0
    pi_k: float = 2.0
    pi_h: float = 40.0
    v: float = 25.0
    v_w: float = 2.0
    capacity: float = 80.0
    beta_w: float = 2.0
    tau: float = 30.0 / 3600.0
    sigma: float = 60.0 / 3600.0
    mu: float = 20.0

    def __post_init__(self):
        for name in ("v", "v_w", "capacity", "mu"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        for name in ("pi_l", "pi_s", "pi_k", "pi_h", "beta_w", "tau", "sigma"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")

    def with_overrides(self, **kwargs) -> "ModelParams":
        return replace(self, **kwargs)


DEFAULT_PARAMS = ModelParams()


@dataclass(frozen=True, eq=False)
class DesignVariables:
    """Line densities (1/km) and headways (hr) for both line families.

    Heterogeneous designs hold arrays: delta_ew/h_ew indexed by row (y),
    delta_ns/h_ns indexed by column (x). Homogeneous designs hold scalars.
    """

    kind: str
    delta_ew: np.ndarray | float
    delta_ns: np.ndarray | float
    h_ew: np.ndarray | float
    h_ns: np.ndarray | float

    def __post_init__(self):
        if self.kind not in NETWORK_KINDS:
            raise ValueError(f"kind must be one of {NETWORK_KINDS}")
        for name in ("delta_ew", "delta_ns", "h_ew", "h_ns"):
            value = np.asarray(getattr(self, name), dtype=float)
            if self.kind == HOMOGENEOUS and value.ndim != 0:
                raise ValueError(f"{name} must be scalar for a homogeneous design")
            if self.kind == HETEROGENEOUS and value.ndim != 1:
                raise ValueError(f"{name} must be 1-D for a heterogeneous design")
            if not np.all(np.isfinite(value)) or np.any(value <= 0.0):
                raise ValueError(f"{name} must be finite and strictly positive")
        if self.kind == HETEROGENEOUS:
            lengths = {
                np.asarray(getattr(self, f)).shape[0]
                for f in ("delta_ew", "delta_ns", "h_ew", "h_ns")
            }
            if len(lengths) != 1:
                raise ValueError("heterogeneous profiles must share one length")

    def profiles(self, n_cells: int):
        """Per-row/column arrays regardless of kind (scalars broadcast)."""
        out = []
        for name in ("delta_ew", "delta_ns", "h_ew", "h_ns"):
            value = np.asarray(getattr(self, name), dtype=float)
            if value.ndim == 0:
                out.append(np.full(n_cells, float(value)))
            else:
                if value.shape[0] != n_cells:
                    raise ValueError(
                        f"{name} has length {value.shape[0]}, grid has {n_cells}"
                    )
                out.append(value)
        return tuple(out)

    def to_dict(self) -> dict:
        def unpack(v):
            a = np.asarray(v, dtype=float)
            return float(a) if a.ndim == 0 else [float(x) for x in a]

        return {
            "kind": self.kind,
            "delta_ew": unpack(self.delta_ew),
            "delta_ns": unpack(self.delta_ns),
            "h_ew": unpack(self.h_ew),
            "h_ns": unpack(self.h_ns),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DesignVariables":
        kind = data["kind"]
        conv = (lambda v: float(v)) if kind == HOMOGENEOUS else (
            lambda v: np.asarray(v, dtype=float)
        )
        return cls(
            kind=kind,
            delta_ew=conv(data["delta_ew"]),
            delta_ns=conv(data["delta_ns"]),
            h_ew=conv(data["h_ew"]),
            h_ns=conv(data["h_ns"]),
        )


@dataclass(frozen=True)
class CostBreakdown:
    """Components of Eq-style cost accounting; Z = Z_A/mu + Z_P."""

    Z: float
    Z_A: float
    Z_P: float
    N_l: float  # line-km of infrastructure
    N_s: float  # station count proxy
    N_k: float  # vehicle-km per hour
    N_h: float  # vehicle-hours per hour
    T_a: float  # access walk hours per hour
    T_w: float  # waiting hours per hour
    T_r: float  # riding hours per hour
    T_t: float  # transfer penalty hours per hour
    Z_per_passenger: float

    def to_dict(self) -> dict:
        return {
            "Z": self.Z, "Z_A": self.Z_A, "Z_P": self.Z_P,
            "N_l": self.N_l, "N_s": self.N_s, "N_k": self.N_k, "N_h": self.N_h,
            "T_a": self.T_a, "T_w": self.T_w, "T_r": self.T_r, "T_t": self.T_t,
            "Z_per_passenger": self.Z_per_passenger,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CostBreakdown":
        return cls(**{k: float(data[k]) for k in (
            "Z", "Z_A", "Z_P", "N_l", "N_s", "N_k", "N_h",
            "T_a", "T_w", "T_r", "T_t", "Z_per_passenger",
        )})


@dataclass(frozen=True, eq=False)
class _Reductions:
    """Line-density masses (one cell-size factor folded in) per row/column."""

    access_row: np.ndarray  # walk mass whose access time scales with 1/delta_ew(y)
    access_col: np.ndarray
    wait_row: np.ndarray    # boardings incl. transfers waiting on EW lines, per y
    wait_col: np.ndarray
    crossflux_row: np.ndarray  # N/S flux dwell-delayed by EW line crossings, per y
    crossflux_col: np.ndarray
    flux_row_ew: np.ndarray
    flux_col_ns: np.ndarray
    flux_ew_max: float
    flux_ns_max: float
    flux_total: float      # pas-km/hr on board, all directions
    transfer_total: float  # transfers per hour


def reductions(agg: DemandAggregates) -> _Reductions:
    d = agg.grid.cell_size
    mass = (agg.bo + agg.al).sum(axis=0)  # all four directions, [x, y]
    wait_ew = agg.bo[DIR_E] + agg.tr[DIR_E] + agg.bo[DIR_W] + agg.tr[DIR_W]
    wait_ns = agg.bo[DIR_N] + agg.tr[DIR_N] + agg.bo[DIR_S] + agg.tr[DIR_S]
    flux_ew = agg.fl[DIR_E] + agg.fl[DIR_W]
    flux_ns = agg.fl[DIR_N] + agg.fl[DIR_S]
    return _Reductions(
        access_row=d * mass.sum(axis=0),
        access_col=d * mass.sum(axis=1),
        wait_row=d * wait_ew.sum(axis=0),
        wait_col=d * wait_ns.sum(axis=1),
        crossflux_row=d * flux_ns.sum(axis=0),
        crossflux_col=d * flux_ew.sum(axis=1),
        flux_row_ew=agg.row_flux_ew,
        flux_col_ns=agg.col_flux_ns,
        flux_ew_max=agg.flux_ew_max,
        flux_ns_max=agg.flux_ns_max,
        flux_total=float(d * d * agg.fl.sum()),
        transfer_total=float(d * d * agg.tr.sum()),
    )


def evaluate_cost(
    design: DesignVariables, agg: DemandAggregates, params: ModelParams
) -> CostBreakdown:
    """Exact cost breakdown of a design against aggregated demand."""
    grid = agg.grid
    n = grid.n_cells
    side = grid.side_length
    d = grid.cell_size
    red = reductions(agg)
    dew, dns, hew, hns = design.profiles(n)
    qew = dew / hew
    qns = dns / hns

    sum_dew = float(dew.sum())
    sum_dns = float(dns.sum())
    sum_qew = float(qew.sum())
    sum_qns = float(qns.sum())

    n_l = 2.0 * side * d * (sum_dew + sum_dns)
    n_s = 4.0 * d * d * sum_dew * sum_dns
    n_k = 2.0 * side * d * (sum_qew + sum_qns)
    n_h = (2.0 * side * d / params.v) * (sum_qew + sum_qns) + (
        2.0 * params.tau * d * d
    ) * (sum_qew * sum_dns + sum_qns * sum_dew)

    t_a = (params.beta_w / (4.0 * params.v_w)) * d * (
        float((red.access_row / dew).sum()) + float((red.access_col / dns).sum())
    )
    t_w = 0.5 * d * (
        float((red.wait_row * hew).sum()) + float((red.wait_col * hns).sum())
    )
    t_r = red.flux_total / params.v + params.tau * d * (
        float((red.crossflux_row * dew).sum())
        + float((red.crossflux_col * dns).sum())
    )
    t_t = params.sigma * red.transfer_total

    z_a = (
        params.pi_l * n_l + params.pi_s * n_s
        + params.pi_k * n_k + params.pi_h * n_h
    )
    z_p = t_a + t_w + t_r + t_t
    z = z_a / params.mu + z_p
    return CostBreakdown(
        Z=z, Z_A=z_a, Z_P=z_p,
        N_l=n_l, N_s=n_s, N_k=n_k, N_h=n_h,
        T_a=t_a, T_w=t_w, T_r=t_r, T_t=t_t,
        Z_per_passenger=z / agg.total_demand,
    )


def _variable_layout(kind: str, n: int):
    """Names, roles, and index maps for the GP variable vector."""
    if kind == HETEROGENEOUS:
        names = (
            [f"delta_ew[{j}]" for j in range(n)]
            + [f"delta_ns[{j}]" for j in range(n)]
            + [f"h_ew[{j}]" for j in range(n)]
            + [f"h_ns[{j}]" for j in range(n)]
        )
        roles = ["line_density"] * (2 * n) + ["headway"] * (2 * n)
        idx = {
            "dew": lambda j: j,
            "dns": lambda j: n + j,
            "hew": lambda j: 2 * n + j,
            "hns": lambda j: 3 * n + j,
        }
    else:
        names = ["delta_ew", "delta_ns", "h_ew", "h_ns"]
        roles = ["line_density", "line_density", "headway", "headway"]
        idx = {
            "dew": lambda j: 0,
            "dns": lambda j: 1,
            "hew": lambda j: 2,
            "hns": lambda j: 3,
        }
    return names, roles, idx


def build_gp(
    kind: str, agg: DemandAggregates, params: ModelParams, grid: Grid | None = None
) -> tuple[GpProblem, float]:
    """Assemble the cost as a GP: posynomial objective + monomial capacity rows.

    Returns the problem and the dropped design-independent constant
    (in-vehicle cruise time of all flux plus the transfer penalty), so that
    objective(design) + constant == evaluate_cost(design).Z.
    """
    if kind not in NETWORK_KINDS:
        raise ValueError(f"kind must be one of {NETWORK_KINDS}")
    if grid is not None and (
        grid.n_cells != agg.grid.n_cells or grid.cell_size != agg.grid.cell_size
    ):
        raise ValueError("grid does not match the aggregates")
    grid = agg.grid
    n = grid.n_cells
    side = grid.side_length
    d = grid.cell_size
    red = reductions(agg)
    names, roles, idx = _variable_layout(kind, n)
    n_vars = len(names)

    terms: dict[tuple, float] = {}

    def add(coeff: float, *powers: tuple[int, int]):
        if coeff == 0.0:
            return  # zero-coefficient monomials are represented by omission
        merged: dict[int, int] = {}
        for var, p in powers:
            merged[var] = merged.get(var, 0) + p
        key = tuple(sorted((v, p) for v, p in merged.items() if p != 0))
        terms[key] = terms.get(key, 0.0) + coeff

    mu = params.mu
    vehicle_coeff = 2.0 * side * d * (params.pi_k + params.pi_h / params.v) / mu
    dwell_coeff = 2.0 * params.tau * d * d * params.pi_h / mu
    line_coeff = 2.0 * side * d * params.pi_l / mu
    station_coeff = 4.0 * d * d * params.pi_s / mu
    access_coeff = params.beta_w * d / (4.0 * params.v_w)

    for j in range(n):
        dew, hew = idx["dew"](j), idx["hew"](j)
        add(line_coeff, (dew, 1))
        add(vehicle_coeff, (dew, 1), (hew, -1))
        add(access_coeff * red.access_row[j], (dew, -1))
        add(0.5 * d * red.wait_row[j], (hew, 1))
        add(params.tau * d * red.crossflux_row[j], (dew, 1))
        for k in range(n):
            dns = idx["dns"](k)
            add(dwell_coeff, (dew, 1), (hew, -1), (dns, 1))
            add(station_coeff, (dew, 1), (dns, 1))
    for k in range(n):
        dns, hns = idx["dns"](k), idx["hns"](k)
        add(line_coeff, (dns, 1))
        add(vehicle_coeff, (dns, 1), (hns, -1))
        add(access_coeff * red.access_col[k], (dns, -1))
        add(0.5 * d * red.wait_col[k], (hns, 1))
        add(params.tau * d * red.crossflux_col[k], (dns, 1))
        for j in range(n):
            dew = idx["dew"](j)
            add(dwell_coeff, (dns, 1), (hns, -1), (dew, 1))

    def monomial(key: tuple, coeff: float) -> Monomial:
        exponents = np.zeros(n_vars)
        for var, p in key:
            exponents[var] = p
        return Monomial(coefficient=coeff, exponents=exponents)

    objective = Posynomial(
        terms=tuple(monomial(k, c) for k, c in sorted(terms.items()))
    )

    constraints = []
    cap = params.capacity
    if kind == HETEROGENEOUS:
        for j in range(n):
            peak = red.flux_row_ew[j]
            if peak > 0.0:
                constraints.append(Posynomial(terms=(
                    monomial(((idx["dew"](j), -1), (idx["hew"](j), 1)), peak / cap),
                )))
        for k in range(n):
            peak = red.flux_col_ns[k]
            if peak > 0.0:
                constraints.append(Posynomial(terms=(
                    monomial(((idx["dns"](k), -1), (idx["hns"](k), 1)), peak / cap),
                )))
    else:
        if red.flux_ew_max > 0.0:
            constraints.append(Posynomial(terms=(
                monomial(((0, -1), (2, 1)), red.flux_ew_max / cap),
            )))
        if red.flux_ns_max > 0.0:
            constraints.append(Posynomial(terms=(
                monomial(((1, -1), (3, 1)), red.flux_ns_max / cap),
            )))

    problem = GpProblem(
        objective=objective,
        inequalities=tuple(constraints),
        equalities=(),
        variable_names=tuple(names),
        variable_roles=tuple(roles),
    )
    dropped = red.flux_total / params.v + params.sigma * red.transfer_total
    return problem, dropped


def design_from_vector(kind: str, n_cells: int, r: np.ndarray) -> DesignVariables:
    """Map a GP solution vector back onto named design variables."""
    r = np.asarray(r, dtype=float)
    if kind == HETEROGENEOUS:
        if r.shape != (4 * n_cells,):
            raise ValueError(f"expected {4 * n_cells} variables, got {r.shape}")
        return DesignVariables(
            kind=kind,
            delta_ew=r[:n_cells].copy(),
            delta_ns=r[n_cells:2 * n_cells].copy(),
            h_ew=r[2 * n_cells:3 * n_cells].copy(),
            h_ns=r[3 * n_cells:].copy(),
        )
    if r.shape != (4,):
        raise ValueError(f"expected 4 variables, got {r.shape}")
    return DesignVariables(
        kind=kind, delta_ew=float(r[0]), delta_ns=float(r[1]),
        h_ew=float(r[2]), h_ns=float(r[3]),
    )


def design_to_vector(design: DesignVariables, n_cells: int) -> np.ndarray:
    if design.kind == HETEROGENEOUS:
        dew, dns, hew, hns = design.profiles(n_cells)
        return np.concatenate([dew, dns, hew, hns])
    return np.array([
        float(np.asarray(design.delta_ew)),
        float(np.asarray(design.delta_ns)),
        float(np.asarray(design.h_ew)),
        float(np.asarray(design.h_ns)),
    ])


@dataclass(frozen=True, eq=False)
class UtilizationReport:
    """Peak-load vehicle occupancy as a fraction of capacity."""

    ew: np.ndarray | float
    ns: np.ndarray | float
    max_utilization: float


def capacity_utilization(
    design: DesignVariables, agg: DemandAggregates, params: ModelParams
) -> UtilizationReport:
    """Occupancy of the busiest point of each row/column (or axis) of lines.

    utilization = peak_flux * headway / (capacity * line_density); a value
    of 1.0 means the fullest vehicle is exactly at capacity.
    """
    cap = params.capacity
    if design.kind == HETEROGENEOUS:
        dew, dns, hew, hns = design.profiles(agg.grid.n_cells)
        ew = agg.row_flux_ew * hew / (cap * dew)
        ns = agg.col_flux_ns * hns / (cap * dns)
        peak = max(float(ew.max()), float(ns.max())) if ew.size else 0.0
        return UtilizationReport(ew=ew, ns=ns, max_utilization=peak)
    ew = agg.flux_ew_max * float(np.asarray(design.h_ew)) / (
        cap * float(np.asarray(design.delta_ew))
    )
    ns = agg.flux_ns_max * float(np.asarray(design.h_ns)) / (
        cap * float(np.asarray(design.delta_ns))
    )
    return UtilizationReport(ew=ew, ns=ns, max_utilization=max(ew, ns))
