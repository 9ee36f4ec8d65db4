"""Scenario pipeline and sweep harness.

One scenario fixes a demand pattern, total demand, value of time, and
network kind, then runs the full pipeline twice: generate demand,
aggregate it, build the GP, solve to certified optimality, and separately
run multistart coordinate descent; both designs are scored by the same
cost evaluator. A sweep runs the cartesian scenario grid (six demand
patterns, four demand levels, three values of time, two network kinds by
default), optionally across processes, and writes deterministic CSV and
JSON reports.

Determinism: every scenario derives its randomness from its own seed
(base seed plus grid position), so serial and parallel sweeps produce
identical files. Wall-clock columns are the one exception; passing
``record_runtime=False`` zeroes them for byte-stable output.
"""

from __future__ import annotations

import functools
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields as dataclass_fields
from itertools import product
from pathlib import Path

import numpy as np

from .cd import CdOptions, CdResult, run_cd_multistart
from .cost import (
    HETEROGENEOUS,
    HOMOGENEOUS,
    NETWORK_KINDS,
    CostBreakdown,
    DesignVariables,
    ModelParams,
    build_gp,
    capacity_utilization,
    design_from_vector,
    design_to_vector,
    evaluate_cost,
)
from .demand import aggregate_demand, generate_demand
from .exports import fmt
from .grid import build_grid
from .solver import check_kkt, solve_gp

PATTERNS = (
    "uniform", "monocentric", "commute",
    "chessboard1", "chessboard2", "chessboard3", "chessboard4",
)
# the heterogeneous demand distributions used for benchmark tables
DEFAULT_SWEEP_PATTERNS = (
    "monocentric", "commute",
    "chessboard1", "chessboard2", "chessboard3", "chessboard4",
)
DEMAND_LEVELS = (5000.0, 10000.0, 50000.0, 100000.0)
VOT_LEVELS = (25.0, 20.0, 5.0)

RESULTS_COLUMNS = (
    "pattern", "D", "vot", "network", "method", "Z", "Z_per_pax",
    "improvement_pct", "iterations", "clamp_events", "runtime_ms",
    "kkt_stationarity", "seed",
)

_BINDING_TOL = 1e-6  # utilization this close to 1 counts as a binding constraint


class ScenarioError(RuntimeError):
    """Pipeline failure annotated with the scenario that caused it."""


@dataclass(frozen=True, eq=False)
class Scenario:
    pattern: str
    total_demand: float
    vot: float
    network: str
    side_length: float = 10.0
    cell_size: float = 0.5
    seed: int = 0
    n_cd_starts: int = 10
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise ValueError(f"unknown pattern {self.pattern!r}")
        if self.network not in NETWORK_KINDS:
            raise ValueError(f"network must be one of {NETWORK_KINDS}")
        if self.total_demand <= 0.0 or self.vot <= 0.0:
            raise ValueError("total_demand and vot must be positive")
        if "mu" in self.params:
            raise ValueError("set the value of time through 'vot', not params")
        valid = {f.name for f in dataclass_fields(ModelParams)}
        unknown = set(self.params) - valid
        if unknown:
            raise ValueError(f"unknown ModelParams overrides: {sorted(unknown)}")

    def model_params(self) -> ModelParams:
        return ModelParams(mu=self.vot, **self.params)

    def key(self) -> tuple:
        return (self.pattern, self.total_demand, self.vot, self.network)

    def to_dict(self) -> dict:
        return {
            "pattern": self.pattern,
            "total_demand": self.total_demand,
            "vot": self.vot,
            "network": self.network,
            "side_length": self.side_length,
            "cell_size": self.cell_size,
            "seed": self.seed,
            "n_cd_starts": self.n_cd_starts,
            "params": dict(self.params),
        }


def scenario_from_dict(data: dict) -> Scenario:
    valid = {f.name for f in dataclass_fields(Scenario)}
    unknown = set(data) - valid
    if unknown:
        raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
    return Scenario(**data)


@dataclass(frozen=True, eq=False)
class MethodResult:
    method: str
    z: float
    z_per_pax: float
    breakdown: CostBreakdown
    design: DesignVariables
    iterations: int
    clamp_events: int
    runtime_ms: float
    stationarity: float
    detail: dict

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "Z": self.z,
            "Z_per_pax": self.z_per_pax,
            "breakdown": self.breakdown.to_dict(),
            "design": self.design.to_dict(),
            "iterations": self.iterations,
            "clamp_events": self.clamp_events,
            "runtime_ms": self.runtime_ms,
            "stationarity": self.stationarity,
            "detail": self.detail,
        }


@dataclass(frozen=True, eq=False)
class ComparisonRow:
    scenario: Scenario
    gp: MethodResult
    cd: MethodResult
    improvement_pct: float

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "improvement_pct": self.improvement_pct,
            "gp": self.gp.to_dict(),
            "cd": self.cd.to_dict(),
        }

    def csv_lines(self) -> list[str]:
        s = self.scenario
        lines = []
        for m in (self.gp, self.cd):
            lines.append(",".join([
                s.pattern, fmt(s.total_demand), fmt(s.vot), s.network,
                m.method, fmt(m.z), fmt(m.z_per_pax),
                fmt(self.improvement_pct), str(m.iterations),
                str(m.clamp_events), fmt(m.runtime_ms),
                fmt(m.stationarity), str(s.seed),
            ]))
        return lines


@functools.lru_cache(maxsize=64)
def _cached_aggregates(pattern: str, total: float, side: float, cell: float):
    grid = build_grid(side, cell)
    od = generate_demand(grid, pattern, total)
    return aggregate_demand(grid, od)


def run_scenario(scenario: Scenario, record_runtime: bool = True) -> ComparisonRow:
    """Full GP-vs-CD comparison for one scenario."""
    try:
        return _run_scenario_inner(scenario, record_runtime)
    except ScenarioError:
        raise
    except Exception as exc:
        raise ScenarioError(
            f"scenario {scenario.key()} failed: {exc}"
        ) from exc


def _scenario_setup(scenario: Scenario):
    params = scenario.model_params()
    agg = _cached_aggregates(
        scenario.pattern, scenario.total_demand,
        scenario.side_length, scenario.cell_size,
    )
    problem, constant = build_gp(scenario.network, agg, params)
    return params, agg, problem, constant


def _gp_result(scenario, params, agg, problem, constant, record_runtime):
    n = agg.grid.n_cells
    started = time.perf_counter()
    report = solve_gp(problem)
    gp_ms = (time.perf_counter() - started) * 1e3 if record_runtime else 0.0
    if report.status != "optimal":
        raise ScenarioError(
            f"scenario {scenario.key()}: GP solve ended with status "
            f"{report.status!r}"
        )
    design = design_from_vector(scenario.network, n, report.r)
    breakdown = evaluate_cost(design, agg, params)
    util = capacity_utilization(design, agg, params)
    binding = int(
        np.sum(np.asarray(util.ew) >= 1.0 - _BINDING_TOL)
        + np.sum(np.asarray(util.ns) >= 1.0 - _BINDING_TOL)
    )
    return MethodResult(
        method="gp",
        z=breakdown.Z,
        z_per_pax=breakdown.Z_per_passenger,
        breakdown=breakdown,
        design=design,
        iterations=report.newton_steps,
        clamp_events=binding,
        runtime_ms=gp_ms,
        stationarity=report.stationarity,
        detail={
            "status": report.status,
            "objective_posynomial": report.objective,
            "dropped_constant": constant,
            "gap_bound_rel": report.gap_bound_rel,
            "primal_feasibility": report.primal_feasibility,
            "comp_slackness": report.comp_slackness,
            "outer_rounds": report.outer_rounds,
            "barrier_skipped": report.barrier_skipped,
            "max_utilization": util.max_utilization,
        },
    )


def _cd_result(scenario, params, agg, problem, record_runtime):
    n = agg.grid.n_cells
    started = time.perf_counter()
    cd_opts = CdOptions(n_starts=scenario.n_cd_starts, seed=scenario.seed)
    multi = run_cd_multistart(scenario.network, agg, params, cd_opts)
    cd_ms = (time.perf_counter() - started) * 1e3 if record_runtime else 0.0
    best: CdResult = multi.best
    cd_kkt = check_kkt(problem, design_to_vector(best.design, n))
    return MethodResult(
        method="cd",
        z=best.breakdown.Z,
        z_per_pax=best.breakdown.Z_per_passenger,
        breakdown=best.breakdown,
        design=best.design,
        iterations=best.iterations,
        clamp_events=best.clamp_events,
        runtime_ms=cd_ms,
        stationarity=cd_kkt.stationarity,
        detail={
            "converged": best.converged,
            "capacity_clamped": best.capacity_clamped,
            "floors_hit": best.floors_hit,
            "z_finals": [float(z) for z in multi.z_finals],
            "z_spread": float(multi.z_finals.max() - multi.z_finals.min()),
        },
    )


def _run_scenario_inner(scenario: Scenario, record_runtime: bool) -> ComparisonRow:
    params, agg, problem, constant = _scenario_setup(scenario)
    gp_result = _gp_result(scenario, params, agg, problem, constant, record_runtime)
    cd_result = _cd_result(scenario, params, agg, problem, record_runtime)
    improvement = 100.0 * (cd_result.z - gp_result.z) / cd_result.z
    return ComparisonRow(
        scenario=scenario, gp=gp_result, cd=cd_result,
        improvement_pct=improvement,
    )


def run_method(
    scenario: Scenario, method: str, record_runtime: bool = True
) -> MethodResult:
    """Run only one side of the comparison (the CLI solve command)."""
    if method not in ("gp", "cd"):
        raise ValueError("method must be 'gp' or 'cd'")
    try:
        params, agg, problem, constant = _scenario_setup(scenario)
        if method == "gp":
            return _gp_result(
                scenario, params, agg, problem, constant, record_runtime
            )
        return _cd_result(scenario, params, agg, problem, record_runtime)
    except ScenarioError:
        raise
    except Exception as exc:
        raise ScenarioError(f"scenario {scenario.key()} failed: {exc}") from exc


@dataclass(frozen=True, eq=False)
class SweepConfig:
    patterns: tuple = DEFAULT_SWEEP_PATTERNS
    demand_levels: tuple = DEMAND_LEVELS
    vots: tuple = VOT_LEVELS
    networks: tuple = (HETEROGENEOUS, HOMOGENEOUS)
    side_length: float = 10.0
    cell_size: float = 0.5
    seed: int = 0
    n_cd_starts: int = 10
    record_runtime: bool = True
    params: dict = field(default_factory=dict)

    def scenarios(self) -> list[Scenario]:
        grid_iter = product(
            self.patterns, self.demand_levels, self.vots, self.networks
        )
        return [
            Scenario(
                pattern=pattern,
                total_demand=float(total),
                vot=float(vot),
                network=network,
                side_length=self.side_length,
                cell_size=self.cell_size,
                seed=self.seed + index,
                n_cd_starts=self.n_cd_starts,
                params=dict(self.params),
            )
            for index, (pattern, total, vot, network) in enumerate(grid_iter)
        ]

    def to_dict(self) -> dict:
        return {
            "patterns": list(self.patterns),
            "demand_levels": [float(x) for x in self.demand_levels],
            "vots": [float(x) for x in self.vots],
            "networks": list(self.networks),
            "side_length": self.side_length,
            "cell_size": self.cell_size,
            "seed": self.seed,
            "n_cd_starts": self.n_cd_starts,
            "record_runtime": self.record_runtime,
            "params": dict(self.params),
        }


def sweep_config_from_dict(data: dict) -> SweepConfig:
    valid = {f.name for f in dataclass_fields(SweepConfig)}
    unknown = set(data) - valid
    if unknown:
        raise ValueError(f"unknown sweep config keys: {sorted(unknown)}")
    data = dict(data)
    for key in ("patterns", "demand_levels", "vots", "networks"):
        if key in data:
            data[key] = tuple(data[key])
    return SweepConfig(**data)


def load_sweep_config(path: str | Path) -> SweepConfig:
    return sweep_config_from_dict(json.loads(Path(path).read_text()))


def _sweep_task(args) -> tuple:
    scenario, record_runtime = args
    try:
        return ("ok", run_scenario(scenario, record_runtime=record_runtime))
    except ScenarioError as exc:
        return ("error", scenario, str(exc))


@dataclass(frozen=True, eq=False)
class SweepOutput:
    rows: list
    errors: list
    results_path: Path | None
    summary_path: Path | None
    json_path: Path | None


def run_sweep(
    config: SweepConfig, out_dir: str | Path | None = None, jobs: int = 1
) -> SweepOutput:
    """Run every scenario of the grid and write results/summary/rows files."""
    scenarios = config.scenarios()
    tasks = [(s, config.record_runtime) for s in scenarios]
    if jobs > 1:
        # chunks keep the six (vot, network) variants of one aggregate on
        # one worker so its demand cache is reused
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_sweep_task, tasks, chunksize=6))
    else:
        outcomes = [_sweep_task(t) for t in tasks]

    rows = []
    errors = []
    for outcome in outcomes:
        if outcome[0] == "ok":
            rows.append(outcome[1])
        else:
            errors.append({"scenario": outcome[1].to_dict(), "error": outcome[2]})

    results_path = summary_path = json_path = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        results_path = out_dir / "results.csv"
        summary_path = out_dir / "summary.csv"
        json_path = out_dir / "rows.json"
        results_path.write_text(results_csv_text(rows))
        summary_path.write_text(summary_csv_text(config, rows))
        payload = [r.to_dict() for r in rows] + [
            {"error": e["error"], "scenario": e["scenario"]} for e in errors
        ]
        json_path.write_text(json.dumps(payload, indent=2) + "\n")
    return SweepOutput(
        rows=rows, errors=errors, results_path=results_path,
        summary_path=summary_path, json_path=json_path,
    )


def results_csv_text(rows) -> str:
    lines = [",".join(RESULTS_COLUMNS)]
    for row in rows:
        lines.extend(row.csv_lines())
    return "\n".join(lines) + "\n"


def improvement_means(rows) -> dict:
    """Mean improvement over the patterns of each (network, D, vot) cell."""
    cells: dict[tuple, list] = {}
    for row in rows:
        s = row.scenario
        cells.setdefault((s.network, s.total_demand, s.vot), []).append(
            row.improvement_pct
        )
    return {
        key: {
            "mean": float(np.mean(values)),
            "min": float(np.min(values)),
            "max": float(np.max(values)),
            "n": len(values),
        }
        for key, values in cells.items()
    }


def summary_csv_text(config: SweepConfig, rows) -> str:
    means = improvement_means(rows)
    lines = [
        "network,D,vot,mean_improvement_pct,min_improvement_pct,"
        "max_improvement_pct,n_patterns"
    ]
    for network in config.networks:
        for total in config.demand_levels:
            for vot in config.vots:
                key = (network, float(total), float(vot))
                if key not in means:
                    continue
                cell = means[key]
                lines.append(",".join([
                    network, fmt(total), fmt(vot), fmt(cell["mean"]),
                    fmt(cell["min"]), fmt(cell["max"]), str(cell["n"]),
                ]))
    return "\n".join(lines) + "\n"
