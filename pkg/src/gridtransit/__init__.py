"""Grid transit network design via geometric programming.

Optimal line densities and headways for a square grid transit network on
a discretized city: demand generation and aggregation, a cost evaluator,
an exact posynomial formulation solved to certified global optimality by
an interior-point method, and a closed-form coordinate-descent baseline
with a scenario sweep harness comparing the two.
"""

from ._kernels import BACKEND, accumulate_od, available_backends
from .cd import CdMultistartResult, CdOptions, CdResult, run_cd, run_cd_multistart
from .cost import (
    DEFAULT_PARAMS,
    HETEROGENEOUS,
    HOMOGENEOUS,
    NETWORK_KINDS,
    CostBreakdown,
    DesignVariables,
    ModelParams,
    UtilizationReport,
    build_gp,
    capacity_utilization,
    design_from_vector,
    design_to_vector,
    evaluate_cost,
)
from .demand import (
    ChessboardSpec,
    DemandAggregates,
    DemandError,
    ODMatrix,
    SmoothDemandParams,
    aggregate_demand,
    generate_chessboard_demand,
    generate_demand,
    generate_smooth_demand,
    generate_uniform_demand,
    make_chessboard_spec,
    smooth_preset,
    solve_chessboard_densities,
)
from .grid import Grid, build_grid
from .posynomial import (
    ConvexGp,
    GpProblem,
    Monomial,
    Posynomial,
    eval_monomial,
    eval_posynomial,
    problem_from_json,
    problem_to_json,
    to_convex_form,
)
from .scenarios import (
    ComparisonRow,
    Scenario,
    ScenarioError,
    SweepConfig,
    improvement_means,
    run_method,
    run_scenario,
    run_sweep,
    scenario_from_dict,
    sweep_config_from_dict,
)
from .solver import (
    KktReport,
    SolveReport,
    SolverOptions,
    check_kkt,
    solve_gp,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CdMultistartResult",
    "CdOptions",
    "CdResult",
    "ChessboardSpec",
    "ComparisonRow",
    "ConvexGp",
    "CostBreakdown",
    "DEFAULT_PARAMS",
    "DemandAggregates",
    "DemandError",
    "DesignVariables",
    "Grid",
    "GpProblem",
    "HETEROGENEOUS",
    "HOMOGENEOUS",
    "KktReport",
    "ModelParams",
    "Monomial",
    "NETWORK_KINDS",
    "ODMatrix",
    "Posynomial",
    "Scenario",
    "ScenarioError",
    "SmoothDemandParams",
    "SolveReport",
    "SolverOptions",
    "SweepConfig",
    "UtilizationReport",
    "accumulate_od",
    "aggregate_demand",
    "available_backends",
    "build_gp",
    "build_grid",
    "capacity_utilization",
    "check_kkt",
    "design_from_vector",
    "design_to_vector",
    "eval_monomial",
    "eval_posynomial",
    "evaluate_cost",
    "generate_chessboard_demand",
    "generate_demand",
    "generate_smooth_demand",
    "generate_uniform_demand",
    "improvement_means",
    "make_chessboard_spec",
    "problem_from_json",
    "problem_to_json",
    "run_cd",
    "run_cd_multistart",
    "run_method",
    "run_scenario",
    "run_sweep",
    "scenario_from_dict",
    "smooth_preset",
    "solve_chessboard_densities",
    "solve_gp",
    "sweep_config_from_dict",
    "to_convex_form",
]
