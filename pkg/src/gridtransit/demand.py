"""Travel demand: OD density fields on the grid and their aggregation.

Demand is a density ``lambda(xo, yo, xd, yd)`` in pas/(km^4 hr), sampled at
cell centers. Three generator families are provided:

* uniform,
* smooth two-Gaussian product fields (monocentric and commute presets),
* two-level chessboard fields with prescribed high/low shares.

``aggregate_demand`` routes every OD pair along an L-shaped path (see
``_agg_numpy`` for the exact rule) and produces the per-direction boarding,
alighting, flux, and transfer fields the cost model consumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._agg_numpy import DIR_E, DIR_N, DIR_S, DIR_W  # noqa: F401  (re-export)
from ._kernels import accumulate_od
from .grid import Grid

DIRECTION_NAMES = ("E", "W", "N", "S")

#: relative tolerance on the discrete normalization sum(density) * delta^4 = D
NORMALIZATION_RTOL = 1e-9


class DemandError(ValueError):
    """Raised for demand fields that cannot be generated as requested."""


@dataclass(frozen=True, eq=False)
class ODMatrix:
    """OD demand density on a grid, plus the total trip rate it integrates to."""

    grid: Grid
    density: np.ndarray  # [xo, yo, xd, yd], pas/(km^4 hr)
    total_demand: float

    def __post_init__(self):
        n = self.grid.n_cells
        if self.density.shape != (n, n, n, n):
            raise ValueError(
                f"density shape {self.density.shape} does not match grid "
                f"({n} cells per side)"
            )
        if np.any(self.density < 0.0) or not np.all(np.isfinite(self.density)):
            raise ValueError("density must be finite and non-negative")
        total = float(self.density.sum()) * self.grid.cell_size**4
        if abs(total - self.total_demand) > NORMALIZATION_RTOL * max(
            1.0, abs(self.total_demand)
        ):
            raise ValueError(
                f"density integrates to {total}, expected {self.total_demand}"
            )


def generate_uniform_demand(grid: Grid, total_demand: float) -> ODMatrix:
    """Spatially uniform demand: every OD cell pair carries the same density."""
    if total_demand <= 0.0:
        raise DemandError(f"total_demand must be positive, got {total_demand}")
    n = grid.n_cells
    value = total_demand / grid.area**2
    density = np.full((n, n, n, n), value)
    return ODMatrix(grid=grid, density=density, total_demand=float(total_demand))


@dataclass(frozen=True)
class SmoothDemandParams:
    """Parameters of the two-Gaussian product demand field.

    The origin and destination factors share the alpha shape parameters and
    differ only in the Gaussian center parameters (beta for x, beta_bar
    for y), one pair per Gaussian component.
    """

    alpha1: float
    alpha2: float
    alpha31: float
    alpha32: float
    alpha41: float
    alpha42: float
    beta_o1: float
    beta_o2: float
    beta_d1: float
    beta_d2: float
    beta_bar_o1: float
    beta_bar_o2: float
    beta_bar_d1: float
    beta_bar_d2: float


_SMOOTH_PRESETS = {
    "monocentric": SmoothDemandParams(
        alpha1=0.0016,
        alpha2=0.065,
        alpha31=0.5,
        alpha32=0.0,
        alpha41=0.5,
        alpha42=0.0,
        beta_o1=2.5,
        beta_o2=0.0,
        beta_d1=2.5,
        beta_d2=0.0,
        beta_bar_o1=2.5,
        beta_bar_o2=0.0,
        beta_bar_d1=2.5,
        beta_bar_d2=0.0,
    ),
    "commute": SmoothDemandParams(
        alpha1=0.00044,
        alpha2=0.70,
        alpha31=0.5,
        alpha32=0.0,
        alpha41=0.5,
        alpha42=0.0,
        beta_o1=1.0,
        beta_o2=0.0,
        beta_d1=4.0,
        beta_d2=0.0,
        beta_bar_o1=4.0,
        beta_bar_o2=0.0,
        beta_bar_d1=1.0,
        beta_bar_d2=0.0,
    ),
}


def smooth_preset(name: str) -> SmoothDemandParams:
    try:
        return _SMOOTH_PRESETS[name]
    except KeyError:
        raise DemandError(
            f"unknown smooth demand preset {name!r}; "
            f"choose from {sorted(_SMOOTH_PRESETS)}"
        ) from None


def _endpoint_factor(
    grid: Grid, beta1: float, beta2: float, bbar1: float, bbar2: float,
    p: SmoothDemandParams,
) -> np.ndarray:
    """One endpoint's factor field over cell centers, shape (n, n) as [x, y]."""
    x = grid.centers[:, None]
    y = grid.centers[None, :]
    g1 = np.exp(-((p.alpha31 * x - beta1) ** 2) - (p.alpha41 * y - bbar1) ** 2)
    g2 = np.exp(-((p.alpha32 * x - beta2) ** 2) - (p.alpha42 * y - bbar2) ** 2)
    return p.alpha1 + p.alpha2 * (g1 + g2)


def generate_smooth_demand(
    grid: Grid, total_demand: float, params: SmoothDemandParams
) -> ODMatrix:
    """Product-form demand, scaled so the discrete sum integrates to the total."""
    if total_demand <= 0.0:
        raise DemandError(f"total_demand must be positive, got {total_demand}")
    f_o = _endpoint_factor(
        grid, params.beta_o1, params.beta_o2,
        params.beta_bar_o1, params.beta_bar_o2, params,
    )
    f_d = _endpoint_factor(
        grid, params.beta_d1, params.beta_d2,
        params.beta_bar_d1, params.beta_bar_d2, params,
    )
    raw = np.einsum("ab,cd->abcd", f_o, f_d)
    mass = float(raw.sum()) * grid.cell_size**4
    if mass <= 0.0:
        raise DemandError("unnormalized demand field integrates to zero")
    density = raw * (total_demand / mass)
    return ODMatrix(grid=grid, density=density, total_demand=float(total_demand))


# Chessboard patterns: alternating H/L square blocks, H at the origin corner.
CHESSBOARD_BLOCK_SIDES = {1: 5.0, 2: 2.5, 3: 2.0, 4: 1.0}


@dataclass(frozen=True)
class ChessboardSpec:
    """Closed-form two-level demand: densities per region pair and marginals."""

    block_side: float
    rho_h: float
    rho_hh: float
    area_h: float
    area_l: float
    lam_hh: float
    lam_hl: float
    lam_lh: float
    lam_ll: float
    lam_bo_h: float
    lam_bo_l: float
    lam_al_h: float
    lam_al_l: float


def chessboard_membership(grid: Grid, block_side: float) -> np.ndarray:
    """Boolean (n, n) map of high-demand cells, [x, y]; H at the origin corner."""
    ratio = block_side / grid.cell_size
    cells = int(round(ratio))
    if cells < 1 or abs(ratio - cells) > 1e-9 * max(1.0, ratio):
        raise DemandError(
            f"block side {block_side} is not an integer multiple of the "
            f"cell size {grid.cell_size}"
        )
    idx = np.arange(grid.n_cells) // cells
    return ((idx[:, None] + idx[None, :]) % 2) == 0


def solve_chessboard_densities(
    total_demand: float, area_h: float, area_l: float,
    rho_h: float, rho_hh: float,
) -> tuple[float, float, float, float]:
    """Region-pair densities (HH, HL, LH, LL) meeting the share constraints.

    ``rho_h`` is the share of all trips that start (and, symmetrically, end)
    in the high region; ``rho_hh`` is the share of high-origin trips that
    also end there. HL and LH carry the same density by construction.
    """
    if total_demand <= 0.0:
        raise DemandError(f"total_demand must be positive, got {total_demand}")
    if area_h <= 0.0 or area_l <= 0.0:
        raise DemandError("both region areas must be positive")
    if not (0.0 < rho_h < 1.0) or not (0.0 < rho_hh < 1.0):
        raise DemandError("rho_h and rho_hh must lie strictly between 0 and 1")
    denom = 2.0 - rho_hh
    lam_hh = total_demand * rho_h / (area_h * area_h * denom)
    lam_hl = total_demand * rho_h * (1.0 - rho_hh) / (area_h * area_l * denom)
    lam_lh = lam_hl
    lam_ll = (
        total_demand
        * (2.0 - rho_hh - 3.0 * rho_h + 2.0 * rho_h * rho_hh)
        / (area_l * area_l * denom)
    )
    if lam_ll < 0.0:
        raise DemandError(
            f"share targets rho_h={rho_h}, rho_hh={rho_hh} force a negative "
            f"low-low density ({lam_ll}); no valid field exists"
        )
    return lam_hh, lam_hl, lam_lh, lam_ll


def make_chessboard_spec(
    grid: Grid, total_demand: float, pattern_id: int,
    rho_h: float = 0.9, rho_hh: float = 0.9,
) -> ChessboardSpec:
    try:
        block_side = CHESSBOARD_BLOCK_SIDES[pattern_id]
    except KeyError:
        raise DemandError(
            f"unknown chessboard pattern {pattern_id}; "
            f"choose from {sorted(CHESSBOARD_BLOCK_SIDES)}"
        ) from None
    member = chessboard_membership(grid, block_side)
    area_h = float(member.sum()) * grid.cell_size**2
    area_l = grid.area - area_h
    lam_hh, lam_hl, lam_lh, lam_ll = solve_chessboard_densities(
        total_demand, area_h, area_l, rho_h, rho_hh
    )
    return ChessboardSpec(
        block_side=block_side,
        rho_h=rho_h,
        rho_hh=rho_hh,
        area_h=area_h,
        area_l=area_l,
        lam_hh=lam_hh,
        lam_hl=lam_hl,
        lam_lh=lam_lh,
        lam_ll=lam_ll,
        lam_bo_h=rho_h * total_demand / area_h,
        lam_bo_l=(1.0 - rho_h) * total_demand / area_l,
        lam_al_h=rho_h * total_demand / area_h,
        lam_al_l=(1.0 - rho_h) * total_demand / area_l,
    )


def generate_chessboard_demand(
    grid: Grid, total_demand: float, pattern_id: int,
    rho_h: float = 0.9, rho_hh: float = 0.9,
) -> ODMatrix:
    spec = make_chessboard_spec(grid, total_demand, pattern_id, rho_h, rho_hh)
    member = chessboard_membership(grid, spec.block_side)
    levels = np.where(member, 1, 0)
    table = np.array([[spec.lam_ll, spec.lam_lh], [spec.lam_hl, spec.lam_hh]])
    density = table[levels[:, :, None, None], levels[None, None, :, :]]
    return ODMatrix(
        grid=grid, density=np.ascontiguousarray(density),
        total_demand=float(total_demand),
    )


_PATTERNS = (
    "uniform", "monocentric", "commute",
    "chessboard1", "chessboard2", "chessboard3", "chessboard4",
)


def generate_demand(grid: Grid, pattern: str, total_demand: float) -> ODMatrix:
    """Dispatch on a pattern name (the CLI and scenario harness entry point)."""
    if pattern == "uniform":
        return generate_uniform_demand(grid, total_demand)
    if pattern in ("monocentric", "commute"):
        return generate_smooth_demand(grid, total_demand, smooth_preset(pattern))
    if pattern.startswith("chessboard"):
        try:
            pattern_id = int(pattern[len("chessboard"):])
        except ValueError:
            pattern_id = -1
        return generate_chessboard_demand(grid, total_demand, pattern_id)
    raise DemandError(
        f"unknown demand pattern {pattern!r}; choose from {_PATTERNS}"
    )


@dataclass(frozen=True, eq=False)
class FluxReduction:
    """Flux maxima used by capacity constraints: per row, per column, global."""

    row_ew: np.ndarray  # (n,) max over E/W directions and x, per row y
    col_ns: np.ndarray  # (n,) max over N/S directions and y, per column x
    ew_max: float
    ns_max: float


@dataclass(frozen=True, eq=False)
class DemandAggregates:
    """Per-direction demand fields plus the flux reductions, [dir, x, y]."""

    grid: Grid
    total_demand: float
    bo: np.ndarray  # initial boardings, pas/(km^2 hr)
    al: np.ndarray  # final alightings, pas/(km^2 hr)
    fl: np.ndarray  # on-board flux, pas/(km hr)
    tr: np.ndarray  # transfers onto the direction, pas/(km^2 hr)
    row_flux_ew: np.ndarray
    col_flux_ns: np.ndarray
    flux_ew_max: float
    flux_ns_max: float


def _flux_reduction(fl: np.ndarray) -> FluxReduction:
    row_ew = np.maximum(fl[DIR_E], fl[DIR_W]).max(axis=0)  # over x, per y
    col_ns = np.maximum(fl[DIR_N], fl[DIR_S]).max(axis=1)  # over y, per x
    return FluxReduction(
        row_ew=row_ew,
        col_ns=col_ns,
        ew_max=float(row_ew.max()),
        ns_max=float(col_ns.max()),
    )


def reduce_flux(agg: DemandAggregates) -> FluxReduction:
    """Recompute the flux maxima from the raw per-direction flux fields."""
    return _flux_reduction(agg.fl)


def aggregate_demand(
    grid: Grid, od: ODMatrix, backend: str | None = None
) -> DemandAggregates:
    """Route all OD pairs and accumulate the demand fields the cost model uses."""
    if od.grid.n_cells != grid.n_cells or od.grid.cell_size != grid.cell_size:
        raise ValueError("od matrix was built on a different grid")
    bo, al, fl, tr = accumulate_od(od.density, grid.cell_size, backend=backend)
    red = _flux_reduction(fl)
    return DemandAggregates(
        grid=grid,
        total_demand=od.total_demand,
        bo=bo,
        al=al,
        fl=fl,
        tr=tr,
        row_flux_ew=red.row_ew,
        col_flux_ns=red.col_ns,
        flux_ew_max=red.ew_max,
        flux_ns_max=red.ns_max,
    )
