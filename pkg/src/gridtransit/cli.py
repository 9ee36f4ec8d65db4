"""Command-line interface.

Subcommands mirror the library pipeline: ``demand gen`` writes an OD
matrix CSV, ``solve`` runs one optimizer on one scenario, ``sweep`` runs
the full comparison grid, and ``export`` turns stored results into
plot-ready CSV tables.
"""

from __future__ import annotations

import json
from pathlib import Path

import click

from .cost import HETEROGENEOUS, HOMOGENEOUS, CostBreakdown
from .demand import generate_demand
from .exports import (
    breakdown_row,
    read_od_csv,
    write_breakdown_csv,
    write_heatmap_csv,
    write_od_csv,
)
from .grid import build_grid
from .scenarios import (
    Scenario,
    load_sweep_config,
    run_method,
    run_sweep,
    scenario_from_dict,
    SweepConfig,
)

_NETWORK_ALIASES = {
    "het": HETEROGENEOUS,
    "hom": HOMOGENEOUS,
    HETEROGENEOUS: HETEROGENEOUS,
    HOMOGENEOUS: HOMOGENEOUS,
}


@click.group()
def main():
    """Grid transit network design: demand generation, GP and CD solvers."""


@main.group()
def demand():
    """Demand matrix utilities."""


@demand.command("gen")
@click.option("--pattern", required=True, help="uniform | monocentric | commute | chessboard1..4")
@click.option("--total", type=float, required=True, help="total demand, passengers per hour")
@click.option("--side", type=float, default=10.0, show_default=True, help="city side length, km")
@click.option("--delta", type=float, default=0.5, show_default=True, help="cell size, km")
@click.option("--seed", type=int, default=0, show_default=True,
              help="recorded for provenance; generators are deterministic")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def demand_gen(pattern, total, side, delta, seed, out):
    """Generate an OD matrix and write it as CSV."""
    grid = build_grid(side, delta)
    od = generate_demand(grid, pattern, total)
    write_od_csv(od, out)
    click.echo(f"wrote {out} (pattern={pattern}, total={total}, seed={seed})")


@main.command()
@click.option("--method", type=click.Choice(["gp", "cd"]), required=True)
@click.option("--network", type=click.Choice(sorted(_NETWORK_ALIASES)), default=None,
              help="overrides the network kind in the scenario file")
@click.option("--scenario", "scenario_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="scenario JSON file")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
def solve(method, network, scenario_path, out_dir):
    """Solve one scenario with one method and write its reports."""
    data = json.loads(Path(scenario_path).read_text())
    if network is not None:
        data["network"] = _NETWORK_ALIASES[network]
    scenario = scenario_from_dict(data)
    result = run_method(scenario, method)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {"scenario": scenario.to_dict(), method: result.to_dict()}
    (out / "result.json").write_text(json.dumps(payload, indent=2) + "\n")
    row = breakdown_row(
        scenario.pattern, scenario.total_demand, scenario.vot,
        scenario.network, method, result.breakdown, scenario.total_demand,
    )
    write_breakdown_csv(row, out / "breakdown.csv")
    click.echo(
        f"{method} Z={result.z:.6f} Z/pax={result.z_per_pax:.6f} "
        f"-> {out / 'result.json'}"
    )


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="sweep config JSON; defaults to the full grid")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--jobs", type=int, default=1, show_default=True)
def sweep(config_path, out_dir, jobs):
    """Run the GP-vs-CD scenario grid and write results/summary/rows files."""
    config = load_sweep_config(config_path) if config_path else SweepConfig()
    output = run_sweep(config, out_dir, jobs=jobs)
    click.echo(
        f"{len(output.rows)} scenarios ok, {len(output.errors)} failed "
        f"-> {output.results_path}"
    )
    if output.errors:
        for err in output.errors:
            click.echo(f"  failed: {err['error']}", err=True)
        raise SystemExit(1)


def _breakdown_rows_from_entries(entries) -> list[dict]:
    if isinstance(entries, dict):
        entries = [entries]
    rows = []
    for entry in entries:
        if "error" in entry:
            continue
        scenario = entry["scenario"]
        for method in ("gp", "cd"):
            if method not in entry:
                continue
            block = entry[method]
            rows.append(breakdown_row(
                scenario["pattern"], scenario["total_demand"], scenario["vot"],
                scenario["network"], method,
                CostBreakdown.from_dict(block["breakdown"]),
                scenario["total_demand"],
            ))
    return rows


@main.command()
@click.option("--what", type=click.Choice(["breakdown", "heatmap"]), required=True)
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="breakdown: result.json or rows.json; heatmap: OD matrix CSV")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
def export(what, in_path, out_path):
    """Export plot-ready CSV tables from stored results."""
    if what == "breakdown":
        entries = json.loads(Path(in_path).read_text())
        rows = _breakdown_rows_from_entries(entries)
        if not rows:
            raise click.ClickException(f"no result entries found in {in_path}")
        write_breakdown_csv(rows, out_path)
    else:
        od = read_od_csv(in_path)
        write_heatmap_csv(od, out_path)
    click.echo(f"wrote {out_path}")


if __name__ == "__main__":
    main()
