# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0

"""Command line interface.

    meshless-claw run CONFIG
    meshless-claw nodes CONFIG [--output nodes.csv]
    meshless-claw faults SOLUTION --h H [--nF 10 --C1 1 --C2 2 --C3 5 --mu 1]
    meshless-claw errors SOLUTION (--reference GRID | --exact PROBLEM --t T)

Exit codes: 0 success, 1 usage or configuration error, 2 bad input data,
3 numerical failure.
"""
import sys
from pathlib import Path

import click

from meshless_claw import __version__
from meshless_claw.exceptions import (
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_OK,
    MeshlessClawError,
)
from meshless_claw.log import logging
from meshless_claw.models.bench import ProblemId
from meshless_claw.settings import parse_config
from meshless_claw.solver import MeshlessSolver

PROBLEM_CHOICE = click.Choice([problem.value for problem in ProblemId])


def _configure(ctx, config=None):
    level = ctx.obj["log_level"] or (config.log_level if config else "INFO")
    logging.configure_logging(level, ctx.obj["runtime_env"])


@click.group()
@click.version_option(__version__, prog_name="meshless-claw")
@click.option("--log-level", default=None, help="Overrides log_level of the config.")
@click.option("--json-logs", is_flag=True, help="Log one JSON object per event.")
@click.pass_context
def cli(ctx, log_level, json_logs):
    """Positive meshless schemes for scalar conservation laws."""
    ctx.ensure_object(dict)
    ctx.obj["log_level"] = log_level
    ctx.obj["runtime_env"] = "container" if json_logs else "local"


@cli.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--output-dir",
    type=click.Path(file_okay=False),
    default=None,
    help="Overrides output_dir of the config.",
)
@click.pass_context
def run(ctx, config_path, output_dir):
    """Run the scheme described by CONFIG_PATH.

    Writes solution.csv, diagnostics.csv and metadata.yaml to the output
    directory, plus errors.csv when a reference or exact solution exists.
    """
    config = parse_config(config_path)
    if output_dir is not None:
        config = config.model_copy(update={"output_dir": Path(output_dir)})
    _configure(ctx, config)
    solver = MeshlessSolver(config)
    result = solver.run()
    click.echo(
        f"t = {result.field.time:.6g}, min u = {result.field.values.min():.6g}, "
        f"max u = {result.field.values.max():.6g}"
    )
    click.echo(f"Results written to {config.output_dir}")


@cli.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def nodes(ctx, config_path, output):
    """Generate the node set of CONFIG_PATH and write it as CSV."""
    config = parse_config(config_path)
    _configure(ctx, config)
    solver = MeshlessSolver(config)
    path = Path(output) if output else Path(config.output_dir) / "nodes.csv"
    solver.write_nodes(solver.nodes, path)
    click.echo(
        f"{solver.nodes.size} nodes, "
        f"{int(solver.nodes.boundary_flag.sum())} on the boundary"
    )


@cli.command()
@click.argument("solution_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--h", "h", type=click.FloatRange(min=0, min_open=True), required=True)
@click.option("--nF", "n_f", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--C1", "c1", type=click.FloatRange(min=0, min_open=True), default=1.0)
@click.option("--C2", "c2", type=click.FloatRange(min=0, min_open=True), default=2.0)
@click.option("--C3", "c3", type=click.FloatRange(min=0, min_open=True), default=5.0)
@click.option("--mu", "mu", type=click.FloatRange(min=0), default=1.0)
@click.option(
    "--problem",
    type=PROBLEM_CHOICE,
    default=None,
    help="Take the (periodic) domain of this problem instead of the bounding box.",
)
@click.option("--output-dir", type=click.Path(file_okay=False), default=".")
@click.pass_context
def faults(ctx, solution_path, h, n_f, c1, c2, c3, mu, problem, output_dir):
    """Classify the nodes of a solution file into fault and smooth nodes.

    Writes faults.csv (node, coordinates, indicator, is_fault) and
    viscosity.csv (node, coordinates, mu) to the output directory.
    """
    _configure(ctx)
    data = MeshlessSolver.read_solution(solution_path)
    domain = MeshlessSolver.get_problem(problem).domain if problem else None
    node_set = MeshlessSolver.from_coordinates(data.coords, h, domain)
    fault_set, viscosity = MeshlessSolver.classify(
        node_set, data.values, n_f, c1, c2, c3, mu
    )
    output_dir = Path(output_dir)
    MeshlessSolver.write_faults(node_set, fault_set, output_dir / "faults.csv")
    MeshlessSolver.write_viscosity(node_set, viscosity, output_dir / "viscosity.csv")
    click.echo(
        f"{len(fault_set)} fault nodes of {node_set.size} "
        f"(alpha1 = {fault_set.alpha1:.6g}, alpha2 = {fault_set.alpha2:.6g})"
    )


@cli.command()
@click.argument("solution_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--reference", type=click.Path(exists=True, dir_okay=False))
@click.option("--exact", type=PROBLEM_CHOICE, default=None)
@click.option("--t", "t", type=click.FloatRange(min=0), default=None)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def errors(ctx, solution_path, reference, exact, t, output):
    """E1 and E2 errors of a solution file against a reference grid or an
    exact solution."""
    _configure(ctx)
    if (reference is None) == (exact is None):
        raise click.UsageError("Give exactly one of --reference and --exact")
    data = MeshlessSolver.read_solution(solution_path)
    if reference is not None:
        grid = MeshlessSolver.load_reference_grid(reference)
        values = MeshlessSolver.interp_grid(grid, data.coords)
    else:
        problem = MeshlessSolver.get_problem(exact)
        if problem.exact is None:
            raise click.UsageError(f"Problem {exact} has no exact solution")
        if t is None:
            raise click.UsageError("--exact needs --t")
        values = problem.exact(t, data.coords)
    report = MeshlessSolver.errors(data.values, values)
    if output is not None:
        MeshlessSolver.write_errors(report, output)
    click.echo(f"E1 = {report.E1:.6e}")
    click.echo(f"E2 = {report.E2:.6e}")
    click.echo(f"N = {report.N}")


def main(args=None):
    """Entry point, maps errors onto the documented exit codes."""
    logger = logging.get_logger(__name__)
    try:
        cli.main(args=args, prog_name="meshless-claw", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        sys.exit(EXIT_CONFIG)
    except click.ClickException as e:
        e.show()
        sys.exit(EXIT_CONFIG)
    except MeshlessClawError as e:
        logger.error("Command failed", error=type(e).__name__, exc_info=True)
        click.echo(f"Error: {e}", err=True)
        sys.exit(e.exit_code)
    except OSError as e:
        logger.error("Command failed", error=type(e).__name__, exc_info=True)
        click.echo(f"Error: {e}", err=True)
        sys.exit(EXIT_DATA)
    sys.exit(EXIT_OK)
