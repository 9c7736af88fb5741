import logging
from typing import Type

import click

from bassflow.common.errors import BassFlowError
from bassflow.common.pipeline import BassPipeline
from bassflow.common.spec import SolveSpec
from bassflow.pipelines import (CheckPipeline, OraclePipeline,
                                SimulatePipeline, SolvePipeline)

log = logging.getLogger(__name__)

MARGINAL_HELP = "gaussian:m,s | uniform:a,b | dirac:x | mix:w1*spec1+w2*spec2 | csv:<path>"


def marginal_options(func):
    func = click.option('--nu', default=None, help=f"Target marginal: {MARGINAL_HELP}")(func)
    func = click.option('--mu', default=None, help=f"Source marginal: {MARGINAL_HELP}")(func)
    return func


def common_options(func):
    options = [
        click.option('--config', 'config_path', default=None, type=click.Path(dir_okay=False),
                     help="JSON solve file; flags override its values."),
        click.option('--out', default=None, help="Output directory."),
        click.option('--seed', default=None, type=int, help="Unsigned 64-bit root seed."),
        click.option('--workers', default=None, type=int, help="Worker threads."),
        click.option('--n-atoms', 'n_atoms', default=None, type=int, help="Atoms used to discretise mu."),
        click.option('--quad-order', 'quad_order', default=None, type=int, help="Gauss-Hermite order."),
    ]
    for option in reversed(options):
        func = option(func)
    return marginal_options(func)


def _run(ctx: click.Context, pipeline: Type[BassPipeline], config_path, **flags):
    try:
        spec = SolveSpec.from_options(flags, config_path)
    except BassFlowError as e:
        click.echo(f"Error: {e.message}", err=True)
        ctx.exit(e.exit_code)
    ctx.exit(pipeline(spec).execute())


@click.group()
def cli():
    """Bass martingales between marginals in convex order."""


@cli.command()
@common_options
@click.option('--step', default=None, type=float, help="Initial Euler step.")
@click.option('--tol', default=None, type=float, help="Gradient-norm tolerance.")
@click.option('--t-max', 't_max', default=None, type=float, help="Time horizon.")
@click.option('--init', default=None, type=click.Path(dir_okay=False), help="bass_measure.csv to start from.")
@click.option('--delta', default=None, type=float, help="Slice depth of the bound certificate.")
@click.option('--samples-per-atom', 'samples_per_atom', default=None, type=int,
              help="Gaussian increments per atom in d >= 2.")
@click.pass_context
def solve(ctx, config_path, **flags):
    """Run the gradient flow and write trace.csv, bass_measure.csv and summary.json."""
    _run(ctx, SolvePipeline, config_path, **flags)


@cli.command()
@common_options
@click.option('--bass-measure', 'bass_measure', default=None, type=click.Path(dir_okay=False),
              help="bass_measure.csv from a previous solve (default: <out>/bass_measure.csv).")
@click.option('--n-paths', 'n_paths', default=None, type=int, help="Number of simulated paths.")
@click.option('--tol', default=None, type=float, help="Tolerance the solve used.")
@click.pass_context
def simulate(ctx, config_path, **flags):
    """Simulate the Bass martingale and write paths.csv and simulate.json."""
    _run(ctx, SimulatePipeline, config_path, **flags)


@cli.command()
@common_options
@click.pass_context
def check(ctx, config_path, **flags):
    """Check convex order, irreducibility and the standing hypotheses; write check.json."""
    _run(ctx, CheckPipeline, config_path, **flags)


@cli.command()
@common_options
@click.option('--budget', default=None, type=int, help="Evaluation budget.")
@click.option('--starts', default=None, type=int, help="Number of starts.")
@click.pass_context
def oracle(ctx, config_path, **flags):
    """Brute-force Bass measure over at most 16 atoms; write oracle.json."""
    _run(ctx, OraclePipeline, config_path, **flags)


if __name__ == '__main__':
    cli()
