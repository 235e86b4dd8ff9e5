"""Command-line interface for jt-cqed."""

import functools
import logging
import sys
from typing import Any, Dict, Optional

import click

from . import __version__
from .config import FORMATS, METHODS, SWEEP_TARGETS, load_config
from .errors import JTCQEDError, NumericalError
from .report import write_report
from .runners import run

logger = logging.getLogger(__name__)

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _configure_logging(verbose: int, quiet: bool) -> None:
    if quiet:
        level = logging.ERROR
    elif verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


def _exit_code(exc: JTCQEDError) -> int:
    return EXIT_NUMERICAL if isinstance(exc, NumericalError) else EXIT_CONFIG


def run_options(func):
    """Options shared by every subcommand."""

    @click.option(
        "--config",
        "config_path",
        type=click.Path(exists=True, dir_okay=False),
        help="YAML run configuration",
    )
    @click.option("--out", "-o", type=click.Path(dir_okay=False), help="Output file (default: stdout)")
    @click.option("--format", "fmt", type=click.Choice(FORMATS), help="Output format (default: csv)")
    @click.option("--dims", help="Fock truncation per mode, 'd1,d2' (default: 2,2)")
    @click.option("--jobs", "-j", type=int, help="Worker processes for sweeps (default: 1)")
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        return func(*args, **kwargs)

    return wrapper


def _execute(
    ctx: click.Context,
    mode: str,
    config_path: Optional[str],
    out: Optional[str],
    fmt: Optional[str],
    dims: Optional[str],
    jobs: Optional[int],
    **extra: Any,
) -> None:
    quiet = ctx.obj.get("quiet", False) if ctx.obj else False
    overrides: Dict[str, Any] = {
        "dims": dims,
        "jobs": jobs,
        "output": {"path": out, "format": fmt},
    }
    overrides.update(extra)
    try:
        cfg = load_config(config_path, mode=mode, **overrides)
        logger.debug("resolved config: %s", cfg.to_dict())
        table = run(cfg)
        summary = write_report(
            table,
            output_file=cfg.output.path,
            fmt=cfg.output.format,
            stream=click.get_text_stream("stdout"),
        )
    except JTCQEDError as exc:
        click.echo(f"error: {exc.kind}: {exc}", err=True)
        ctx.exit(_exit_code(exc))

    if not quiet:
        click.echo(
            f"{mode}: {summary['rows']} rows x {summary['columns']} columns "
            f"({summary['format']}) -> {summary['report_file']}",
            err=True,
        )


@click.group()
@click.version_option(version=__version__, prog_name="jt-cqed")
@click.option("--verbose", "-v", count=True, help="More log output (-vv for debug)")
@click.option("--quiet", "-q", is_flag=True, help="Only report errors")
@click.pass_context
def cli(ctx: click.Context, verbose: int, quiet: bool):
    """Jahn-Teller quantum simulation with a qubit and two coupled resonators."""
    ctx.ensure_object(dict)
    ctx.obj["quiet"] = quiet
    _configure_logging(verbose, quiet)


@cli.command()
@run_options
@click.pass_context
def eigens(ctx, config_path, out, fmt, dims, jobs):
    """
    Lowest eigenvalues of the Hamiltonian over a parameter sweep.

    Without a sweep section the scaled model is swept over Delta in [-1.9, 1.9].
    """
    _execute(ctx, "eigens", config_path, out, fmt, dims, jobs)


@cli.command()
@run_options
@click.option("--method", type=click.Choice(METHODS), help="Spectrum evaluation (default: resolvent)")
@click.pass_context
def spectrum(ctx, config_path, out, fmt, dims, jobs, method):
    """
    Emission spectrum of resonator 1 in the dissipative steady state.

    With a sweep section the output is a long-format map (param, omega, P).
    """
    extra = {"spectrum": {"method": method}} if method else {}
    _execute(ctx, "spectrum", config_path, out, fmt, dims, jobs, **extra)


@cli.command()
@run_options
@click.option("--what", type=click.Choice(SWEEP_TARGETS), help="Quantity to sweep (default: spectrum)")
@click.option("--method", type=click.Choice(METHODS), help="Spectrum evaluation (default: resolvent)")
@click.pass_context
def sweep(ctx, config_path, out, fmt, dims, jobs, what, method):
    """Sweep eigenvalues or spectra over the config's sweep axis."""
    extra: Dict[str, Any] = {"what": what}
    if method:
        extra["spectrum"] = {"method": method}
    _execute(ctx, "sweep", config_path, out, fmt, dims, jobs, **extra)


@cli.command("map-params")
@run_options
@click.pass_context
def map_params(ctx, config_path, out, fmt, dims, jobs):
    """
    Convert between scaled, circuit and JT parameterisations.

    Circuit parameters must satisfy Omega1 = (lambda1/lambda2) J; otherwise the
    residual is reported and the command exits with status 2.
    """
    _execute(ctx, "map-params", config_path, out, fmt, dims, jobs)


@cli.command()
@run_options
@click.pass_context
def hardware(ctx, config_path, out, fmt, dims, jobs):
    """Resonator frequencies and hopping rate from lumped-element values."""
    _execute(ctx, "hardware", config_path, out, fmt, dims, jobs)


def main():
    """Entry point for the CLI."""
    cli()


if __name__ == "__main__":
    main()
