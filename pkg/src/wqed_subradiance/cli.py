"""Command-line entry point: one subcommand per scan mode.

Exit codes: 0 on success, 2 on configuration/usage errors, 3 when any grid
cell fails numerically.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import __version__
from .errors import ConfigError, NumericalError
from .scan import MODES, run_scan, validate_config


@click.group()
@click.version_option(version=__version__, prog_name="wqed-scan")
def main():
    """Sweep decay rates, entanglement diagnostics, and scattering spectra
    of waveguide-coupled atom arrays."""


def _execute(mode: str, config_path: str, out_dir, workers, seed, fmt):
    try:
        spec = validate_config(config_path)
        if spec.mode != mode:
            raise ConfigError(
                f"config declares mode {spec.mode!r} but subcommand is {mode!r}",
                location="mode",
            )
        if out_dir is not None:
            spec.out_dir = Path(out_dir)
        if workers is not None:
            if workers < 1:
                raise ConfigError("workers must be >= 1", location="--workers")
            spec.workers = workers
        if fmt is not None:
            spec.fmt = fmt
        if seed is not None:
            spec.seed = seed
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    try:
        manifest = run_scan(spec)
    except NumericalError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(3)
    failed = [c for c in manifest.cells if c.status == "error"]
    if failed:
        click.echo(
            f"{len(failed)} of {len(manifest.cells)} cells failed; see run_manifest.json",
            err=True,
        )
        sys.exit(3)
    click.echo(f"wrote {len(manifest.outputs)} file(s) to {spec.out_dir}")


def _register(mode: str):
    @main.command(name=mode, help=f"Run a '{mode}' sweep from a config file.")
    @click.option("--config", "config_path", required=True,
                  type=click.Path(exists=True, dir_okay=False), help="YAML scan configuration.")
    @click.option("--out", "out_dir", default=None,
                  type=click.Path(file_okay=False), help="Output directory (overrides config).")
    @click.option("--workers", default=None, type=int, help="Worker count (overrides config).")
    @click.option("--seed", default=None, type=int,
                  help="Reserved; recorded in the manifest (no stochastic paths).")
    @click.option("--format", "fmt", default=None, type=click.Choice(["csv", "json"]),
                  help="Data file format (overrides config).")
    def command(config_path, out_dir, workers, seed, fmt, _mode=mode):
        _execute(_mode, config_path, out_dir, workers, seed, fmt)


for _mode in MODES:
    _register(_mode)


if __name__ == "__main__":
    main()
