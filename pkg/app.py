#!/usr/bin/env python3
"""
delay-margin command line.

    python app.py margin A0.txt A1.txt --format text
    python app.py baseline A0.txt A1.txt
    python app.py simulate A0.txt A1.txt --tau 0.5 --out traj.csv
    python app.py mem-estimate --n 200

Exit codes: 0 success, 1 internal error or failed validation, 2 when the
system violates a precondition of the sweep (unstable at tau = 0, or s = 0 a
root for every delay).
"""

import functools
import json
import logging
import math
import sys
from typing import Optional

import click
import numpy as np

import config
from dde_simulator import SimConfig, Verdict, classify_envelope, default_dt, default_horizon, simulate, verdict
from errors import ConfigurationError, DelayMarginError, PreconditionError
from kronecker_baseline import baseline_report, estimate_memory
from method_comparison import run_comparison
from rekasius_sweep import SweepConfig, analyze, estimate_sweep_memory, find_crossings, root_crossing_residual
from report import (baseline_document, build_report, crossing_records, crossings_frame,
                    crossings_table, to_csv, to_json, to_text, trajectory_to_csv)
from system_model import load_system

logger = logging.getLogger('delay_margin')

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PRECONDITION = 2


def configure_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else getattr(logging, config.LOG_LEVEL, logging.INFO)
    root = logging.getLogger()
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter('%(message)s'))
        root.addHandler(handler)
    root.setLevel(level)


def handle_errors(command):
    """Map library exceptions onto the exit-code contract"""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except PreconditionError as e:
            click.echo(f"❌ {e}", err=True)
            sys.exit(EXIT_PRECONDITION)
        except DelayMarginError as e:
            click.echo(f"❌ {type(e).__name__}: {e}", err=True)
            sys.exit(EXIT_ERROR)
        except Exception as e:
            logger.debug("Unhandled error", exc_info=True)
            click.echo(f"❌ Internal error: {type(e).__name__}: {e}", err=True)
            sys.exit(EXIT_ERROR)

    return wrapper


def sweep_options(command):
    options = [
        click.option('--t-min', type=float, default=config.T_MIN, show_default=True, help='Lower end of the T grid (s).'),
        click.option('--t-max', type=float, default=config.T_MAX, show_default=True, help='Upper end of the T grid (s).'),
        click.option('--t-step', type=float, default=config.T_STEP, show_default=True, help='T grid spacing (s).'),
        click.option('--eps-imag', type=float, default=None, help='Imaginary-axis tolerance (default scales with the matrix norms).'),
        click.option('--k-max', type=int, default=config.K_MAX, show_default=True, help='Delay ladder depth per crossing.'),
        click.option('--workers', type=int, default=config.WORKERS, show_default=True, help='Processes for the coarse scan.'),
        click.option('--no-widen', is_flag=True, help='Keep the T range exactly as given.'),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _sweep_config(t_min, t_max, t_step, eps_imag, k_max, workers, no_widen) -> SweepConfig:
    return SweepConfig(t_min=t_min, t_max=t_max, t_step=t_step, eps_imag=eps_imag,
                       k_max=k_max, workers=workers, auto_widen=not no_widen)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, 'w') as f:
            f.write(text)
        click.echo(f"💾 Saved to {out}", err=True)
    else:
        click.echo(text, nl=not text.endswith('\n'))


def format_bytes(value: float) -> str:
    for unit, scale in (('TB', 1e12), ('GB', 1e9), ('MB', 1e6), ('kB', 1e3)):
        if value >= scale:
            return f"{value / scale:.4g} {unit}"
    return f"{value:.4g} B"


@click.group(name='delay-margin')
@click.option('--verbose', '-v', is_flag=True, help='Debug logging on stderr.')
def cli(verbose):
    """Delay margin analysis of x'(t) = A0 x(t) + A1 x(t - tau)."""
    configure_logging(verbose)


@cli.command()
@click.argument('a0_path', type=click.Path(dir_okay=False))
@click.argument('a1_path', type=click.Path(dir_okay=False))
@sweep_options
@click.option('--format', 'fmt', type=click.Choice(['json', 'csv', 'text']), default='json', show_default=True)
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='Write the report here instead of stdout.')
@click.option('--csv', 'csv_path', type=click.Path(dir_okay=False), default=None, help='Also write the crossings table as CSV.')
@handle_errors
def margin(a0_path, a1_path, t_min, t_max, t_step, eps_imag, k_max, workers, no_widen, fmt, out, csv_path):
    """Delay margin, crossing table and stable windows."""
    system = load_system(a0_path, a1_path)
    cfg = _sweep_config(t_min, t_max, t_step, eps_imag, k_max, workers, no_widen)
    logger.info("🚀 Delay margin analysis of a %dx%d system", system.n, system.n)
    result = analyze(system, cfg)
    doc = build_report(system, result, inputs=(a0_path, a1_path))
    rendered = {'json': lambda: to_json(doc) + '\n', 'csv': lambda: to_csv(doc), 'text': lambda: to_text(doc)}[fmt]()
    _emit(rendered, out)
    if csv_path:
        with open(csv_path, 'w') as f:
            f.write(to_csv(doc))


@cli.command()
@click.argument('a0_path', type=click.Path(dir_okay=False))
@click.argument('a1_path', type=click.Path(dir_okay=False))
@sweep_options
@click.option('--format', 'fmt', type=click.Choice(['json', 'csv', 'text']), default='json', show_default=True)
@click.option('--out', type=click.Path(dir_okay=False), default=None)
@handle_errors
def crossings(a0_path, a1_path, t_min, t_max, t_step, eps_imag, k_max, workers, no_widen, fmt, out):
    """Root crossings and their delay ladders, without the stability walk."""
    system = load_system(a0_path, a1_path)
    cfg = _sweep_config(t_min, t_max, t_step, eps_imag, k_max, workers, no_widen)
    found, _ = find_crossings(system, cfg)
    records = crossing_records(found)
    if fmt == 'json':
        rendered = json.dumps({'crossings': records}, indent=2, sort_keys=True) + '\n'
    elif fmt == 'csv':
        rendered = crossings_frame(records).to_csv(index=False, float_format='%.17g')
    else:
        rendered = crossings_table(records) + '\n'
    _emit(rendered, out)


@cli.command()
@click.argument('a0_path', type=click.Path(dir_okay=False))
@click.argument('a1_path', type=click.Path(dir_okay=False))
@click.option('--k-max', type=int, default=config.K_MAX, show_default=True)
@click.option('--eps-imag', type=float, default=None)
@click.option('--memory-cap', type=float, default=config.MEMORY_CAP_BYTES, show_default=True,
              help='Refuse Kronecker companions larger than this many bytes.')
@click.option('--format', 'fmt', type=click.Choice(['json', 'text']), default='json', show_default=True)
@click.option('--out', type=click.Path(dir_okay=False), default=None)
@handle_errors
def baseline(a0_path, a1_path, k_max, eps_imag, memory_cap, fmt, out):
    """Crossing frequencies and delays from the Kronecker baseline."""
    system = load_system(a0_path, a1_path)
    if k_max < 0:
        raise ConfigurationError("k_max must be nonnegative")
    genuine, spurious = baseline_report(system, k_max=k_max, eps_imag=eps_imag, memory_cap=memory_cap)
    doc = baseline_document(genuine, spurious)
    if fmt == 'json':
        rendered = json.dumps(doc, indent=2, sort_keys=True) + '\n'
    else:
        lines = [f"{'w (rad/s)':>12}  Time delay (s)"]
        for omega, taus in genuine:
            lines.append(f"{omega:>12.6g}  " + ', '.join(f"{t:.6g}" for t in taus[:2]))
        for omega in spurious:
            lines.append(f"{omega:>12.6g}  spurious")
        rendered = '\n'.join(lines) + '\n'
    _emit(rendered, out)


@cli.command(name='simulate')
@click.argument('a0_path', type=click.Path(dir_okay=False))
@click.argument('a1_path', type=click.Path(dir_okay=False))
@click.option('--tau', type=float, required=True, help='Delay (s).')
@click.option('--horizon', type=float, default=100.0, show_default=True, help='Simulated time (s).')
@click.option('--dt', type=float, default=None, help='Integration step (s); default min(0.01, tau/20, horizon/1000).')
@click.option('--x0', default=None, help='Comma-separated initial state; default normalized ones.')
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='Trajectory CSV (t, x1..xn).')
@handle_errors
def simulate_cmd(a0_path, a1_path, tau, horizon, dt, x0, out):
    """Integrate the delayed system and classify the response."""
    system = load_system(a0_path, a1_path)
    if x0 is None:
        state = np.ones(system.n) / math.sqrt(system.n)
    else:
        try:
            state = np.array([float(v) for v in x0.split(',')])
        except ValueError:
            raise ConfigurationError(f"x0 must be comma-separated numbers, got {x0!r}") from None
    step = default_dt(tau, horizon) if dt is None else dt
    trajectory = simulate(system, SimConfig(tau=tau, horizon=horizon, dt=step, x0=tuple(state)))
    if out:
        trajectory_to_csv(trajectory, out)
        click.echo(f"💾 Trajectory saved to {out}", err=True)
    outcome = classify_envelope(trajectory, horizon)
    final_norm = float(np.linalg.norm(trajectory.x[-1]))
    click.echo(f"t_end = {trajectory.t[-1]:.6g} s, |x(t_end)| = {final_norm:.6g}, "
               f"diverged = {trajectory.diverged}, "
               f"verdict = {outcome.value}")


@cli.command(name='mem-estimate')
@click.option('--n', 'n_values', type=int, multiple=True, help='System dimension; may be repeated.')
@click.option('--n-min', type=int, default=None)
@click.option('--n-max', type=int, default=None)
@click.option('--n-step', type=int, default=1, show_default=True)
@click.option('--workers', type=int, default=1, show_default=True)
@click.option('--format', 'fmt', type=click.Choice(['text', 'csv']), default='text', show_default=True)
@handle_errors
def mem_estimate(n_values, n_min, n_max, n_step, workers, fmt):
    """Storage of the Kronecker companion (and the sweep companion) versus n."""
    values = list(n_values)
    if n_min is not None or n_max is not None:
        if n_min is None or n_max is None or n_min > n_max or n_step < 1:
            raise ConfigurationError("--n-min/--n-max need n_min <= n_max and a positive --n-step")
        values.extend(range(n_min, n_max + 1, n_step))
    if not values:
        raise ConfigurationError("give --n or an --n-min/--n-max range")

    if fmt == 'csv':
        click.echo('n,kron_bytes,sweep_bytes')
    for n in values:
        kron = estimate_memory(n, 8)
        sweep = estimate_sweep_memory(n, 8, workers)
        if fmt == 'csv':
            click.echo(f"{n},{kron},{sweep}")
        else:
            click.echo(f"n = {n}: {format_bytes(kron)} (Kronecker), {format_bytes(sweep)} (sweep, {workers} worker(s))")


@cli.command()
@click.argument('a0_path', type=click.Path(dir_okay=False))
@click.argument('a1_path', type=click.Path(dir_okay=False))
@sweep_options
@click.option('--horizon', type=float, default=None, help='Simulated time; default 50 periods of the slowest crossing.')
@click.option('--band', type=float, default=0.05, show_default=True, help='Relative offset around the margin.')
@handle_errors
def validate(a0_path, a1_path, t_min, t_max, t_step, eps_imag, k_max, workers, no_widen, horizon, band):
    """Check the delay margin by simulating just below and just above it."""
    system = load_system(a0_path, a1_path)
    cfg = _sweep_config(t_min, t_max, t_step, eps_imag, k_max, workers, no_widen)
    result = analyze(system, cfg)
    if not 0.0 < band < 1.0:
        raise ConfigurationError("band must lie in (0, 1)")

    scale = 1.0 + float(np.linalg.norm(system.a0, 2)) + float(np.linalg.norm(system.a1, 2))
    residual = max((root_crossing_residual(system, c.omega_c, c.tau0) / scale ** system.n
                    for c in result.crossings), default=0.0)

    if result.is_unbounded:
        click.echo(json.dumps({'delay_margin': None, 'checks': [], 'max_residual': residual,
                               'passed': True}, indent=2))
        logger.info("📊 Stable for every delay; nothing to bracket")
        sys.exit(EXIT_OK)

    slowest = min(c.omega_c for c in result.crossings)
    horizon = default_horizon(slowest) if horizon is None else horizon
    checks = []
    for tau, expected in ((result.delay_margin * (1.0 - band), Verdict.DECAYING),
                          (result.delay_margin * (1.0 + band), Verdict.GROWING)):
        outcome = verdict(system, tau, horizon)
        checks.append({'tau': tau, 'expected': expected.value, 'verdict': outcome.value,
                       'ok': outcome is expected})
    passed = all(check['ok'] for check in checks)
    click.echo(json.dumps({'delay_margin': result.delay_margin, 'horizon': horizon, 'checks': checks,
                           'max_residual': residual, 'passed': passed}, indent=2))
    if passed:
        logger.info("✅ Simulation agrees with the delay margin %.6g s", result.delay_margin)
        sys.exit(EXIT_OK)
    logger.error("❌ Simulation disagrees with the delay margin %.6g s", result.delay_margin)
    sys.exit(EXIT_ERROR)


@cli.command()
@click.option('--n', 'n_values', type=int, multiple=True, help='System dimensions to tabulate; may be repeated.')
@click.option('--grid-points', type=int, default=2_000_001, show_default=True, help='T values in one sweep.')
@click.option('--workers', type=int, default=1, show_default=True)
@click.option('--repeats', type=int, default=3, show_default=True)
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='Save the comparison as JSON.')
@handle_errors
def compare(n_values, grid_points, workers, repeats, out):
    """Predicted cost of the sweep against the Kronecker baseline."""
    if grid_points < 1 or workers < 1:
        raise ConfigurationError("grid-points and workers must be positive")
    results = run_comparison(list(n_values) or [3, 10, 50, 100, 200], grid_points=grid_points,
                             workers=workers, repeats=repeats, save_path=out)
    click.echo(f"{'n':>5} {'Kronecker (s)':>14} {'sweep (s)':>12} {'Kronecker mem':>14} {'sweep mem':>12}")
    for row in results['methods']:
        click.echo(f"{row['n']:>5} {row['kron_seconds']:>14.4g} {row['sweep_seconds']:>12.4g} "
                   f"{format_bytes(row['kron_memory_bytes']):>14} {format_bytes(row['sweep_memory_bytes']):>12}")


if __name__ == '__main__':
    cli()
