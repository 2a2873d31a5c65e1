"""
Command-line front end. Data goes to stdout (or --out), logs to stderr and the log file.

Parameters are resolved as: built-in defaults < JSON config file (--config) < CHIRAL_* environment
variables < command-line flags.
"""

import functools
import logging
import math
import time

import click
import numpy as np

from chiral.acceptance import criterion_groups, run_acceptance
from chiral.config.const import (
    DB_HISTORY_URL,
    DEFAULT_LOG_LEVEL,
    ENV_PREFIX,
    HISTORY_LIST_LIMIT,
    Command,
    ExitCode,
    OutputFormat,
    SweepParameter,
)
from chiral.config.logging_config import log_handler, console_handler
from chiral.disorder import DisorderConfig, ensemble_average
from chiral.errors import ChiralError, ConfigError
from chiral.model import GaussianPacket1, GaussianPacket2
from chiral.single_photon import delta_response, propagate_single, transmission_spectrum
from chiral.two_photon import large_delta_asymptotic, tail_amplitude, two_photon_out
from chiral.utils.db_utils import DBUtil
from chiral.utils.export_utils import DataTable, write_table
from chiral.utils.validation import (
    FLOAT_LIST,
    GRID,
    TOLERANCE,
    build_run_config,
    load_config_file,
)

logger = logging.getLogger(__name__)
logger.setLevel(DEFAULT_LOG_LEVEL)
logger.addHandler(log_handler)
logger.addHandler(console_handler)


def _envvar(name):
    return f"{ENV_PREFIX}{name.upper()}"


# ==============
# Shared options
# ==============


def emitter_options(func):
    func = click.option("--couplings", type=FLOAT_LIST, envvar=_envvar("couplings"), help="Couplings κ_a (comma-separated), needs --detunings.")(func)
    func = click.option("--detunings", type=FLOAT_LIST, envvar=_envvar("detunings"), help="Explicit detunings Δ_a (comma-separated), overrides --m.")(func)
    func = click.option("--m", "m", type=int, envvar=_envvar("m"), help="Number of emitters, all at the same frequency.")(func)
    return func


def output_options(func):
    func = click.option(
        "--format",
        "format",
        type=click.Choice([str(item) for item in OutputFormat]),
        envvar=_envvar("format"),
        help="Output format.",
    )(func)
    func = click.option("--out", type=click.Path(dir_okay=False), envvar=_envvar("out"), help="Output file, stdout when omitted.")(func)
    return func


def grid_option(func):
    return click.option("--grid", type=GRID, envvar=_envvar("grid"), help="Sampling grid start:stop:n.")(func)


def packet_options(func):
    func = click.option("--sigma", type=float, envvar=_envvar("sigma"), help="Packet width (units of 1/κ).")(func)
    func = click.option("--delta", type=float, envvar=_envvar("delta"), help="Carrier detuning (units of κ).")(func)
    return func


def seed_option(func):
    return click.option("--seed", type=int, envvar=_envvar("seed"), help="Nonnegative 64-bit seed.")(func)


# ===============
# Command runner
# ===============


def command_runner(command: Command):
    """
    Validates the collected parameters into a RunConfig, maps library errors to exit codes and
    records the run in the history database.
    """

    def decorator(func):
        @functools.wraps(func)
        @click.pass_context
        def wrapper(ctx, **params):
            started = time.perf_counter()
            config = None
            try:
                config = build_run_config(command, params)
                exit_code = func(ctx, config) or ExitCode.OK
            except ChiralError as e:
                logger.error("Command %s failed: %s", command, e, exc_info=True)
                click.echo(f"Error: {e}", err=True)
                exit_code = e.exit_code
            _record_run(ctx, command, config, exit_code, time.perf_counter() - started)
            ctx.exit(int(exit_code))

        return wrapper

    return decorator


def _record_run(ctx, command, config, exit_code, elapsed_seconds):
    if not ctx.obj.get("history"):
        return
    try:
        db = DBUtil()
        db.connect_db(ctx.obj["history_db"])
        db.create_all_tables()
        run = db.record_run(
            command,
            config.echo() if config is not None else {},
            config.seed if config is not None else None,
            config.out if config is not None else None,
            config.format if config is not None else None,
            exit_code,
            elapsed_seconds,
        )
        if ctx.obj.get("criteria"):
            db.record_criteria(run, ctx.obj["criteria"])
    except Exception as e:
        # History is best effort and never changes the exit code
        logger.warning("Unable to record run history: command=%s, error=%s", command, e)


# =====
# Group
# =====


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="JSON file of run parameters.")
@click.option("--history/--no-history", default=True, envvar=_envvar("history"), help="Record the run in the history database.")
@click.option("--history-db", default=DB_HISTORY_URL, envvar=_envvar("history_db"), show_default=True, help="SQLAlchemy URL of the history database.")
@click.pass_context
def main(ctx, config_path, history, history_db):
    """Scattering of one and two photons off emitters coupled to a chiral waveguide (units of κ)."""
    ctx.ensure_object(dict)
    ctx.obj.update(history=history, history_db=history_db)
    if config_path is None or ctx.invoked_subcommand is None:
        return
    try:
        command = Command(ctx.invoked_subcommand)
    except ValueError:
        raise click.UsageError(f"--config is not supported by {ctx.invoked_subcommand}")
    try:
        ctx.default_map = {ctx.invoked_subcommand: load_config_file(config_path, command)}
    except ConfigError as e:
        logger.error("Invalid config file: %s", e)
        raise click.BadParameter(str(e), param_hint="--config")


# ========
# Commands
# ========


@main.command(name=str(Command.SINGLE))
@emitter_options
@packet_options
@click.option("--center", type=float, envvar=_envvar("center"), help="Packet center.")
@click.option("--delta-input", is_flag=True, help="Sample the response to a δ-function input instead.")
@grid_option
@output_options
@command_runner(Command.SINGLE)
def single(ctx, config):
    """One photon through the array (y, amplitude, density, scattered part)."""
    emitters = config.emitters()
    grid = config.grid
    if config.delta_input:
        response = delta_response(grid, emitters, config.delta)
        table = DataTable(
            config.echo(),
            ["u", "re_K", "im_K", "density"],
            [grid.points, response.amplitudes.real, response.amplitudes.imag, response.density],
        )
    else:
        wave = propagate_single(GaussianPacket1(config.delta, config.sigma, config.center), emitters, grid)
        y = grid.points
        # The scattered part only separates from the incoming packet outside |y - center| < σ
        masked = np.abs(y - config.center) < config.sigma
        table = DataTable(
            config.echo(),
            ["y", "re_phi", "im_phi", "density", "density_scattered_only", "masked"],
            [y, wave.amplitudes.real, wave.amplitudes.imag, wave.density, wave.scattered_density, masked],
            {"norm": wave.norm()},
        )
    write_table(table, config.format, config.out)


@main.command(name=str(Command.TWO))
@emitter_options
@packet_options
@click.option("--mu", type=float, envvar=_envvar("mu"), help="Center-of-mass width; only inf is supported.")
@click.option("--form", type=click.Choice(["single", "double"]), envvar=_envvar("form"), help="Residue form of the irreducible T-matrix.")
@grid_option
@output_options
@command_runner(Command.TWO)
def two(ctx, config):
    """Two photons in the wide-pulse limit (relative coordinate d)."""
    result = two_photon_out(
        GaussianPacket2(config.delta, config.sigma, config.mu), config.emitters(), config.grid, form=config.form
    )
    table = DataTable(
        config.echo(),
        ["d", "re_phi2", "im_phi2", "density", "density_reducible", "density_irreducible"],
        [
            config.grid.points,
            result.phi2.real,
            result.phi2.imag,
            result.density,
            np.abs(result.reducible) ** 2,
            np.abs(result.irreducible) ** 2,
        ],
    )
    write_table(table, config.format, config.out)


@main.command(name=str(Command.DISORDER))
@click.option("--m", "m", type=int, envvar=_envvar("m"), help="Number of emitters.")
@packet_options
@click.option("--Sigma", "Sigma", type=float, envvar=_envvar("disorder_sigma"), help="Standard deviation of the detunings.")
@click.option("--samples", type=int, envvar=_envvar("samples"), help="Ensemble size.")
@seed_option
@click.option("--constrain-mean", is_flag=True, envvar=_envvar("constrain_mean"), help="Shift each draw to zero mean.")
@click.option("--workers", type=int, envvar=_envvar("workers"), help="Threads evaluating samples.")
@grid_option
@output_options
@command_runner(Command.DISORDER)
def disorder(ctx, config):
    """Disorder-averaged two-photon density."""
    stats = ensemble_average(
        DisorderConfig(
            M=config.m,
            Sigma=config.Sigma,
            delta=config.delta,
            sigma=config.sigma,
            grid=config.grid,
            n_samples=config.samples,
            seed=config.seed,
            constrain_mean=config.constrain_mean,
            degeneracy_tol=config.degeneracy_tol,
            workers=config.workers,
        )
    )
    table = DataTable(
        config.echo(),
        ["d", "mean_density", "median_abs_dev", "mean_abs_dev", "std_error"],
        [config.grid.points, stats.mean_density, stats.median_abs_dev, stats.mean_abs_dev, stats.std_error],
        {"n_samples": stats.n_samples_used, "n_resampled": stats.n_resampled, "seed": stats.seed},
    )
    write_table(table, config.format, config.out)


def _sweep_point(config, value):
    """Returns (emitters, packet) with the swept parameter replaced by value."""
    emitters = config.emitters()
    delta, sigma = config.delta, config.sigma
    if config.param == SweepParameter.M:
        if not float(value).is_integer() or value < 0:
            raise ConfigError(f"values: M must be a nonnegative integer, got {value!r}")
        emitters = build_run_config(Command.TWO, {"m": int(value)}).emitters()
    elif config.param == SweepParameter.DELTA:
        delta = value
    else:
        sigma = value
    return emitters, GaussianPacket2(delta, sigma)


def _has_asymptotic_form(emitters, packet):
    # The large-δ form is written for identical emitters with κ = 1
    return (
        packet.delta != 0
        and emitters.M > 0
        and len(set(emitters.detunings)) == 1
        and set(emitters.couplings) == {1.0}
    )


@main.command(name=str(Command.SWEEP))
@emitter_options
@packet_options
@click.option("--param", type=click.Choice([str(item) for item in SweepParameter]), envvar=_envvar("param"), help="Parameter to sweep.")
@click.option("--values", type=FLOAT_LIST, envvar=_envvar("values"), help="Comma-separated values of the swept parameter.")
@click.option("--d-min", type=float, envvar=_envvar("d_min"), help="Tail region |d| >= d_min.")
@grid_option
@output_options
@command_runner(Command.SWEEP)
def sweep(ctx, config):
    """Two-photon bunching ratio at d=0 and large-δ diagnostics over one parameter."""
    centre = config.grid.n_points // 2
    rows = {name: [] for name in ("value", "density_0", "incoming_density_0", "ratio", "asymptotic_distance", "tail_amplitude")}
    for value in config.values:
        emitters, packet = _sweep_point(config, value)
        result = two_photon_out(packet, emitters, config.grid)
        incoming = (packet.sigma * math.sqrt(math.pi)) ** -1 * math.exp(-0.5 * (config.grid.points[centre] / packet.sigma) ** 2)
        if _has_asymptotic_form(emitters, packet):
            asymptotic = large_delta_asymptotic(config.grid.points, packet.sigma, packet.delta, emitters.M)
            distance = float(np.max(np.abs(result.phi2 - asymptotic)))
        else:
            distance = math.nan
        rows["value"].append(float(value))
        rows["density_0"].append(float(result.density[centre]))
        rows["incoming_density_0"].append(incoming)
        rows["ratio"].append(float(result.density[centre]) / incoming)
        rows["asymptotic_distance"].append(distance)
        rows["tail_amplitude"].append(tail_amplitude(result, config.d_min))
    table = DataTable(config.echo(), list(rows), list(rows.values()))
    write_table(table, config.format, config.out)


@main.command(name=str(Command.VALIDATE))
@click.option("--filter", "filter", type=click.Choice(criterion_groups()), envvar=_envvar("filter"), help="Run one criterion group only.")
@click.option("--tolerance", "tolerances", type=TOLERANCE, multiple=True, help="Override a tolerance, criterion=value (repeatable).")
@seed_option
@output_options
@command_runner(Command.VALIDATE)
def validate(ctx, config):
    """Runs the acceptance suite; exits 1 when any criterion fails."""
    results = run_acceptance(config.filter, config.tolerances, config.seed)
    ctx.obj["criteria"] = results
    all_passed = all(result.passed for result in results)
    table = DataTable(
        config.echo(),
        ["name", "group", "passed", "measured", "tolerance", "detail"],
        [
            [result.name for result in results],
            [result.group for result in results],
            [result.passed for result in results],
            [result.measured for result in results],
            [result.tolerance for result in results],
            [result.detail for result in results],
        ],
        {"all_passed": all_passed, "n_criteria": len(results)},
    )
    write_table(table, config.format, config.out)
    if not all_passed:
        failed = [result.name for result in results if not result.passed]
        logger.warning("Acceptance failed: criteria=%s", failed)
        return ExitCode.VALIDATION_FAILED
    return ExitCode.OK


@main.command(name=str(Command.SPECTRUM))
@emitter_options
@grid_option
@output_options
@command_runner(Command.SPECTRUM)
def spectrum(ctx, config):
    """Transmission t(k), its unwrapped phase and the group delay."""
    result = transmission_spectrum(config.grid, config.emitters())
    table = DataTable(
        config.echo(),
        ["k", "re_t", "im_t", "phase", "group_delay"],
        [config.grid.points, result.t.real, result.t.imag, result.phase, result.group_delay],
    )
    write_table(table, config.format, config.out)


@main.command(name="history")
@click.option("--limit", type=int, default=HISTORY_LIST_LIMIT, show_default=True, help="Number of runs to list.")
@click.option("--command", "command", type=click.Choice([str(item) for item in Command]), help="Only runs of this command.")
@click.pass_context
def history(ctx, limit, command):
    """Lists recently recorded runs, newest first."""
    db = DBUtil()
    db.connect_db(ctx.obj["history_db"])
    db.create_all_tables()
    runs = db.recent_runs(limit, command)
    table = DataTable(
        {"limit": limit, "command": command},
        ["id", "command", "exit_code", "elapsed_seconds", "output_path", "started_at", "parameters"],
        [
            [run.id for run in runs],
            [run.command for run in runs],
            [run.exit_code for run in runs],
            [run.elapsed_seconds for run in runs],
            [run.output_path for run in runs],
            [run.started_at.isoformat(sep=" ", timespec="seconds") for run in runs],
            [run.parameters for run in runs],
        ],
    )
    write_table(table, OutputFormat.CSV)
