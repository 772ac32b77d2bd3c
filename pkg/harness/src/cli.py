import functools
import logging
import sys

import click
from frameshrink.errors import FrameshrinkError
from payload_models.payloads import ExperimentConfig, ExperimentMode

from core.config import settings
from core.utils import _m, configure_logs_of_other_modules, context
from services.experiment_service import ExperimentService
from services.ioc import ioc

configure_logs_of_other_modules()
logger = logging.getLogger(__name__)

EXIT_VERIFY_FAILED = 1
EXIT_BAD_INPUT = 2


@click.group()
def cli():
    pass


def experiment_options(fn):
    """Flags shared by every mode; each one overrides the config file."""

    @click.option("--config", "config_path", type=click.Path(dir_okay=False), help="key=value file")
    @click.option("--seed", type=int, help="Base seed for the trial noise")
    @click.option("--sigma", help="Noise level, or a comma-separated grid")
    @click.option("--beta", type=float, help="Threshold multiplier for every method")
    @click.option("--mu", type=float, help="ADMM penalty parameter, must exceed 1/r")
    @click.option("--trials", type=int, help="Trials per noise level")
    @click.option("--workers", type=int, help="Trials run in parallel")
    @click.option("--out", type=click.Path(dir_okay=False), help="CSV report path")
    @click.option("--no-timestamp", is_flag=True, help="Omit the timestamp line and wall times")
    @functools.wraps(fn)
    def wrapper(**kwargs):
        return fn(**kwargs)

    return wrapper


def run_mode(mode: ExperimentMode, config_path, sigma, beta, out, no_timestamp, **flags):
    context.set(mode.value)
    overrides = {
        "mode": mode,
        "sigmas": sigma,
        "output": out,
        "timestamp": False if no_timestamp else None,
        **flags,
    }
    if beta is not None:
        overrides |= {
            "beta_l1": beta,
            "beta_nonconvex": beta,
            "beta_threshold": beta,
            "beta_reweighted": beta,
        }
    if mode is ExperimentMode.DENOISE2D:
        overrides["dimension"] = 2

    experiment_service: ExperimentService = ioc["ExperimentService"]
    try:
        config = ExperimentConfig.load(
            config_path, defaults={"workers": settings.WORKERS}, **overrides
        )
        report = experiment_service.run(config)
    except FrameshrinkError as exc:
        logger.error(_m("Experiment aborted", extra={"mode": mode.value, "error": str(exc)}))
        click.echo(str(exc), err=True)
        sys.exit(EXIT_BAD_INPUT)

    click.echo(str(report.path))
    if not report.passed:
        failed = sum(1 for row in report.rows if not row.passed)
        click.echo(f"{failed} of {len(report.rows)} checks failed", err=True)
        sys.exit(EXIT_VERIFY_FAILED)


@cli.command("denoise1d")
@experiment_options
def denoise1d(**kwargs):
    """Denoise one 1-D test signal with every method"""
    run_mode(ExperimentMode.DENOISE1D, **kwargs)


@cli.command("denoise2d")
@experiment_options
def denoise2d(**kwargs):
    """Denoise one image with every method"""
    run_mode(ExperimentMode.DENOISE2D, **kwargs)


@cli.command("compare")
@experiment_options
def compare(**kwargs):
    """Per-trial metrics of all methods"""
    run_mode(ExperimentMode.COMPARE, **kwargs)


@cli.command("sweep_sigma")
@experiment_options
def sweep_sigma(**kwargs):
    """Mean metric per noise level and method"""
    run_mode(ExperimentMode.SWEEP_SIGMA, **kwargs)


@cli.command("sweep_lambda")
@experiment_options
def sweep_lambda(**kwargs):
    """Mean metric over the beta grid"""
    run_mode(ExperimentMode.SWEEP_LAMBDA, **kwargs)


@cli.command("verify")
@experiment_options
def verify(**kwargs):
    """Self-checks of frames, penalties, convexity and the solver"""
    run_mode(ExperimentMode.VERIFY, **kwargs)


if __name__ == "__main__":
    cli()
