import contextlib
import logging

import click

from openff.adiabatic.cli.config import load_config
from openff.adiabatic.cli.exceptions import ConfigValidationError
from openff.adiabatic.cli.run import run
from openff.adiabatic.utilities.exceptions import AdiabaticException

_CONFIG_ERROR_CODE = 2
_NUMERICAL_ERROR_CODE = 3


@contextlib.contextmanager
def exit_codes():
    """Maps configuration errors onto exit code 2 and numerical failures onto
    exit code 3, printing their messages."""

    try:
        yield
    except ConfigValidationError as error:
        click.echo(str(error), err=True)
        raise click.exceptions.Exit(_CONFIG_ERROR_CODE)
    except AdiabaticException as error:
        click.echo(f"{error.__class__.__name__}: {error}", err=True)
        raise click.exceptions.Exit(_NUMERICAL_ERROR_CODE)


def experiment_command(operation: str, description: str) -> click.Command:
    """Creates the command which runs ``operation`` on a TOML configuration."""

    @click.command(name=operation, help=description)
    @click.option(
        "--config",
        "config_path",
        type=click.Path(exists=True, dir_okay=False),
        required=True,
        help="The path to the TOML experiment configuration.",
    )
    @click.option(
        "--output",
        "output_path",
        type=click.Path(dir_okay=False),
        default=f"{operation}.csv",
        help="The path to write the CSV table to. A run manifest is written next "
        "to it.",
        show_default=True,
    )
    @click.option(
        "--jobs",
        "n_jobs",
        type=click.IntRange(min=1),
        default=1,
        help="The number of processes to spread the epsilon grid across.",
        show_default=True,
    )
    @click.option(
        "--tolerance",
        type=float,
        default=None,
        help="The local error tolerance of the integrator, overriding the one in "
        "the configuration.",
    )
    def command(config_path: str, output_path: str, n_jobs: int, tolerance: float):
        logging.basicConfig(level=logging.INFO)

        with exit_codes():
            config = load_config(config_path, operation, tolerance)
            run(config, output_path, n_jobs)

    return command


simulate = experiment_command(
    "simulate",
    "Simulate one epsilon: a scattering transition probability, or the level "
    "populations across a window.",
)
sweep = experiment_command(
    "sweep", "Compute transition probabilities across an epsilon grid and fit them."
)
crossing = experiment_command(
    "crossing", "Locate the complex crossing points of a pair of eigenvalues."
)
loop_integral = experiment_command(
    "loop-integral", "Integrate an eigenvalue around a loop enclosing each crossing."
)
prefactor = experiment_command(
    "prefactor", "Compute the geometric prefactor of the loop around each crossing."
)
dissipativity = experiment_command(
    "dissipativity", "Check the Stokes lines leaving each crossing are dissipative."
)
superadiabatic = experiment_command(
    "superadiabatic",
    "Measure transitions in superadiabatic bases across an epsilon grid.",
)
compare = experiment_command(
    "compare", "Compare numerical transition probabilities with asymptotic estimates."
)
