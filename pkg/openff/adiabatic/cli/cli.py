import click

from openff.adiabatic.cli.defaults import defaults
from openff.adiabatic.cli.experiment import (
    compare,
    crossing,
    dissipativity,
    loop_integral,
    prefactor,
    simulate,
    superadiabatic,
    sweep,
)
from openff.adiabatic.cli.fit import fit


@click.group()
def cli():
    """The root CLI group for all ``openff-adiabatic`` commands"""


cli.add_command(simulate)
cli.add_command(sweep)
cli.add_command(crossing)
cli.add_command(loop_integral)
cli.add_command(prefactor)
cli.add_command(dissipativity)
cli.add_command(superadiabatic)
cli.add_command(fit)
cli.add_command(compare)
cli.add_command(defaults)
