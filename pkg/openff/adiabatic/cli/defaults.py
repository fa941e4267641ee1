import json

import click

from openff.adiabatic.complexplane import LoopSettings
from openff.adiabatic.models import MODEL_CATALOG
from openff.adiabatic.propagator import ConvergenceSettings, PropagatorSettings
from openff.adiabatic.superadiabatic import SuperadiabaticSettings


def default_settings() -> dict:
    """Returns the default value of every setting and model parameter."""

    return {
        "propagator": PropagatorSettings().dict(),
        "convergence": ConvergenceSettings().dict(),
        "loop": LoopSettings().dict(),
        "superadiabatic": SuperadiabaticSettings().dict(),
        "models": {
            name: {
                field.name: field.default
                for field in model_class.__fields__.values()
                if field.name != "type"
            }
            for name, model_class in MODEL_CATALOG.items()
        },
    }


@click.command(help="Print the default settings and model parameters as JSON.")
def defaults():
    click.echo(json.dumps(default_settings(), indent=2, sort_keys=True))
