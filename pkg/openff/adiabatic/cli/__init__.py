from openff.adiabatic.cli.cli import cli

__all__ = ["cli"]
