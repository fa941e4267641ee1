"""Exceptions raised when evaluating asymptotic formulae and fitting decay laws"""
from typing import Sequence

from openff.adiabatic.utilities.exceptions import AdiabaticException


class MultipleCrossingsError(AdiabaticException):
    """An exception raised when a model does not have exactly one crossing point of
    a pair of eigenvalues in the upper strip."""

    def __init__(self, pair: Sequence[int], locations: Sequence[complex]):
        formatted = ", ".join(f"{location:.6g}" for location in locations)

        super().__init__(
            f"Expected exactly one crossing point of the eigenvalues {tuple(pair)} in "
            f"the upper strip but found {len(locations)}: [{formatted}]."
        )

        self.pair = tuple(pair)
        self.locations = tuple(locations)


class MonodromyMismatchError(AdiabaticException):
    """An exception raised when continuing the eigenvalues around the loops of a
    cascade does not permute them as the product formula requires."""

    def __init__(self, loop_name: str, expected: Sequence[int], found: Sequence[int]):
        super().__init__(
            f"Continuing the eigenvalues around {loop_name} maps the labels "
            f"(1, 2, ...) to {tuple(found)} rather than {tuple(expected)}, so the "
            f"loops cannot be composed into the product formula."
        )

        self.loop_name = loop_name
        self.expected = tuple(expected)
        self.found = tuple(found)


class DecayFitError(AdiabaticException):
    """An exception raised when transition probabilities cannot be fit to an
    exponential decay law."""
