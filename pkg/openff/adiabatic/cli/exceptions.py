"""Exceptions raised by the command line interface"""
from typing import List

from openff.adiabatic.utilities.exceptions import AdiabaticException


class ConfigValidationError(AdiabaticException):
    """An exception raised when an experiment configuration could not be parsed or
    validated. Every problem found is collected rather than only the first."""

    def __init__(self, errors: List[str]):
        super().__init__(
            "The experiment configuration is invalid:\n"
            + "\n".join(f"  {error}" for error in errors)
        )

        self.errors = errors


class SweepPointError(AdiabaticException):
    """An exception raised when the computation at one point of a sweep fails."""

    def __init__(self, epsilon: float, message: str):
        super().__init__(f"The computation at epsilon={epsilon} failed: {message}")

        self.epsilon = epsilon
        self.message = message
