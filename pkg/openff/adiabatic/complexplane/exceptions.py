"""Exceptions raised when working in the complex time plane"""
from openff.adiabatic.utilities.exceptions import AdiabaticException


class CrossingNotFoundError(AdiabaticException):
    """An exception raised when the Newton iteration for a crossing point does not
    converge."""

    def __init__(
        self, seed: complex, last_iterate: complex, residual: float, n_iterations: int
    ):
        super().__init__(
            f"Newton's method did not locate a crossing point from the seed "
            f"z={seed:.6g} within {n_iterations} iterations: the last iterate was "
            f"z={last_iterate:.6g} with |gap^2|={residual:.3e}."
        )

        self.seed = seed
        self.last_iterate = last_iterate
        self.residual = residual
        self.n_iterations = n_iterations


class CrossingOutsideStripError(AdiabaticException):
    """An exception raised when the search for a crossing point leaves the strip of
    analyticity of the model."""

    def __init__(self, location: complex, strip_halfwidth: float):
        super().__init__(
            f"The crossing point search reached z={location:.6g} which lies outside "
            f"of the strip |Im z| < {strip_halfwidth:.6g}."
        )

        self.location = location
        self.strip_halfwidth = strip_halfwidth


class NoBranchExchangeError(AdiabaticException):
    """An exception raised when continuing an eigenvalue around a loop returns it to
    itself, i.e. the loop does not encircle a branch point of that eigenvalue."""

    def __init__(self, label: int):
        super().__init__(
            f"The eigenvalue with label {label} returned to itself after being "
            f"continued around the loop, so the loop does not encircle a crossing "
            f"point of this branch."
        )

        self.label = label


class LoopConvergenceError(AdiabaticException):
    """An exception raised when a loop quantity does not converge as the number of
    samples is doubled."""

    def __init__(self, quantity: str, relative_change: float, n_samples: int):
        super().__init__(
            f"The {quantity} did not converge: the relative change was still "
            f"{relative_change:.3e} with {n_samples} samples per side."
        )

        self.quantity = quantity
        self.relative_change = relative_change
        self.n_samples = n_samples


class ClosureNotProportionalError(AdiabaticException):
    """An exception raised when an eigenvector transported around a loop is not
    proportional to the eigenvector of the branch it was exchanged with."""

    def __init__(self, label: int, target_label: int, residual: float):
        super().__init__(
            f"The eigenvector with label {label} transported around the loop is not "
            f"proportional to the eigenvector with label {target_label}: the relative "
            f"component in its orthogonal complement is {residual:.3e}."
        )

        self.label = label
        self.target_label = target_label
        self.residual = residual


class PathOutsideStripError(AdiabaticException):
    """An exception raised when a path leaves the strip of analyticity of a
    model."""

    def __init__(self, imaginary_part: float, strip_halfwidth: float):
        super().__init__(
            f"The path reaches |Im z| = {imaginary_part:.6g} which lies outside of the "
            f"strip |Im z| < {strip_halfwidth:.6g}."
        )

        self.imaginary_part = imaginary_part
        self.strip_halfwidth = strip_halfwidth


class EnclosedCrossingError(AdiabaticException):
    """An exception raised when the loop built around a crossing point also encloses
    another crossing of the same pair of eigenvalues."""

    def __init__(self, location: complex, other: complex):
        super().__init__(
            f"The loop around the crossing point at z={location:.6g} also encloses the "
            f"crossing point at z={other:.6g}. Decrease the margin of the loop."
        )

        self.location = location
        self.other = other
