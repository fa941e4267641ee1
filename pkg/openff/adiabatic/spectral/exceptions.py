"""Exceptions raised when computing and continuing eigensystems"""
from typing import Sequence

from openff.adiabatic.utilities.exceptions import AdiabaticException


class NonHermitianError(AdiabaticException):
    """An exception raised when a hermitian eigensolver is handed a matrix which
    is not hermitian to within tolerance."""

    def __init__(self, defect: float, tolerance: float):
        super().__init__(
            f"The matrix is not hermitian: max|H - H^dagger| = {defect:.3e} exceeds "
            f"the tolerance of {tolerance:.3e}."
        )

        self.defect = defect
        self.tolerance = tolerance


class AmbiguousMatchingError(AdiabaticException):
    """An exception raised when the eigenvectors of two neighbouring frames cannot
    be matched unambiguously, typically because the step is too large close to a
    (complex) crossing point."""

    def __init__(
        self, labels: Sequence[int], overlaps: Sequence[float], point: complex
    ):
        rounded = tuple(round(overlap, 8) for overlap in overlaps)

        super().__init__(
            f"The eigenvectors at z={point:.6g} could not be matched unambiguously: "
            f"labels {tuple(labels)} have overlaps {rounded}. Reduce the "
            f"continuation step."
        )

        self.labels = tuple(labels)
        self.overlaps = tuple(overlaps)
        self.point = point


class ContinuationRefinementError(AdiabaticException):
    """An exception raised when the continuation step had to be halved more times
    than allowed without the eigenvectors becoming matchable."""

    def __init__(self, start: complex, target: complex, n_halvings: int):
        super().__init__(
            f"Continuing the eigensystem from z={start:.6g} to z={target:.6g} still "
            f"failed after {n_halvings} step halvings. The path likely passes through "
            f"a crossing point."
        )

        self.start = start
        self.target = target
        self.n_halvings = n_halvings


class RichardsonConsistencyError(AdiabaticException):
    """An exception raised when the two central difference estimates of a projector
    derivative disagree, which signals a near degeneracy."""

    def __init__(self, t: float, error: float, tolerance: float):
        super().__init__(
            f"The central difference estimates of dP/dt at t={t:.6g} differ by "
            f"{error:.3e} which exceeds the tolerance of {tolerance:.3e}. The spectral "
            f"gap is likely too small at this time."
        )

        self.t = t
        self.error = error
        self.tolerance = tolerance
