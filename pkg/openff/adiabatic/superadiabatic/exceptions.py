"""Exceptions raised when building superadiabatic Hamiltonians"""
from openff.adiabatic.utilities.exceptions import AdiabaticException


class GapClosureError(AdiabaticException):
    """An exception raised when the gap of an intermediate superadiabatic Hamiltonian
    closes, which signals that epsilon is above the threshold where the iteration
    can be carried to the requested order."""

    def __init__(self, q: int, t: float, epsilon: float, gap: float):
        super().__init__(
            f"The spectral gap of H_{q} closes to {gap:.3e} at t={t:.6g} for "
            f"epsilon={epsilon:.6g}. Epsilon exceeds the threshold below which the "
            f"iteration can be carried to order {q}."
        )

        self.q = q
        self.t = t
        self.epsilon = epsilon
        self.gap = gap


class EffectiveRankError(AdiabaticException):
    """An exception raised when a superadiabatic projector does not have the rank
    required by an effective reduction."""

    def __init__(self, rank: int, expected: int, t: float):
        super().__init__(
            f"The superadiabatic projector has rank {rank} at t={t:.6g} while an "
            f"effective reduction requires rank {expected}."
        )

        self.rank = rank
        self.expected = expected
        self.t = t
