"""Exceptions raised when integrating the time-dependent Schrödinger equation"""
from openff.adiabatic.utilities.exceptions import AdiabaticException


class StepLimitExceededError(AdiabaticException):
    """An exception raised when the adaptive integrator needs more steps than the
    configured cap allows."""

    def __init__(self, epsilon: float, tolerance: float, max_steps: int, time: float):
        super().__init__(
            f"The integration with epsilon={epsilon:.6g} and tol={tolerance:.3e} "
            f"exceeded the cap of {max_steps} steps at t={time:.6g}. Epsilon is likely "
            f"too small for direct integration - consider working in a superadiabatic "
            f"frame instead."
        )

        self.epsilon = epsilon
        self.tolerance = tolerance
        self.max_steps = max_steps
        self.time = time


class TruncationConvergenceError(AdiabaticException):
    """An exception raised when a transition probability does not converge as the
    truncation time ``T`` is doubled."""

    def __init__(
        self,
        epsilon: float,
        truncation_time: float,
        relative_change: float,
        n_doublings: int,
    ):
        super().__init__(
            f"The transition probability at epsilon={epsilon:.6g} did not converge "
            f"after {n_doublings} doublings of T (final T={truncation_time:.6g}, last "
            f"relative change={relative_change:.3e})."
        )

        self.epsilon = epsilon
        self.truncation_time = truncation_time
        self.relative_change = relative_change
        self.n_doublings = n_doublings
