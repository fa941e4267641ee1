"""Integration of the rescaled time-dependent Schrödinger equation and of the
adiabatic evolution"""

from openff.adiabatic.propagator._propagator import (
    AdiabaticGenerator,
    CoefficientTrace,
    ConvergenceSettings,
    PropagationResult,
    PropagatorSettings,
    TransitionResult,
    adiabatic_propagate,
    coefficients,
    evolution_history,
    propagate,
    propagate_generator,
    transition_probability,
)

__all__ = [
    "AdiabaticGenerator",
    "CoefficientTrace",
    "ConvergenceSettings",
    "PropagationResult",
    "PropagatorSettings",
    "TransitionResult",
    "adiabatic_propagate",
    "coefficients",
    "evolution_history",
    "propagate",
    "propagate_generator",
    "transition_probability",
]
