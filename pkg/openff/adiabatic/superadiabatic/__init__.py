"""Superadiabatic renormalization of a Hamiltonian, transitions measured in the
superadiabatic bases and the reduction to effective two level problems"""

from openff.adiabatic.superadiabatic._superadiabatic import (
    EffectiveHamiltonian,
    OptimalTruncation,
    SampledHamiltonian,
    SuperadiabaticLevel,
    SuperadiabaticSettings,
    build_level,
    effective_transition,
    level_sequence,
    optimal_truncation,
    reduce_to_effective,
    superadiabatic_deviation,
    superadiabatic_transition,
    transition_history,
    uniform_grid,
    verify_intertwining,
)

__all__ = [
    "EffectiveHamiltonian",
    "OptimalTruncation",
    "SampledHamiltonian",
    "SuperadiabaticLevel",
    "SuperadiabaticSettings",
    "build_level",
    "effective_transition",
    "level_sequence",
    "optimal_truncation",
    "reduce_to_effective",
    "superadiabatic_deviation",
    "superadiabatic_transition",
    "transition_history",
    "uniform_grid",
    "verify_intertwining",
]
