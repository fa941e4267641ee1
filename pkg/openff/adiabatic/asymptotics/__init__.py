"""Asymptotic transition probability formulae and decay rate fits"""

from openff.adiabatic.asymptotics._asymptotics import (
    AsymptoticEstimate,
    CrossingContribution,
    DecayFit,
    fit_decay_rate,
    lz_exponent,
    relative_deviation,
    stokes_dissipativity,
    theorem1_estimate,
    theorem1prime_estimate,
)

__all__ = [
    "AsymptoticEstimate",
    "CrossingContribution",
    "DecayFit",
    "fit_decay_rate",
    "lz_exponent",
    "relative_deviation",
    "stokes_dissipativity",
    "theorem1_estimate",
    "theorem1prime_estimate",
]
