"""Crossing points, loop integrals, geometric prefactors and dissipative paths in
the complex time plane"""

from openff.adiabatic.complexplane._complexplane import (
    ContourPath,
    CrossingPoint,
    DissipativityReport,
    LoopIntegral,
    LoopSettings,
    crossing_loop,
    dissipativity_check,
    find_crossing,
    find_crossings,
    geometric_prefactor,
    level_line,
    loop_integral,
    loop_permutation,
    reflect_loop,
    stokes_lines,
)

__all__ = [
    "ContourPath",
    "CrossingPoint",
    "DissipativityReport",
    "LoopIntegral",
    "LoopSettings",
    "crossing_loop",
    "dissipativity_check",
    "find_crossing",
    "find_crossings",
    "geometric_prefactor",
    "level_line",
    "loop_integral",
    "loop_permutation",
    "reflect_loop",
    "stokes_lines",
]
