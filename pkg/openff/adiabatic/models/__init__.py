"""Analytic families of Hamiltonians on a strip of the complex time plane"""

from openff.adiabatic.models._models import (
    MODEL_CATALOG,
    CascadeSurrogateModel,
    ComplexHermitianModel,
    ConstantModel,
    CoupledPairModel,
    HamiltonianModel,
    HamiltonianModelType,
    LandauZenerModel,
    TanhSweepModel,
    ThreeLevelCascadeModel,
    cascade_surrogate,
    complex_hermitian,
    constant,
    coupled_pair,
    landau_zener,
    minimum_gap,
    tanh_sweep,
    three_level_cascade,
    truncation_time,
)

__all__ = [
    "MODEL_CATALOG",
    "CascadeSurrogateModel",
    "ComplexHermitianModel",
    "ConstantModel",
    "CoupledPairModel",
    "HamiltonianModel",
    "HamiltonianModelType",
    "LandauZenerModel",
    "TanhSweepModel",
    "ThreeLevelCascadeModel",
    "cascade_surrogate",
    "complex_hermitian",
    "constant",
    "coupled_pair",
    "landau_zener",
    "minimum_gap",
    "tanh_sweep",
    "three_level_cascade",
    "truncation_time",
]
