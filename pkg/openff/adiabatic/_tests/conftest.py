import numpy
import pytest

from openff.adiabatic.models import (
    ConstantModel,
    LandauZenerModel,
    TanhSweepModel,
    constant,
    landau_zener,
    tanh_sweep,
)


@pytest.fixture(scope="module")
def lz_model() -> LandauZenerModel:
    return landau_zener(1.0, 0.5)


@pytest.fixture(scope="module")
def tanh_model() -> TanhSweepModel:
    return tanh_sweep(0.3)


@pytest.fixture(scope="module")
def constant_model() -> ConstantModel:
    return constant(numpy.diag([-1.0, 1.0]))
