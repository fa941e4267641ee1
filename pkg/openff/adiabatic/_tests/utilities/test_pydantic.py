import numpy
import pytest

from openff.adiabatic._pydantic import BaseModel, ValidationError
from openff.adiabatic.utilities.pydantic import Array, ComplexNumber


class _Record(BaseModel):
    value: ComplexNumber
    values: Array[complex] = numpy.zeros(1)


@pytest.mark.parametrize(
    "value, expected",
    [
        (0.5, 0.5 + 0.0j),
        (2, 2.0 + 0.0j),
        (0.25j, 0.25j),
        ([0.0, 0.5], 0.5j),
        ((1.0, -2.0), 1.0 - 2.0j),
        ("0.5j", 0.5j),
        ("1 + 2j", 1.0 + 2.0j),
    ],
)
def test_complex_number(value, expected):
    assert _Record(value=value).value == expected


@pytest.mark.parametrize("value", [[1.0, 2.0, 3.0], {"real": 1.0}])
def test_complex_number_invalid(value):
    with pytest.raises(ValidationError):
        _Record(value=value)


def test_array_dtype():
    record = _Record(value=0.0, values=[1.0, 2.0])

    assert isinstance(record.values, numpy.ndarray)
    assert record.values.dtype == complex
