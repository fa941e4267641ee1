"""Common utilities and types for when building pydantic models.

Notes
-----
Most of the classes in the module are based off of the discussion here:
https://github.com/samuelcolvin/pydantic/issues/380
"""
from typing import Any

import numpy


class ArrayMeta(type):
    def __getitem__(self, t):
        return type("Array", (Array,), {"__dtype__": t})


class Array(numpy.ndarray, metaclass=ArrayMeta):
    @classmethod
    def __get_validators__(cls):
        yield cls.validate_type

    @classmethod
    def validate_type(cls, val):
        dtype = getattr(cls, "__dtype__", Any)

        if dtype is Any:
            return numpy.array(val)
        else:
            return numpy.array(val, dtype=dtype)


class ComplexNumber(complex):
    """A complex number field which also accepts real numbers, ``[re, im]`` pairs
    and strings such as ``"0.5j"``."""

    @classmethod
    def __get_validators__(cls):
        yield cls.validate_type

    @classmethod
    def validate_type(cls, val) -> complex:
        if isinstance(val, (list, tuple)):
            if len(val) != 2:
                raise ValueError("a complex number must be given as [real, imag]")

            return complex(float(val[0]), float(val[1]))

        if isinstance(val, str):
            return complex(val.replace(" ", ""))

        if isinstance(val, (int, float, complex, numpy.number)):
            return complex(val)

        raise TypeError(f"{val!r} cannot be interpreted as a complex number")
