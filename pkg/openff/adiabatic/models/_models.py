import abc
import logging
from typing import (
    TYPE_CHECKING,
    Collection,
    Dict,
    Literal,
    Optional,
    Tuple,
    Type,
    Union,
)

import numpy

from openff.adiabatic._pydantic import (
    BaseModel,
    Extra,
    Field,
    root_validator,
    validator,
)
from openff.adiabatic.models.exceptions import ModelDomainError, NotScatteringSafeError
from openff.adiabatic.utilities.linalg import hermiticity_defect, operator_norm
from openff.adiabatic.utilities.pydantic import Array

if TYPE_CHECKING:
    NonNegativeFloat = float
    PositiveFloat = float
else:
    from openff.adiabatic._pydantic import NonNegativeFloat, PositiveFloat

_logger = logging.getLogger(__name__)

# The fraction of the distance to the nearest pole of tanh / sech that is used
# as the strip of analyticity of the bounded families.
_STRIP_FRACTION = 0.75


def _bloch_matrix(x, y, z) -> numpy.ndarray:
    """Returns ``x sigma_x + y sigma_y + z sigma_z`` broadcast over the shape of
    the inputs, i.e. with shape=(..., 2, 2)."""

    x, y, z = numpy.broadcast_arrays(
        *(numpy.asarray(value, dtype=complex) for value in (x, y, z))
    )

    return numpy.stack(
        [numpy.stack([z, x - 1.0j * y], -1), numpy.stack([x + 1.0j * y, -z], -1)],
        -2,
    )


def _sech(z: numpy.ndarray) -> numpy.ndarray:
    return 1.0 / numpy.cosh(z)


class HamiltonianModel(BaseModel, abc.ABC):
    """The base for analytic families ``z -> H(z)`` which are hermitian on the
    real axis and analytic in the strip ``|Im z| < strip_halfwidth``."""

    class Config:
        allow_mutation = False
        extra = Extra.forbid
        json_encoders = {numpy.ndarray: lambda array: array.tolist()}

    @property
    @abc.abstractmethod
    def dimension(self) -> int:
        """The number of levels ``n``."""

    @property
    @abc.abstractmethod
    def strip_halfwidth(self) -> float:
        """The half-width of the strip around the real axis in which the family
        is analytic."""

    @property
    def decay_exponent(self) -> float:
        """The exponent ``alpha`` of the ``(1 + |t|)^-(1 + alpha)`` approach of
        ``H(t)`` to its limits."""
        return 1.0

    @property
    def limits(self) -> Optional[Tuple[numpy.ndarray, numpy.ndarray]]:
        """The limits ``H(-inf)`` and ``H(+inf)`` if they exist."""
        return None

    @property
    def scattering_safe(self) -> bool:
        """Whether the family approaches constant limits so that scattering
        quantities may be computed on a truncated interval."""
        return self.limits is not None

    @property
    def params(self) -> Dict[str, object]:
        """The named parameters of the family."""
        return self.dict(exclude={"type"})

    @abc.abstractmethod
    def _evaluate(self, z: numpy.ndarray) -> numpy.ndarray:
        """Evaluates the family at an array of complex times, returning an array
        with shape=``z.shape + (n, n)``."""

    def evaluate(self, z) -> numpy.ndarray:
        """Evaluates ``H(z)`` at a single complex time or at an array of times.

        Parameters
        ----------
        z
            The (complex) time(s) to evaluate the Hamiltonian at.

        Returns
        -------
            The Hamiltonian matrices with shape=``numpy.shape(z) + (n, n)``.
        """

        z = numpy.asarray(z, dtype=complex)

        if z.size > 0:
            largest_imaginary = float(numpy.max(numpy.abs(z.imag)))

            if largest_imaginary >= self.strip_halfwidth:
                raise ModelDomainError(
                    self.type, largest_imaginary, self.strip_halfwidth
                )

        return self._evaluate(z)


class LandauZenerModel(HamiltonianModel):
    """The linear avoided crossing ``H(z) = 1/2 [[a z, delta], [delta, -a z]]``."""

    type: Literal["landau-zener"] = "landau-zener"

    a: PositiveFloat = Field(1.0, description="The sweep rate of the diabatic levels.")
    delta: PositiveFloat = Field(
        0.5, description="The gap between the adiabatic levels at t = 0."
    )

    @property
    def dimension(self) -> int:
        return 2

    @property
    def strip_halfwidth(self) -> float:
        # The family is entire, the strip only needs to contain the crossing
        # points +/- i delta / a together with the loops around them.
        return 2.0 * self.delta / self.a

    def _evaluate(self, z: numpy.ndarray) -> numpy.ndarray:
        return _bloch_matrix(0.5 * self.delta, 0.0, 0.5 * self.a * z)


class TanhSweepModel(HamiltonianModel):
    """The bounded avoided crossing ``H(z) = 1/2 [[tanh z, delta], [delta, -tanh z]]``
    which approaches ``1/2 (+/- sigma_z + delta sigma_x)`` exponentially fast."""

    type: Literal["tanh-sweep"] = "tanh-sweep"

    delta: PositiveFloat = Field(
        0.3, description="The gap between the adiabatic levels at t = 0."
    )

    @property
    def dimension(self) -> int:
        return 2

    @property
    def strip_halfwidth(self) -> float:
        return _STRIP_FRACTION * numpy.pi / 2.0

    @property
    def limits(self) -> Tuple[numpy.ndarray, numpy.ndarray]:
        return (
            _bloch_matrix(0.5 * self.delta, 0.0, -0.5),
            _bloch_matrix(0.5 * self.delta, 0.0, 0.5),
        )

    def _evaluate(self, z: numpy.ndarray) -> numpy.ndarray:
        return _bloch_matrix(0.5 * self.delta, 0.0, 0.5 * numpy.tanh(z))


class ComplexHermitianModel(HamiltonianModel):
    """A twisting two level family
    ``H(z) = 1/2 (tanh(a z) sigma_z + delta sigma_x + b sech(a z) sigma_y)``
    which is hermitian but not real symmetric on the real axis when ``b != 0``."""

    type: Literal["complex-hermitian"] = "complex-hermitian"

    a: PositiveFloat = Field(1.0, description="The rate of the tanh sweep.")
    delta: PositiveFloat = Field(0.3, description="The constant sigma_x coupling.")
    b: float = Field(0.2, description="The amplitude of the sech sigma_y twist.")

    @validator("b")
    def _validate_b(cls, value):
        if abs(value) >= 1.0:
            raise ValueError("|b| must be less than 1 for the family to have a gap")

        return value

    @property
    def dimension(self) -> int:
        return 2

    @property
    def strip_halfwidth(self) -> float:
        return _STRIP_FRACTION * numpy.pi / (2.0 * self.a)

    @property
    def limits(self) -> Tuple[numpy.ndarray, numpy.ndarray]:
        return (
            _bloch_matrix(0.5 * self.delta, 0.0, -0.5),
            _bloch_matrix(0.5 * self.delta, 0.0, 0.5),
        )

    def _evaluate(self, z: numpy.ndarray) -> numpy.ndarray:
        return _bloch_matrix(
            0.5 * self.delta,
            0.5 * self.b * _sech(self.a * z),
            0.5 * numpy.tanh(self.a * z),
        )


class _CascadeLevels(BaseModel):
    """The diabatic level structure shared by the three level cascade and its
    isolated two level surrogates."""

    class Config:
        allow_mutation = False
        extra = Extra.forbid

    delta: NonNegativeFloat = Field(
        0.1, description="The constant coupling which lifts the real crossings."
    )

    t0: float = Field(-1.0, description="The time at which e1 and e2 cross at δ = 0.")
    t1: float = Field(1.0, description="The time at which e1 and e3 cross at δ = 0.")

    amplitude: PositiveFloat = Field(
        2.0, description="The half-range of the sweeping diabatic level."
    )
    rate: PositiveFloat = Field(1.0, description="The rate of the tanh sweep.")

    @root_validator(skip_on_failure=True)
    def _validate_crossing_times(cls, values):
        if values["t0"] >= values["t1"]:
            raise ValueError(
                f"t0={values['t0']} must be strictly less than t1={values['t1']}"
            )

        return values

    @property
    def _midpoint(self) -> float:
        return 0.5 * (self.t0 + self.t1)

    def _sweeping_level(self, z):
        return self.amplitude * numpy.tanh(self.rate * (z - self._midpoint))

    @property
    def _static_levels(self) -> Tuple[float, float]:
        return (
            float(self._sweeping_level(self.t0).real),
            float(self._sweeping_level(self.t1).real),
        )

    @property
    def strip_halfwidth(self) -> float:
        return _STRIP_FRACTION * numpy.pi / (2.0 * self.rate)


class ThreeLevelCascadeModel(_CascadeLevels, HamiltonianModel):
    """A three level family with one sweeping diabatic level ``d1(z) =
    A tanh(k (z - m))`` which crosses the static levels ``d2 = d1(t0)`` and
    ``d3 = d1(t1)`` in turn. A constant coupling ``delta`` between the sweeping
    level and each static level turns both crossings into avoided crossings."""

    type: Literal["three-level-cascade"] = "three-level-cascade"

    @property
    def dimension(self) -> int:
        return 3

    @property
    def limits(self) -> Tuple[numpy.ndarray, numpy.ndarray]:
        return (self._matrix(-self.amplitude), self._matrix(self.amplitude))

    def _matrix(self, sweeping_level) -> numpy.ndarray:
        sweeping_level = numpy.asarray(sweeping_level, dtype=complex)
        level_2, level_3 = self._static_levels

        matrix = numpy.zeros(sweeping_level.shape + (3, 3), dtype=complex)
        matrix[..., 0, 0] = sweeping_level
        matrix[..., 1, 1] = level_2
        matrix[..., 2, 2] = level_3
        matrix[..., 0, 1] = matrix[..., 1, 0] = self.delta
        matrix[..., 0, 2] = matrix[..., 2, 0] = self.delta

        return matrix

    def _evaluate(self, z: numpy.ndarray) -> numpy.ndarray:
        return self._matrix(self._sweeping_level(z))


class CascadeSurrogateModel(_CascadeLevels, HamiltonianModel):
    """The isolated two level avoided crossing of a three level cascade, i.e. the
    sweeping level coupled to only one of the static levels."""

    type: Literal["cascade-surrogate"] = "cascade-surrogate"

    crossing: Literal[0, 1] = Field(
        0,
        description="Which avoided crossing to isolate: 0 couples the sweeping level "
        "to d2 (near t0), 1 couples it to d3 (near t1).",
    )

    @property
    def dimension(self) -> int:
        return 2

    @property
    def limits(self) -> Tuple[numpy.ndarray, numpy.ndarray]:
        return (self._matrix(-self.amplitude), self._matrix(self.amplitude))

    def _matrix(self, sweeping_level) -> numpy.ndarray:
        static_level = self._static_levels[self.crossing]

        sweeping_level = numpy.asarray(sweeping_level, dtype=complex)
        mean = 0.5 * (sweeping_level + static_level)

        matrix = _bloch_matrix(self.delta, 0.0, 0.5 * (sweeping_level - static_level))
        return matrix + mean[..., None, None] * numpy.eye(2)

    def _evaluate(self, z: numpy.ndarray) -> numpy.ndarray:
        return self._matrix(self._sweeping_level(z))


class CoupledPairModel(HamiltonianModel):
    """A tanh sweep avoided crossing embedded in three levels: the upper left
    block is ``tanh_sweep(delta)`` and both of its states couple to a third level
    at ``offset`` through ``coupling * sech(z) / 2`` entries."""

    type: Literal["coupled-pair"] = "coupled-pair"

    delta: PositiveFloat = Field(0.3, description="The gap of the embedded pair.")
    coupling: NonNegativeFloat = Field(
        0.1, description="The strength of the coupling to the third level."
    )
    offset: PositiveFloat = Field(
        2.0, description="The energy of the isolated third level."
    )

    @property
    def dimension(self) -> int:
        return 3

    @property
    def strip_halfwidth(self) -> float:
        return _STRIP_FRACTION * numpy.pi / 2.0

    @property
    def limits(self) -> Tuple[numpy.ndarray, numpy.ndarray]:
        return (
            self._matrix(numpy.asarray(-1.0), numpy.asarray(0.0)),
            self._matrix(numpy.asarray(1.0), numpy.asarray(0.0)),
        )

    def _matrix(self, sweep: numpy.ndarray, envelope: numpy.ndarray) -> numpy.ndarray:
        sweep = numpy.asarray(sweep, dtype=complex)
        envelope = numpy.asarray(envelope, dtype=complex)

        matrix = numpy.zeros(sweep.shape + (3, 3), dtype=complex)
        matrix[..., :2, :2] = _bloch_matrix(0.5 * self.delta, 0.0, 0.5 * sweep)
        matrix[..., 2, 2] = self.offset

        for index in range(2):
            matrix[..., index, 2] = matrix[..., 2, index] = (
                0.5 * self.coupling * envelope
            )

        return matrix

    def _evaluate(self, z: numpy.ndarray) -> numpy.ndarray:
        return self._matrix(numpy.tanh(z), _sech(z))


class ConstantModel(HamiltonianModel):
    """A time independent Hamiltonian ``H(z) = H0``."""

    type: Literal["constant"] = "constant"

    real: Array[float] = Field(
        ..., description="The real part of H0, a symmetric matrix."
    )
    imag: Optional[Array[float]] = Field(
        None, description="The imaginary part of H0, an antisymmetric matrix."
    )

    @validator("real", "imag")
    def _validate_square(cls, value):
        if value is None:
            return value

        if value.ndim != 2 or value.shape[0] != value.shape[1]:
            raise ValueError(f"H0 must be a square matrix, not shape={value.shape}")

        return value

    @root_validator(skip_on_failure=True)
    def _validate_hermitian(cls, values):
        matrix = numpy.asarray(values["real"], dtype=complex)

        if values.get("imag") is not None:
            if values["imag"].shape != matrix.shape:
                raise ValueError("the real and imaginary parts of H0 differ in shape")

            matrix = matrix + 1.0j * values["imag"]

        defect = hermiticity_defect(matrix)

        if defect > 1.0e-12:
            raise ValueError(f"H0 must be hermitian, found a defect of {defect:.3e}")

        return values

    @property
    def matrix(self) -> numpy.ndarray:
        matrix = numpy.asarray(self.real, dtype=complex)
        return matrix if self.imag is None else matrix + 1.0j * self.imag

    @property
    def dimension(self) -> int:
        return self.real.shape[0]

    @property
    def strip_halfwidth(self) -> float:
        return 1.0

    @property
    def limits(self) -> Tuple[numpy.ndarray, numpy.ndarray]:
        return self.matrix, self.matrix

    def _evaluate(self, z: numpy.ndarray) -> numpy.ndarray:
        return numpy.broadcast_to(self.matrix, z.shape + self.matrix.shape).copy()


HamiltonianModelType = Union[
    LandauZenerModel,
    TanhSweepModel,
    ComplexHermitianModel,
    ThreeLevelCascadeModel,
    CascadeSurrogateModel,
    CoupledPairModel,
    ConstantModel,
]

MODEL_CATALOG: Dict[str, Type[HamiltonianModel]] = {
    model_class.__fields__["type"].default: model_class
    for model_class in HamiltonianModelType.__args__
}


def landau_zener(a: float, delta: float) -> LandauZenerModel:
    """Returns the linear Landau-Zener family with sweep rate ``a`` and gap
    ``delta``. Its crossing points are ``z = +/- i delta / a``."""
    return LandauZenerModel(a=a, delta=delta)


def tanh_sweep(delta: float) -> TanhSweepModel:
    """Returns the bounded tanh avoided crossing. Its crossing points are
    ``z = +/- i arctan(delta)``."""
    return TanhSweepModel(delta=delta)


def complex_hermitian(a: float, delta: float, b: float) -> ComplexHermitianModel:
    """Returns the twisting complex hermitian family, which reduces to
    ``tanh_sweep(delta)`` when ``a = 1`` and ``b = 0``."""
    return ComplexHermitianModel(a=a, delta=delta, b=b)


def three_level_cascade(delta: float, t0: float, t1: float) -> ThreeLevelCascadeModel:
    """Returns the three level cascade whose level crossings at ``t0`` (levels 1
    and 2) and ``t1`` (levels 1 and 3) are avoided by a coupling ``delta``."""
    return ThreeLevelCascadeModel(delta=delta, t0=t0, t1=t1)


def cascade_surrogate(
    cascade: ThreeLevelCascadeModel, crossing: int
) -> CascadeSurrogateModel:
    """Returns the two level model of one of the avoided crossings of a cascade
    taken in isolation."""
    return CascadeSurrogateModel(
        **cascade.dict(exclude={"type"}), crossing=crossing
    )


def coupled_pair(
    delta: float, coupling: float, offset: float = 2.0
) -> CoupledPairModel:
    """Returns a tanh avoided crossing coupled to an isolated third level."""
    return CoupledPairModel(delta=delta, coupling=coupling, offset=offset)


def constant(matrix) -> ConstantModel:
    """Returns the time independent family ``H(z) = matrix``."""

    matrix = numpy.asarray(matrix, dtype=complex)
    imaginary = matrix.imag if numpy.any(matrix.imag != 0.0) else None

    return ConstantModel(real=matrix.real, imag=imaginary)


def truncation_time(
    model: HamiltonianModel, tol: float, step: float = 1.0, maximum: float = 1000.0
) -> float:
    """Returns the smallest sampled time ``T`` beyond which the model is within
    ``tol`` of its limits, i.e. ``||H(+/-T) - H(+/-inf)|| <= tol``.

    Parameters
    ----------
    model
        The model of interest.
    tol
        The tolerance on the spectral norm distance to the limits.
    step
        The spacing of the sampled truncation times.
    maximum
        The largest truncation time to consider.

    Returns
    -------
        The truncation time ``T``.
    """

    if not model.scattering_safe:
        raise NotScatteringSafeError(model.type)

    lower_limit, upper_limit = model.limits

    times = numpy.arange(0.0, maximum + 0.5 * step, step)

    distance = numpy.maximum(
        operator_norm(model.evaluate(times) - upper_limit),
        operator_norm(model.evaluate(-times) - lower_limit),
    )

    within_tolerance = numpy.flatnonzero(distance <= tol)

    if len(within_tolerance) == 0:
        raise ValueError(
            f"the {model.type} model does not approach its limits to within "
            f"{tol:.3e} for |t| <= {maximum}"
        )

    truncation = float(times[within_tolerance[0]])
    _logger.debug(f"truncating the {model.type} model at T={truncation}")

    return truncation


def minimum_gap(
    model: HamiltonianModel,
    labels: Collection[int] = (1,),
    window: Tuple[float, float] = (-10.0, 10.0),
    n_samples: int = 4001,
) -> Tuple[float, float]:
    """Measures the smallest distance on the real axis between the eigenvalues
    with the given labels (in increasing order) and the rest of the spectrum.

    Parameters
    ----------
    model
        The model of interest.
    labels
        The (one-based) labels of the eigenvalues which make up the first part of
        the spectrum.
    window
        The interval of the real axis to sample.
    n_samples
        The number of uniformly spaced samples.

    Returns
    -------
        The minimum gap and the time at which it is attained.
    """

    times = numpy.linspace(*window, n_samples)
    eigenvalues = numpy.linalg.eigvalsh(model.evaluate(times))

    in_part = numpy.zeros(model.dimension, dtype=bool)
    in_part[[label - 1 for label in labels]] = True

    distances = numpy.abs(
        eigenvalues[:, in_part][:, :, None] - eigenvalues[:, ~in_part][:, None, :]
    ).min(axis=(1, 2))

    index = int(numpy.argmin(distances))
    return float(distances[index]), float(times[index])
