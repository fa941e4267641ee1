"""The validated configuration of an experiment run from the command line."""
import sys
from typing import TYPE_CHECKING, Any, Dict, List, Literal, Optional, Tuple

import numpy

from openff.adiabatic._pydantic import (
    BaseModel,
    Extra,
    Field,
    ValidationError,
    conint,
    validator,
)
from openff.adiabatic.cli.exceptions import ConfigValidationError
from openff.adiabatic.complexplane import LoopSettings
from openff.adiabatic.models import MODEL_CATALOG, HamiltonianModelType
from openff.adiabatic.propagator import ConvergenceSettings, PropagatorSettings
from openff.adiabatic.superadiabatic import SuperadiabaticSettings
from openff.adiabatic.utilities.pydantic import ComplexNumber

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

if TYPE_CHECKING:
    PositiveFloat = float
    PositiveInt = int
else:
    from openff.adiabatic._pydantic import PositiveFloat, PositiveInt

Operation = Literal[
    "simulate",
    "sweep",
    "crossing",
    "loop-integral",
    "prefactor",
    "dissipativity",
    "superadiabatic",
    "compare",
]


def _encode(value: Any) -> Any:
    if isinstance(value, numpy.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return [value.real, value.imag]

    raise TypeError(f"{value!r} is not JSON serializable")


def _format_errors(error: ValidationError) -> List[str]:
    return [
        f"{'.'.join(str(location) for location in entry['loc'])}: {entry['msg']}"
        for entry in error.errors()
    ]


class ExperimentConfig(BaseModel):
    """The full description of an experiment: the model, the epsilons to evaluate
    it at, and the settings of each numerical stage."""

    class Config:
        extra = Extra.forbid
        json_encoders = {numpy.ndarray: _encode, complex: _encode}

    model: HamiltonianModelType = Field(
        ...,
        description="The model family and its parameters, selected by its ``type`` "
        "from the catalog.",
    )
    operation: Optional[Operation] = Field(
        None, description="The operation the configuration is intended for."
    )

    epsilon: Optional[PositiveFloat] = Field(
        None, description="The adiabatic parameter of a single simulation."
    )
    epsilons: Optional[List[PositiveFloat]] = Field(
        None, description="A strictly monotone grid of adiabatic parameters."
    )

    from_label: PositiveInt = Field(
        1, description="The label of the initially occupied level."
    )
    to_label: PositiveInt = Field(
        2, description="The label of the level transitions are measured into."
    )
    pair: Tuple[PositiveInt, PositiveInt] = Field(
        (1, 2), description="The labels of the eigenvalues which cross."
    )

    window: Optional[Tuple[float, float]] = Field(
        None,
        description="A finite time window (t0, t1) to use in place of the "
        "scattering limit.",
    )
    n_times: PositiveInt = Field(
        101, description="The number of times a simulated trace is reported at."
    )

    seed: Optional[ComplexNumber] = Field(
        None,
        description="A starting point for the crossing point search. If omitted "
        "the upper strip is searched.",
    )
    q: Optional[conint(ge=0)] = Field(
        None,
        description="A fixed superadiabatic order. If omitted the optimal order is "
        "used.",
    )
    reach: PositiveFloat = Field(
        5.0,
        description="How far the Stokes lines are traced to either side of a "
        "crossing when checking dissipativity.",
    )

    propagator: PropagatorSettings = Field(
        PropagatorSettings(), description="The settings of the integrator."
    )
    convergence: ConvergenceSettings = Field(
        ConvergenceSettings(),
        description="The settings of the convergence-in-T mode of models which are "
        "not scattering safe.",
    )
    loop: LoopSettings = Field(
        LoopSettings(), description="The settings of the loop quadratures."
    )
    superadiabatic: SuperadiabaticSettings = Field(
        SuperadiabaticSettings(),
        description="The settings of the superadiabatic iteration.",
    )

    @validator("model", pre=True)
    def _validate_model(cls, value):
        if not isinstance(value, dict):
            return value

        name = value.get("type")

        if name not in MODEL_CATALOG:
            raise ValueError(
                f"unknown model {name!r}, the catalog contains "
                f"{', '.join(sorted(MODEL_CATALOG))}"
            )

        try:
            return MODEL_CATALOG[name](**value)
        except ValidationError as error:
            raise ValueError("; ".join(_format_errors(error)))

    @validator("epsilons")
    def _validate_epsilons(cls, value):
        if value is None:
            return value

        if len(value) == 0:
            raise ValueError("the epsilon grid must not be empty")

        differences = numpy.diff(value)

        if not (numpy.all(differences > 0.0) or numpy.all(differences < 0.0)):
            raise ValueError("the epsilon grid must be strictly monotone")

        return value

    @validator("window")
    def _validate_window(cls, value):
        if value is not None and value[1] <= value[0]:
            raise ValueError("the window must be increasing")

        return value

    @property
    def epsilon_grid(self) -> List[float]:
        """The epsilons to evaluate at, i.e. ``epsilons`` or else ``[epsilon]``."""

        if self.epsilons is not None:
            return list(self.epsilons)
        if self.epsilon is not None:
            return [self.epsilon]

        raise ConfigValidationError(["epsilon: an epsilon or epsilon grid is required"])


def validate_config(
    text: str, operation: Optional[str] = None, tolerance: Optional[float] = None
) -> ExperimentConfig:
    """Parses and validates the TOML text of an experiment configuration.

    Parameters
    ----------
    text
        The TOML configuration.
    operation
        The operation being run. The configuration may omit it, but must not
        name a different one.
    tolerance
        A local error tolerance which overrides the one in the configuration.

    Raises
    ------
    ConfigValidationError
        Listing every problem with the configuration.
    """

    try:
        data: Dict[str, Any] = tomllib.loads(text)
    except tomllib.TOMLDecodeError as error:
        raise ConfigValidationError([f"the configuration is not valid TOML: {error}"])

    if operation is not None:
        if data.get("operation", operation) != operation:
            raise ConfigValidationError(
                [
                    f"operation: the configuration is for {data['operation']!r} but "
                    f"was run with {operation!r}"
                ]
            )

        data["operation"] = operation

    if tolerance is not None:
        propagator = data.setdefault("propagator", {})

        if isinstance(propagator, dict):
            propagator["tolerance"] = tolerance

    try:
        return ExperimentConfig.parse_obj(data)
    except ValidationError as error:
        raise ConfigValidationError(_format_errors(error))


def load_config(
    path: str, operation: Optional[str] = None, tolerance: Optional[float] = None
) -> ExperimentConfig:
    """Loads and validates an experiment configuration from a TOML file."""

    with open(path) as file:
        return validate_config(file.read(), operation, tolerance)
