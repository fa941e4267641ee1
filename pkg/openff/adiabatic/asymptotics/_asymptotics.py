import logging
from typing import TYPE_CHECKING, List, Literal, Optional, Sequence, Tuple

import numpy
from scipy.stats import linregress

from openff.adiabatic._pydantic import BaseModel, Field
from openff.adiabatic.asymptotics.exceptions import (
    DecayFitError,
    MonodromyMismatchError,
    MultipleCrossingsError,
)
from openff.adiabatic.complexplane import (
    CrossingPoint,
    DissipativityReport,
    LoopSettings,
    crossing_loop,
    dissipativity_check,
    find_crossing,
    find_crossings,
    geometric_prefactor,
    loop_integral,
    loop_permutation,
    stokes_lines,
)
from openff.adiabatic.complexplane.exceptions import PathOutsideStripError
from openff.adiabatic.spectral import continue_along
from openff.adiabatic.utilities.pydantic import Array, ComplexNumber

if TYPE_CHECKING:
    from openff.adiabatic.models import HamiltonianModel, ThreeLevelCascadeModel

_logger = logging.getLogger(__name__)

# The number of times the integrator error floor a probability must exceed to be
# included in a decay fit.
_FLOOR_FACTOR = 100.0


class DecayFit(BaseModel):
    """A least squares fit of ``ln P = ln C - 2 gamma / epsilon``."""

    class Config:
        allow_mutation = False

    gamma_fit: float = Field(..., description="The fitted decay rate gamma.")
    prefactor_fit: float = Field(..., description="The fitted prefactor C.")
    r_squared: float = Field(..., description="The coefficient of determination.")

    epsilons: Array[float] = Field(..., description="The epsilons which were fit.")
    residuals: Array[float] = Field(
        ..., description="The residuals of ln P about the fitted line."
    )


class CrossingContribution(BaseModel):
    """The factor a single crossing point contributes to an asymptotic estimate."""

    class Config:
        allow_mutation = False

    crossing: CrossingPoint = Field(..., description="The crossing point.")
    start_label: int = Field(
        ..., description="The label of the branch integrated around the loop."
    )

    loop_integral: ComplexNumber = Field(
        ..., description="The contour integral of the branch around the loop."
    )
    theta: ComplexNumber = Field(..., description="The geometric angle theta.")

    @property
    def exponent_per_eps(self) -> float:
        return 2.0 * self.loop_integral.imag

    @property
    def log_prefactor(self) -> float:
        return 2.0 * self.theta.imag


class AsymptoticEstimate(BaseModel):
    """An asymptotic estimate ``exp(log_prefactor + exponent_per_eps / epsilon)`` of
    a transition probability."""

    class Config:
        allow_mutation = False

    value: float = Field(..., description="The predicted transition probability.")
    epsilon: float = Field(..., description="The adiabatic parameter.")

    exponent_per_eps: float = Field(
        ..., description="The sum of 2 Im of the loop integrals."
    )
    log_prefactor: float = Field(
        ..., description="The sum of 2 Im of the geometric angles."
    )

    components: List[CrossingContribution] = Field(
        ..., description="The contribution of each crossing point."
    )

    regime: Literal["asymptotic", "exponential-bound"] = Field(
        "asymptotic",
        description="Whether a dissipative path was found, so that the estimate is "
        "asymptotic, or only an exponential bound is expected to hold.",
    )
    dissipativity: Optional[List[DissipativityReport]] = Field(
        None, description="The dissipativity reports of the Stokes lines."
    )


def lz_exponent(a: float, delta: float) -> float:
    """Returns the Landau-Zener exponent ``2 Im int e_1 dz = -pi delta^2 / (2 a)``."""

    if a <= 0.0:
        raise ValueError("the sweep rate a must be positive")

    return -numpy.pi * delta**2 / (2.0 * a)


def relative_deviation(numeric: float, estimate: float) -> float:
    """Returns ``|numeric - estimate| / numeric``."""
    return abs(numeric - estimate) / numeric


def fit_decay_rate(
    samples: Sequence[Tuple[float, float]], error_floor: Optional[float] = None
) -> DecayFit:
    """Fits ``ln P = ln C - 2 gamma / epsilon`` by unweighted least squares.

    Parameters
    ----------
    samples
        The (epsilon, P) pairs to fit.
    error_floor
        The error floor of the integrator. Probabilities below 100 times this value
        are excluded from the fit.

    Returns
    -------
        The fitted decay rate and prefactor.
    """

    samples = sorted(samples, key=lambda sample: -sample[0])

    epsilons = numpy.array([epsilon for epsilon, _ in samples], dtype=float)
    probabilities = numpy.array([probability for _, probability in samples])

    if numpy.any(probabilities <= 0.0):
        raise DecayFitError(
            "All of the transition probabilities must be positive - increase the "
            "accuracy of the integrator."
        )

    if error_floor is not None:
        included = probabilities >= _FLOOR_FACTOR * error_floor

        if not numpy.all(included):
            _logger.info(
                f"excluding epsilon={epsilons[~included].tolist()} which fall below "
                f"the integrator error floor"
            )

        epsilons, probabilities = epsilons[included], probabilities[included]

    if len(epsilons) < 4:
        raise DecayFitError(
            f"At least four samples are required to fit a decay rate, found "
            f"{len(epsilons)}."
        )

    inverse_epsilons = 1.0 / epsilons
    log_probabilities = numpy.log(probabilities)

    fit = linregress(inverse_epsilons, log_probabilities)

    residuals = log_probabilities - (fit.intercept + fit.slope * inverse_epsilons)

    return DecayFit(
        gamma_fit=-0.5 * fit.slope,
        prefactor_fit=numpy.exp(fit.intercept),
        r_squared=min(1.0, max(0.0, fit.rvalue**2)),
        epsilons=epsilons,
        residuals=residuals,
    )


def _crossing_contribution(
    model: "HamiltonianModel",
    crossing: CrossingPoint,
    start_label: int,
    settings: LoopSettings,
) -> CrossingContribution:
    loop = crossing_loop(model, crossing, settings)

    integral = loop_integral(model, loop, start_label, settings=settings)
    theta = geometric_prefactor(model, loop, start_label, settings)

    _logger.info(
        f"crossing at z={crossing.location:.8g}: loop integral of "
        f"e_{start_label}={integral.value:.8g}, theta={theta:.8g}"
    )

    return CrossingContribution(
        crossing=crossing,
        start_label=start_label,
        loop_integral=integral.value,
        theta=theta,
    )


def _combine(
    components: List[CrossingContribution],
    epsilon: float,
    regime: str = "asymptotic",
    dissipativity: Optional[List[DissipativityReport]] = None,
) -> AsymptoticEstimate:
    exponent_per_eps = sum(component.exponent_per_eps for component in components)
    log_prefactor = sum(component.log_prefactor for component in components)

    value = float(numpy.exp(log_prefactor + exponent_per_eps / epsilon))

    if not 0.0 <= value <= 1.0:
        _logger.warning(
            f"the asymptotic estimate {value:.6g} at epsilon={epsilon} lies outside "
            f"of [0, 1] - epsilon is likely too large for the estimate to be valid"
        )

    return AsymptoticEstimate(
        value=value,
        epsilon=epsilon,
        exponent_per_eps=exponent_per_eps,
        log_prefactor=log_prefactor,
        components=components,
        regime=regime,
        dissipativity=dissipativity,
    )


def stokes_dissipativity(
    model: "HamiltonianModel", crossing: CrossingPoint, reach: float
) -> Tuple[bool, List[DissipativityReport]]:
    """Checks the dissipativity of the Stokes lines which leave a crossing to the
    left and right, and that both lines reach ``reach`` from the crossing without
    leaving the strip."""

    try:
        lines = stokes_lines(model, crossing, reach)
    except PathOutsideStripError as error:
        _logger.warning(f"a Stokes line leaves the strip: {error}")
        return False, []

    reports = []

    for line in lines:
        start = complex(line.samples[0])
        frame = continue_along(model, [start.real, start])[-1]
        reports.append(dissipativity_check(model, line, crossing.pair, frame))

    reached = (
        lines[0].samples[0].real <= crossing.location.real - reach
        and lines[1].samples[-1].real >= crossing.location.real + reach
    )

    return reached and all(report.dissipative for report in reports), reports


def theorem1_estimate(
    model: "HamiltonianModel",
    epsilon: float,
    pair: Tuple[int, int] = (1, 2),
    settings: Optional[LoopSettings] = None,
    reach: float = 5.0,
) -> AsymptoticEstimate:
    """Estimates the transition probability across a single avoided crossing of a
    two level model as

        P(epsilon) = exp(2 Im theta) exp(2 Im int_loop e_1 dz / epsilon)

    where the loop is based on the real axis and encircles the unique crossing
    point in the upper strip.

    The dissipativity of the Stokes lines leaving the crossing is reported. If
    they are not dissipative (or leave the strip) the estimate is still returned
    but flagged as being in the exponential bound regime.

    Parameters
    ----------
    model
        The two level model of interest.
    epsilon
        The adiabatic parameter.
    pair
        The labels of the crossing eigenvalues.
    settings
        The loop refinement settings.
    reach
        How far the Stokes lines are traced to either side of the crossing.

    Returns
    -------
        The estimate.
    """

    settings = LoopSettings() if settings is None else settings

    crossings = find_crossings(model, pair)

    if len(crossings) != 1:
        raise MultipleCrossingsError(
            pair, [crossing.location for crossing in crossings]
        )

    crossing = crossings[0]
    component = _crossing_contribution(model, crossing, pair[0], settings)

    dissipative, reports = stokes_dissipativity(model, crossing, reach)
    regime = "asymptotic" if dissipative else "exponential-bound"

    if not dissipative:
        _logger.warning(
            f"no dissipative path was found through z={crossing.location:.6g}, the "
            f"estimate is reported in the exponential bound regime"
        )

    return _combine([component], epsilon, regime, reports)


def _expect_permutation(
    model: "HamiltonianModel",
    crossing: CrossingPoint,
    settings: LoopSettings,
    loop_name: str,
):
    j, k = crossing.pair

    expected = list(range(1, model.dimension + 1))
    expected[j - 1], expected[k - 1] = k, j

    found = loop_permutation(model, crossing_loop(model, crossing, settings), settings)

    if tuple(found) != tuple(expected):
        raise MonodromyMismatchError(loop_name, expected, found)


def theorem1prime_estimate(
    model: "ThreeLevelCascadeModel",
    epsilon: float,
    delta: Optional[float] = None,
    settings: Optional[LoopSettings] = None,
) -> AsymptoticEstimate:
    """Estimates the transition probability ``P_31`` of a three level cascade as the
    product of the factors of its two avoided crossings: branch 1 integrated around
    a loop enclosing the crossing ``z0`` of ``e_1`` and ``e_2`` near ``t0``, and
    branch 2 integrated around a loop enclosing the crossing ``z1`` of ``e_2`` and
    ``e_3`` near ``t1``.

    Each loop must exchange only its own pair of eigenvalues, leaving the third
    eigenvalue analytic inside it.

    Parameters
    ----------
    model
        The three level cascade.
    epsilon
        The adiabatic parameter.
    delta
        The coupling to use in place of the one of ``model``.
    settings
        The loop refinement settings.

    Returns
    -------
        The estimate with one component per crossing.
    """

    settings = LoopSettings() if settings is None else settings

    if delta is not None:
        model = type(model)(**{**model.dict(), "delta": delta})

    seed_height = 0.25 * model.strip_halfwidth

    crossings = [
        find_crossing(model, (1, 2), complex(model.t0, seed_height)),
        find_crossing(model, (2, 3), complex(model.t1, seed_height)),
    ]

    for name, crossing in zip(("the loop around z0", "the loop around z1"), crossings):
        _expect_permutation(model, crossing, settings, name)

    components = [
        _crossing_contribution(model, crossing, crossing.pair[0], settings)
        for crossing in crossings
    ]

    return _combine(components, epsilon)
