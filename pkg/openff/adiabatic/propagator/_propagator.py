import logging
from typing import TYPE_CHECKING, Collection, Optional, Sequence, Tuple

import numpy

from openff.adiabatic._pydantic import BaseModel, Extra, Field
from openff.adiabatic.models import truncation_time
from openff.adiabatic.models.exceptions import NotScatteringSafeError
from openff.adiabatic.propagator.exceptions import (
    StepLimitExceededError,
    TruncationConvergenceError,
)
from openff.adiabatic.spectral import (
    continue_along,
    eigen_frame,
    gauge_transport,
    grid_projectors,
    projector_derivative,
)
from openff.adiabatic.utilities.linalg import (
    commutator,
    hermitian_exponential,
    operator_norm,
    unitarity_defect,
)
from openff.adiabatic.utilities.pydantic import Array

if TYPE_CHECKING:
    from openff.adiabatic.models import HamiltonianModel

    PositiveFloat = float
    PositiveInt = int
else:
    from openff.adiabatic._pydantic import PositiveFloat, PositiveInt

_logger = logging.getLogger(__name__)

# The weights and (Gauss-Legendre) nodes of the fourth order commutator-free
# exponential integrator.
_WEIGHT_1 = (3.0 - 2.0 * numpy.sqrt(3.0)) / 12.0
_WEIGHT_2 = (3.0 + 2.0 * numpy.sqrt(3.0)) / 12.0
_NODES = numpy.array([0.5 - numpy.sqrt(3.0) / 6.0, 0.5 + numpy.sqrt(3.0) / 6.0])

# The local error of a step doubled estimate of a fourth order scheme is
# (big - fine) / (2^4 - 1).
_DOUBLING_DENOMINATOR = 15.0


class PropagatorSettings(BaseModel):
    """The settings which control the adaptive integration of
    ``i epsilon dU/dt = H(t) U``."""

    class Config:
        extra = Extra.forbid

    tolerance: PositiveFloat = Field(
        1.0e-10, description="The target local error per accepted step."
    )
    max_steps: PositiveInt = Field(
        100000000, description="The maximum number of attempted steps."
    )
    phase_resolution: PositiveFloat = Field(
        1.0,
        description="The constant c in the step bound h <= c epsilon which resolves "
        "the 1 / epsilon phase oscillation.",
    )
    initial_step: Optional[PositiveFloat] = Field(
        None,
        description="The first trial step. By default a tenth of the step bound "
        "is used.",
    )
    truncation_tolerance: PositiveFloat = Field(
        1.0e-8,
        description="The tolerance passed to ``truncation_time`` when replacing "
        "t = +/- infinity by +/- T for scattering safe models.",
    )


class ConvergenceSettings(BaseModel):
    """The settings of the convergence-in-T mode used for models without limits
    at t = +/- infinity."""

    class Config:
        extra = Extra.forbid

    initial_time: PositiveFloat = Field(
        8.0, description="The first truncation time T."
    )
    max_doublings: PositiveInt = Field(
        6, description="The maximum number of times T is doubled."
    )
    relative_tolerance: PositiveFloat = Field(
        1.0e-3,
        description="The relative change in the probability between successive "
        "doublings below which it is considered converged.",
    )


class PropagationResult(BaseModel):
    """The evolution operator over an interval together with error diagnostics."""

    class Config:
        allow_mutation = False

    U: Array[complex] = Field(..., description="The (n, n) evolution operator.")
    interval: Tuple[float, float] = Field(
        ..., description="The initial and final times (t0, t1)."
    )
    epsilon: PositiveFloat = Field(..., description="The adiabatic parameter.")

    step_count: int = Field(..., description="The number of accepted steps.")
    error_estimate: float = Field(
        ...,
        description="The global error estimated from a run with doubled steps "
        "on the same grid.",
    )
    unitarity_defect: float = Field(
        ..., description="The value of ||U^dagger U - I||."
    )

    step_times: Array[float] = Field(
        ..., description="The times at the boundaries of the accepted steps."
    )

    intertwining_defect: Optional[float] = Field(
        None,
        description="The value of ||V P(t0) - P(t1) V|| for adiabatic evolutions.",
    )


class CoefficientTrace(BaseModel):
    """The coefficients ``c_j(t)`` of a state expanded in the gauge transported
    adiabatic basis with the dynamical phases factored out."""

    class Config:
        allow_mutation = False

    times: Array[float] = Field(..., description="The times of the grid.")
    coefficients: Array[complex] = Field(
        ..., description="The coefficients with shape=(n_times, n)."
    )
    dynamical_phases: Array[float] = Field(
        ...,
        description="The accumulated integrals of e_j(t') / epsilon from the first "
        "grid time with shape=(n_times, n).",
    )
    labels: Tuple[int, ...] = Field(
        ..., description="The label of each column of the coefficients."
    )


class TransitionResult(BaseModel):
    """A scattering transition probability together with the truncation time it
    was computed on."""

    class Config:
        allow_mutation = False

    probability: float = Field(..., description="The transition probability.")
    truncation_time: float = Field(
        ..., description="The time T used in place of infinity."
    )
    epsilon: PositiveFloat = Field(..., description="The adiabatic parameter.")

    unitarity_defect: float = Field(
        ..., description="The unitarity defect of the final propagation."
    )
    error_estimate: float = Field(
        ..., description="The global error estimate of the final propagation."
    )


class AdiabaticGenerator:
    """The generator ``H(t) + i epsilon [P'(t), P(t)]`` of the adiabatic evolution
    which exactly intertwines the spectral projector ``P``.

    Notes
    -----
    * ``P'`` is computed by Richardson extrapolated central differences using
      ``projector_derivative``.
    """

    def __init__(
        self,
        hamiltonian: "HamiltonianModel",
        labels: Collection[int],
        epsilon: float,
        derivative_step: float = 1.0e-4,
    ):
        self.hamiltonian = hamiltonian
        self.labels = tuple(sorted(labels))
        self.epsilon = epsilon
        self.derivative_step = derivative_step

    @property
    def dimension(self) -> int:
        return self.hamiltonian.dimension

    def evaluate(self, times) -> numpy.ndarray:
        times = numpy.asarray(times, dtype=complex).real

        hamiltonians = self.hamiltonian.evaluate(times)

        projectors = grid_projectors(hamiltonians, self.labels)
        derivatives = projector_derivative(
            self.hamiltonian, times, self.labels, self.derivative_step
        )

        return hamiltonians + 1.0j * self.epsilon * commutator(derivatives, projectors)


def _double_step(
    generator, t: float, h: float, epsilon: float
) -> Tuple[numpy.ndarray, numpy.ndarray, numpy.ndarray]:
    """Takes one step of size ``h`` and two steps of size ``h / 2`` with the fourth
    order commutator-free scheme

        U(t+h) = exp(-ih(w1 H1 + w2 H2)/eps) exp(-ih(w2 H1 + w1 H2)/eps) U(t)

    Returns
    -------
        The single step propagator, the two half step propagator and the four
        generators evaluated at the half step nodes.
    """

    offsets = numpy.concatenate(
        [_NODES * h, _NODES * 0.5 * h, 0.5 * h + _NODES * 0.5 * h]
    )
    generators = generator.evaluate(t + offsets)

    early, late = generators[0::2], generators[1::2]

    exponents = numpy.concatenate(
        [_WEIGHT_1 * early + _WEIGHT_2 * late, _WEIGHT_2 * early + _WEIGHT_1 * late]
    )
    scales = numpy.tile(numpy.array([h, 0.5 * h, 0.5 * h]) / epsilon, 2)

    factors = hermitian_exponential(exponents, scales)
    steps = factors[:3] @ factors[3:]

    return steps[0], steps[2] @ steps[1], generators[2:]


def _evolve(
    generator,
    epsilon: float,
    checkpoints: Sequence[float],
    settings: PropagatorSettings,
    accumulate_phases: bool = False,
) -> Tuple[numpy.ndarray, numpy.ndarray, int, float, numpy.ndarray]:
    """Integrates ``i epsilon dU/dt = G(t) U`` from the first checkpoint through each
    of the remaining ones, which must be monotone.

    Returns
    -------
        The propagators from the first checkpoint to each checkpoint with
        shape=(n_checkpoints, n, n), the integrals of the ascending eigenvalues of
        the generator at each checkpoint with shape=(n_checkpoints, n), the number of
        accepted steps, the global error estimate and the accepted step times.
    """

    dimension = generator.dimension
    checkpoints = numpy.asarray(checkpoints, dtype=float)

    fine = numpy.eye(dimension, dtype=complex)
    coarse = numpy.eye(dimension, dtype=complex)

    phase_integrals = numpy.zeros(dimension)

    unitaries = [fine.copy()]
    phases = [phase_integrals.copy()]

    step_times = [float(checkpoints[0])]

    h_max = settings.phase_resolution * epsilon
    h = settings.initial_step if settings.initial_step is not None else 0.1 * h_max
    h = min(h, h_max)

    n_accepted, n_attempted = 0, 0

    for t_start, t_end in zip(checkpoints[:-1], checkpoints[1:]):
        direction = 1.0 if t_end >= t_start else -1.0
        t = float(t_start)

        while direction * (t_end - t) > 0.0:
            remaining = abs(t_end - t)
            is_last = h >= remaining

            step = remaining if is_last else h

            big, half, generators = _double_step(
                generator, t, direction * step, epsilon
            )
            n_attempted += 1

            if n_attempted > settings.max_steps:
                raise StepLimitExceededError(
                    epsilon, settings.tolerance, settings.max_steps, t
                )

            error = float(numpy.max(numpy.abs(big - half))) / _DOUBLING_DENOMINATOR

            if error <= settings.tolerance:
                fine = half @ fine
                coarse = big @ coarse

                if accumulate_phases:
                    # two point Gauss quadrature on each half step
                    eigenvalues = numpy.linalg.eigvalsh(generators)
                    phase_integrals += 0.25 * direction * step * eigenvalues.sum(axis=0)

                t = float(t_end) if is_last else t + direction * step

                step_times.append(t)
                n_accepted += 1

            factor = (
                2.0
                if error == 0.0
                else min(2.0, max(0.2, 0.9 * (settings.tolerance / error) ** 0.2))
            )
            h = min(h_max, step * factor)

        unitaries.append(fine.copy())
        phases.append(phase_integrals.copy())

    error_estimate = float(operator_norm(fine - coarse)) / _DOUBLING_DENOMINATOR

    return (
        numpy.array(unitaries),
        numpy.array(phases),
        n_accepted,
        error_estimate,
        numpy.array(step_times),
    )


def _resolve_settings(
    settings: Optional[PropagatorSettings], tol: Optional[float]
) -> PropagatorSettings:
    settings = PropagatorSettings() if settings is None else settings
    return settings if tol is None else settings.copy(update={"tolerance": tol})


def propagate_generator(
    generator,
    epsilon: float,
    t0: float,
    t1: float,
    settings: Optional[PropagatorSettings] = None,
) -> PropagationResult:
    """Integrates ``i epsilon dU/dt = G(t) U`` for a generic generator ``G``, i.e.
    any object with a ``dimension`` and a vectorized ``evaluate`` which returns
    hermitian matrices at real times.
    """

    settings = PropagatorSettings() if settings is None else settings

    unitaries, _, step_count, error_estimate, step_times = _evolve(
        generator, epsilon, [t0, t1], settings
    )

    return PropagationResult(
        U=unitaries[-1],
        interval=(t0, t1),
        epsilon=epsilon,
        step_count=step_count,
        error_estimate=error_estimate,
        unitarity_defect=unitarity_defect(unitaries[-1]),
        step_times=step_times,
    )


def evolution_history(
    generator,
    epsilon: float,
    times: Sequence[float],
    settings: Optional[PropagatorSettings] = None,
) -> Tuple[numpy.ndarray, PropagationResult]:
    """Integrates ``i epsilon dU/dt = G(t) U`` through a monotone sequence of times,
    landing a step exactly on each one.

    Returns
    -------
        The propagators ``U(t_k, t_0)`` with shape=(n_times, n, n) and the result
        over the full interval.
    """

    settings = PropagatorSettings() if settings is None else settings

    unitaries, _, step_count, error_estimate, step_times = _evolve(
        generator, epsilon, times, settings
    )

    return unitaries, PropagationResult(
        U=unitaries[-1],
        interval=(float(times[0]), float(times[-1])),
        epsilon=epsilon,
        step_count=step_count,
        error_estimate=error_estimate,
        unitarity_defect=unitarity_defect(unitaries[-1]),
        step_times=step_times,
    )


def propagate(
    model: "HamiltonianModel",
    epsilon: float,
    t0: float,
    t1: float,
    tol: Optional[float] = None,
    settings: Optional[PropagatorSettings] = None,
) -> PropagationResult:
    """Computes the evolution operator ``U(t1, t0)`` which solves
    ``i epsilon dU/dt = H(t) U`` with ``U(t0, t0) = I``.

    Parameters
    ----------
    model
        The model which provides ``H(t)``.
    epsilon
        The adiabatic parameter.
    t0
        The initial time.
    t1
        The final time, which may be before ``t0``.
    tol
        The local error tolerance. If provided, overrides ``settings.tolerance``.
    settings
        The integrator settings.

    Returns
    -------
        The evolution operator and its error diagnostics.
    """

    settings = _resolve_settings(settings, tol)
    result = propagate_generator(model, epsilon, t0, t1, settings)

    _logger.debug(
        f"propagated over [{t0}, {t1}] at epsilon={epsilon} in {result.step_count} "
        f"steps (error estimate {result.error_estimate:.3e})"
    )

    return result


def coefficients(
    model: "HamiltonianModel",
    epsilon: float,
    initial_state: numpy.ndarray,
    times: Sequence[float],
    tol: Optional[float] = None,
    settings: Optional[PropagatorSettings] = None,
) -> CoefficientTrace:
    """Expands the solution ``psi(t) = U(t, t_0) psi_0`` as

        psi(t) = sum_j c_j(t) exp(-i int_{t_0}^t e_j / epsilon) phi_j(t)

    where the ``phi_j`` are the parallel transported eigenvectors of ``H(t)``.

    Parameters
    ----------
    model
        The model which provides ``H(t)``.
    epsilon
        The adiabatic parameter.
    initial_state
        The normalized state at the first grid time.
    times
        The monotone grid of real times to report the coefficients on.
    tol
        The local error tolerance. If provided, overrides ``settings.tolerance``.
    settings
        The integrator settings.

    Returns
    -------
        The coefficients and dynamical phases on the grid.
    """

    settings = _resolve_settings(settings, tol)

    times = numpy.asarray(times, dtype=float)
    initial_state = numpy.asarray(initial_state, dtype=complex)

    unitaries, phase_integrals, _, _, _ = _evolve(
        model, epsilon, times, settings, accumulate_phases=True
    )
    states = unitaries @ initial_state

    frames = gauge_transport(continue_along(model, times))

    overlaps = numpy.array(
        [
            numpy.conjugate(frame.eigenvectors).T @ state
            for frame, state in zip(frames, states)
        ]
    )
    dynamical_phases = phase_integrals / epsilon

    return CoefficientTrace(
        times=times,
        coefficients=numpy.exp(1.0j * dynamical_phases) * overlaps,
        dynamical_phases=dynamical_phases,
        labels=frames[0].labels,
    )


def _scattering_probability(
    model: "HamiltonianModel",
    epsilon: float,
    from_label: int,
    to_label: int,
    truncation: float,
    settings: PropagatorSettings,
) -> Tuple[float, PropagationResult]:
    initial_frame = eigen_frame(model.evaluate(-truncation), -truncation)
    final_frame = eigen_frame(model.evaluate(truncation), truncation)

    result = propagate_generator(model, epsilon, -truncation, truncation, settings)

    state = result.U @ initial_frame.eigenvectors[:, initial_frame.column(from_label)]
    amplitude = (
        numpy.conjugate(final_frame.eigenvectors[:, final_frame.column(to_label)])
        @ state
    )

    return float(numpy.abs(amplitude) ** 2), result


def transition_probability(
    model: "HamiltonianModel",
    epsilon: float,
    from_label: int,
    to_label: int,
    tol: Optional[float] = None,
    settings: Optional[PropagatorSettings] = None,
    convergence: Optional[ConvergenceSettings] = None,
) -> TransitionResult:
    """Computes the scattering transition probability ``|c_j(+inf)|^2`` given
    ``c(-inf) = delta_k``.

    For scattering safe models infinity is replaced by the time returned by
    ``truncation_time``. Otherwise ``T`` is doubled, starting from
    ``convergence.initial_time``, until the probability changes by less than
    ``convergence.relative_tolerance``. In both cases the initial state is the
    exact eigenvector of ``H(-T)``.

    Parameters
    ----------
    model
        The model which provides ``H(t)``.
    epsilon
        The adiabatic parameter.
    from_label
        The label k of the initially occupied level.
    to_label
        The label j of the final level.
    tol
        The local error tolerance. If provided, overrides ``settings.tolerance``.
    settings
        The integrator settings.
    convergence
        The settings of the convergence-in-T mode.

    Returns
    -------
        The probability together with the ``T`` it was computed on.
    """

    settings = _resolve_settings(settings, tol)
    convergence = ConvergenceSettings() if convergence is None else convergence

    try:
        truncation = truncation_time(model, settings.truncation_tolerance)
        probability, result = _scattering_probability(
            model, epsilon, from_label, to_label, truncation, settings
        )

    except NotScatteringSafeError:
        truncation = convergence.initial_time

        probability, result = _scattering_probability(
            model, epsilon, from_label, to_label, truncation, settings
        )

        relative_change = numpy.inf

        for _ in range(convergence.max_doublings):
            truncation *= 2.0

            previous = probability
            probability, result = _scattering_probability(
                model, epsilon, from_label, to_label, truncation, settings
            )

            relative_change = abs(probability - previous) / max(
                probability, numpy.finfo(float).tiny
            )
            _logger.info(
                f"T={truncation:g} P={probability:.6e} relative change "
                f"{relative_change:.3e}"
            )

            if relative_change < convergence.relative_tolerance:
                break

        else:
            raise TruncationConvergenceError(
                epsilon, truncation, relative_change, convergence.max_doublings
            )

    return TransitionResult(
        probability=probability,
        truncation_time=truncation,
        epsilon=epsilon,
        unitarity_defect=result.unitarity_defect,
        error_estimate=result.error_estimate,
    )


def adiabatic_propagate(
    model: "HamiltonianModel",
    epsilon: float,
    t0: float,
    t1: float,
    labels: Collection[int],
    tol: Optional[float] = None,
    settings: Optional[PropagatorSettings] = None,
) -> PropagationResult:
    """Computes the adiabatic evolution ``V(t1, t0)`` generated by
    ``H(t) + i epsilon [P'(t), P(t)]``, which maps the range of ``P(t0)`` exactly
    onto the range of ``P(t1)``.

    Parameters
    ----------
    model
        The model which provides ``H(t)``.
    epsilon
        The adiabatic parameter.
    t0
        The initial time.
    t1
        The final time.
    labels
        The labels of the eigenvalues which define ``P``.
    tol
        The local error tolerance. If provided, overrides ``settings.tolerance``.
    settings
        The integrator settings.

    Returns
    -------
        The evolution operator with the intertwining defect
        ``||V P(t0) - P(t1) V||`` populated.
    """

    settings = _resolve_settings(settings, tol)

    generator = AdiabaticGenerator(model, labels, epsilon)
    result = propagate_generator(generator, epsilon, t0, t1, settings)

    initial_projector, final_projector = grid_projectors(
        model.evaluate(numpy.array([t0, t1])), labels
    )

    defect = float(
        operator_norm(result.U @ initial_projector - final_projector @ result.U)
    )

    return result.copy(update={"intertwining_defect": defect})
