import logging
from typing import TYPE_CHECKING, Collection, Iterator, List, Literal, Optional, Tuple

import numpy
from scipy.interpolate import CubicSpline
from scipy.linalg import polar

from openff.adiabatic._pydantic import BaseModel, Extra, Field
from openff.adiabatic.propagator import (
    PropagatorSettings,
    evolution_history,
    propagate,
    propagate_generator,
)
from openff.adiabatic.spectral import grid_projectors
from openff.adiabatic.superadiabatic.exceptions import (
    EffectiveRankError,
    GapClosureError,
)
from openff.adiabatic.utilities.linalg import commutator, dagger, operator_norm
from openff.adiabatic.utilities.pydantic import Array

if TYPE_CHECKING:
    from openff.adiabatic.models import HamiltonianModel

    PositiveFloat = float
    PositiveInt = int
else:
    from openff.adiabatic._pydantic import PositiveFloat, PositiveInt

_logger = logging.getLogger(__name__)


class SuperadiabaticSettings(BaseModel):
    """Settings which control how the superadiabatic Hamiltonians are sampled and
    truncated."""

    class Config:
        extra = Extra.forbid

    spacing: PositiveFloat = Field(
        0.005, description="The spacing of the uniform time grid."
    )
    q_max: PositiveInt = Field(
        12, description="The number of orders considered when truncating."
    )
    criterion: Literal["defect", "transition"] = Field(
        "defect",
        description="Whether the optimal order minimizes the defect ||H_{q+1} - H_q|| "
        "or the transition probability measured in the superadiabatic basis.",
    )
    labels: Tuple[int, ...] = Field(
        (1,), description="The labels of the eigenvalues which define P_1."
    )
    gap_fraction: PositiveFloat = Field(
        0.5,
        description="The fraction of the minimum gap of H below which the gap of an "
        "intermediate H_q is considered closed.",
    )


class SuperadiabaticLevel(BaseModel):
    """The ``q``-th superadiabatic Hamiltonian sampled on a uniform time grid."""

    class Config:
        allow_mutation = False

    q: int = Field(..., description="The order of the level.")
    epsilon: PositiveFloat = Field(..., description="The adiabatic parameter.")
    labels: Tuple[int, ...] = Field(
        ..., description="The labels of the eigenvalues which define P_1q."
    )

    grid: Array[float] = Field(..., description="The uniform time grid.")

    hamiltonians: Array[complex] = Field(
        ..., description="H_q on the grid with shape=(n_times, n, n)."
    )
    projectors: Array[complex] = Field(
        ..., description="P_1q on the grid with shape=(n_times, n, n)."
    )
    projector_derivatives: Array[complex] = Field(
        ..., description="dP_1q/dt on the grid with shape=(n_times, n, n)."
    )

    defect_norm: float = Field(
        ..., description="The largest value of ||H_{q+1} - H_q|| on the grid."
    )

    def generator(self) -> numpy.ndarray:
        """Returns ``H_q + i epsilon [P_1q', P_1q]`` on the grid, which generates
        an evolution that intertwines ``P_1q`` exactly."""
        return self.hamiltonians + 1.0j * self.epsilon * commutator(
            self.projector_derivatives, self.projectors
        )


class OptimalTruncation(BaseModel):
    """The order at which the superadiabatic iteration is best truncated."""

    class Config:
        allow_mutation = False

    q_star: int = Field(..., description="The optimal order.")
    level: SuperadiabaticLevel = Field(..., description="The level at q_star.")

    defect_norms: List[float] = Field(
        ..., description="The defect norm of every order which could be built."
    )
    diverging: bool = Field(
        ...,
        description="Whether the iteration diverged from the first step, i.e. "
        "epsilon is too large for any correction to help.",
    )


class EffectiveHamiltonian(BaseModel):
    """A 2x2 Hamiltonian obtained by compressing ``H`` onto the range of a rank two
    superadiabatic projector."""

    class Config:
        allow_mutation = False

    q: int = Field(..., description="The order of the projector.")
    epsilon: PositiveFloat = Field(..., description="The adiabatic parameter.")

    grid: Array[float] = Field(..., description="The uniform time grid.")
    matrices: Array[complex] = Field(
        ..., description="The effective Hamiltonian with shape=(n_times, 2, 2)."
    )
    frames: Array[complex] = Field(
        ...,
        description="The transported orthonormal frame of the range of the projector "
        "with shape=(n_times, n, 2).",
    )

    def hamiltonian(self) -> "SampledHamiltonian":
        return SampledHamiltonian(self.grid, self.matrices)


class SampledHamiltonian:
    """A hermitian matrix function known on a time grid and evaluated between the
    grid points by cubic spline interpolation of its real and imaginary parts."""

    def __init__(self, grid: numpy.ndarray, matrices: numpy.ndarray):
        self.grid = numpy.asarray(grid, dtype=float)

        matrices = numpy.asarray(matrices, dtype=complex)

        self._real = CubicSpline(self.grid, matrices.real, axis=0)
        self._imag = CubicSpline(self.grid, matrices.imag, axis=0)

        self._dimension = matrices.shape[-1]

    @property
    def dimension(self) -> int:
        return self._dimension

    def evaluate(self, times) -> numpy.ndarray:
        times = numpy.asarray(times, dtype=complex).real

        tolerance = 1.0e-9 * max(1.0, float(numpy.max(numpy.abs(self.grid))))

        if numpy.any(times < self.grid[0] - tolerance) or numpy.any(
            times > self.grid[-1] + tolerance
        ):
            raise ValueError(
                f"times must lie within the sampled interval "
                f"[{self.grid[0]}, {self.grid[-1]}]"
            )

        return self._real(times) + 1.0j * self._imag(times)


def uniform_grid(window: Tuple[float, float], spacing: float = 0.005) -> numpy.ndarray:
    """Returns the uniform grid which spans ``window`` with a spacing no larger
    than ``spacing``."""

    t0, t1 = window

    if t1 <= t0:
        raise ValueError("the window must be increasing")

    n_intervals = int(numpy.ceil((t1 - t0) / spacing - 1.0e-9))
    return numpy.linspace(t0, t1, n_intervals + 1)


def _grid_spacing(grid: numpy.ndarray) -> float:
    grid = numpy.asarray(grid, dtype=float)

    if grid.ndim != 1 or len(grid) < 2:
        raise ValueError("the grid must be a one dimensional array of times")

    spacings = numpy.diff(grid)
    spacing = float(numpy.mean(spacings))

    if spacing <= 0.0 or not numpy.allclose(spacings, spacing, rtol=1.0e-6):
        raise ValueError("the grid must be uniform and increasing")

    return spacing


def _stencil_derivative(values: numpy.ndarray, spacing: float) -> numpy.ndarray:
    """Differentiates along the first axis with the Richardson extrapolation of
    the central differences with steps ``h`` and ``2h``. The result is two points
    shorter at each end."""
    return (
        8.0 * (values[3:-1] - values[1:-3]) - (values[4:] - values[:-4])
    ) / (12.0 * spacing)


def _spectral_gaps(
    hamiltonians: numpy.ndarray, labels: Collection[int]
) -> numpy.ndarray:
    """Returns the distance between the labelled eigenvalues and the remainder of
    the spectrum at each grid point."""

    eigenvalues = numpy.linalg.eigvalsh(0.5 * (hamiltonians + dagger(hamiltonians)))

    inside = [label - 1 for label in labels]
    outside = [index for index in range(eigenvalues.shape[-1]) if index not in inside]

    if len(outside) == 0:
        return numpy.full(len(eigenvalues), numpy.inf)

    differences = numpy.abs(
        eigenvalues[:, inside, None] - eigenvalues[:, None, outside]
    )
    return differences.min(axis=(1, 2))


def _iterate_levels(
    model: "HamiltonianModel",
    epsilon: float,
    n_levels: int,
    grid: numpy.ndarray,
    labels: Collection[int],
    gap_fraction: float,
) -> Iterator[SuperadiabaticLevel]:
    """Yields the levels ``q = 0, ..., n_levels - 1`` of the recursion

        H_0 = H,  H_{q+1} = H - i epsilon [P_1q', P_1q]

    Each derivative consumes two grid points at either end, so the model is
    sampled on the grid padded by ``2 n_levels`` points on each side.
    """

    grid = numpy.asarray(grid, dtype=float)
    labels = tuple(sorted(labels))

    spacing = _grid_spacing(grid)
    padding = 2 * n_levels

    extended = grid[0] + spacing * numpy.arange(-padding, len(grid) + padding)
    base = numpy.asarray(model.evaluate(extended), dtype=complex)

    def on_grid(values: numpy.ndarray, trim: int) -> numpy.ndarray:
        # values covers extended[trim:len(extended) - trim]
        start = padding - trim
        return values[start : start + len(grid)]

    reference_gap = float(_spectral_gaps(base, labels).min())
    hamiltonians = base

    for q in range(n_levels):
        trim = 2 * q

        if q > 0:
            if not numpy.all(numpy.isfinite(hamiltonians)):
                raise GapClosureError(q, float("nan"), epsilon, float("nan"))

            gaps = _spectral_gaps(hamiltonians, labels)
            index = int(numpy.argmin(gaps))

            if gaps[index] < gap_fraction * reference_gap:
                raise GapClosureError(
                    q, float(extended[trim + index]), epsilon, float(gaps[index])
                )

        projectors = grid_projectors(hamiltonians, labels)
        derivatives = _stencil_derivative(projectors, spacing)

        following = base[trim + 2 : len(base) - trim - 2] - 1.0j * epsilon * (
            commutator(derivatives, projectors[2:-2])
        )

        defect_norm = float(
            numpy.max(
                operator_norm(
                    on_grid(following, trim + 2) - on_grid(hamiltonians, trim)
                )
            )
        )

        _logger.debug(f"epsilon={epsilon} q={q} defect={defect_norm:.3e}")

        yield SuperadiabaticLevel(
            q=q,
            epsilon=epsilon,
            labels=labels,
            grid=grid,
            hamiltonians=on_grid(hamiltonians, trim),
            projectors=on_grid(projectors, trim),
            projector_derivatives=on_grid(derivatives, trim + 2),
            defect_norm=defect_norm,
        )

        hamiltonians = following


def build_level(
    model: "HamiltonianModel",
    epsilon: float,
    q: int,
    grid: numpy.ndarray,
    labels: Collection[int] = (1,),
    gap_fraction: float = 0.5,
) -> SuperadiabaticLevel:
    """Builds the ``q``-th superadiabatic Hamiltonian ``H_q`` and its projector
    ``P_1q`` on a uniform time grid.

    Parameters
    ----------
    model
        The model which provides ``H(t)``.
    epsilon
        The adiabatic parameter.
    q
        The order of the level, where ``q = 0`` is the ordinary adiabatic basis.
    grid
        The uniform grid of times to sample on.
    labels
        The labels of the eigenvalues which define ``P_1``.
    gap_fraction
        The fraction of the minimum gap of ``H`` below which the gap of an
        intermediate ``H_k`` is considered closed.

    Raises
    ------
    GapClosureError
        If the gap of an intermediate Hamiltonian closes on the grid.
    """

    if q < 0:
        raise ValueError("the order q must be non-negative")

    *_, level = _iterate_levels(model, epsilon, q + 1, grid, labels, gap_fraction)
    return level


def level_sequence(
    model: "HamiltonianModel",
    epsilon: float,
    q_max: int,
    grid: numpy.ndarray,
    labels: Collection[int] = (1,),
    gap_fraction: float = 0.5,
) -> List[float]:
    """Returns the defect norms ``sup ||H_{q+1} - H_q||`` for ``q < q_max``. The
    sequence ends early if the gap of an intermediate Hamiltonian closes."""

    defect_norms = []

    try:
        for level in _iterate_levels(
            model, epsilon, q_max, grid, labels, gap_fraction
        ):
            defect_norms.append(level.defect_norm)
    except GapClosureError as error:
        _logger.info(f"the superadiabatic iteration stopped: {error}")

    return defect_norms


def _basis_transition(
    unitary: numpy.ndarray, initial: numpy.ndarray, final: numpy.ndarray
) -> float:
    """Returns ``||(1 - P(t1)) U P(t0)||^2``."""

    complement = numpy.eye(len(final)) - final
    return float(operator_norm(complement @ unitary @ initial) ** 2)


def superadiabatic_transition(
    model: "HamiltonianModel",
    epsilon: float,
    q: int,
    window: Tuple[float, float],
    settings: Optional[SuperadiabaticSettings] = None,
    propagator_settings: Optional[PropagatorSettings] = None,
) -> float:
    """Computes ``||P_2q(t1) U(t1, t0) P_1q(t0)||^2``, the transition probability
    measured in the ``q``-th superadiabatic basis, where ``U`` is the true
    evolution and ``P_2q = 1 - P_1q``.

    The probability is ``O(epsilon^(2q + 2))`` for a fixed window.
    """

    settings = SuperadiabaticSettings() if settings is None else settings

    level = build_level(
        model,
        epsilon,
        q,
        uniform_grid(window, settings.spacing),
        settings.labels,
        settings.gap_fraction,
    )
    result = propagate(model, epsilon, *window, settings=propagator_settings)

    return _basis_transition(result.U, level.projectors[0], level.projectors[-1])


def transition_history(
    model: "HamiltonianModel",
    epsilon: float,
    q: int,
    window: Tuple[float, float],
    times: numpy.ndarray,
    settings: Optional[SuperadiabaticSettings] = None,
    propagator_settings: Optional[PropagatorSettings] = None,
) -> numpy.ndarray:
    """Computes ``||P_2q(t) U(t, t0) P_1q(t0)||^2`` at each of ``times``.

    Parameters
    ----------
    model
        The model which provides ``H(t)``.
    epsilon
        The adiabatic parameter.
    q
        The order of the superadiabatic basis.
    window
        The interval ``(t0, t1)`` the evolution starts from and is sampled on.
    times
        The increasing times within the window to report the probability at.

    Returns
    -------
        The probabilities with shape=(n_times,).
    """

    settings = SuperadiabaticSettings() if settings is None else settings
    times = numpy.asarray(times, dtype=float)

    if numpy.any(numpy.diff(times) <= 0.0):
        raise ValueError("the times must be strictly increasing")

    level = build_level(
        model,
        epsilon,
        q,
        uniform_grid(window, settings.spacing),
        settings.labels,
        settings.gap_fraction,
    )

    sampled = SampledHamiltonian(level.grid, level.hamiltonians)
    projectors = grid_projectors(sampled.evaluate(times), level.labels)

    checkpoints = numpy.concatenate([[window[0]], times])
    unitaries, _ = evolution_history(model, epsilon, checkpoints, propagator_settings)

    initial = level.projectors[0]
    complements = numpy.eye(model.dimension) - projectors

    return operator_norm(complements @ unitaries[1:] @ initial) ** 2


def optimal_truncation(
    model: "HamiltonianModel",
    epsilon: float,
    q_max: int,
    grid: numpy.ndarray,
    settings: Optional[SuperadiabaticSettings] = None,
    propagator_settings: Optional[PropagatorSettings] = None,
) -> OptimalTruncation:
    """Finds the order ``q* < q_max`` at which the superadiabatic iteration is
    best truncated.

    By default ``q*`` minimizes the defect ``sup ||H_{q+1} - H_q||``, which first
    decreases and then grows factorially. If ``settings.criterion`` is
    ``"transition"`` it instead minimizes the transition probability measured in
    the superadiabatic basis across the grid.

    If the gap of ``H_{k+1}`` closes the defect of level ``k`` is measured against
    a degenerate Hamiltonian, so only the levels ``q < k`` are candidates. When
    ``q* = 0`` is returned the result is flagged as diverging.
    """

    settings = SuperadiabaticSettings() if settings is None else settings

    if q_max < 1:
        raise ValueError("q_max must be at least 1")

    levels = []
    gap_closed = False

    try:
        for level in _iterate_levels(
            model, epsilon, q_max, grid, settings.labels, settings.gap_fraction
        ):
            levels.append(level)
    except GapClosureError as error:
        _logger.warning(f"the superadiabatic iteration stopped: {error}")
        gap_closed = True

    defect_norms = [level.defect_norm for level in levels]
    candidates = levels[:-1] if gap_closed and len(levels) > 1 else levels

    if settings.criterion == "defect":
        scores = [level.defect_norm for level in candidates]
    else:
        result = propagate(
            model, epsilon, grid[0], grid[-1], settings=propagator_settings
        )
        scores = [
            _basis_transition(result.U, level.projectors[0], level.projectors[-1])
            for level in candidates
        ]

    q_star = int(numpy.argmin(scores))
    diverging = q_star == 0

    if diverging:
        _logger.warning(
            f"the superadiabatic iteration diverges from the first order at "
            f"epsilon={epsilon}, truncating at q=0"
        )

    return OptimalTruncation(
        q_star=q_star,
        level=levels[q_star],
        defect_norms=defect_norms,
        diverging=diverging,
    )


def _superadiabatic_evolution(
    level: SuperadiabaticLevel,
    stride: int,
    settings: Optional[PropagatorSettings],
) -> Tuple[numpy.ndarray, numpy.ndarray]:
    generator = SampledHamiltonian(level.grid, level.generator())

    indices = numpy.unique(
        numpy.append(numpy.arange(0, len(level.grid), stride), len(level.grid) - 1)
    )
    unitaries, _ = evolution_history(
        generator, level.epsilon, level.grid[indices], settings
    )

    return unitaries, indices


def verify_intertwining(
    model: "HamiltonianModel",
    epsilon: float,
    q: int,
    window: Tuple[float, float],
    settings: Optional[SuperadiabaticSettings] = None,
    propagator_settings: Optional[PropagatorSettings] = None,
    n_checkpoints: int = 41,
) -> float:
    """Integrates the superadiabatic evolution ``V_q`` generated by
    ``H_q + i epsilon [P_1q', P_1q]`` and returns the largest intertwining defect
    ``||V_q(t, t0) P_1q(t0) - P_1q(t) V_q(t, t0)||`` over checkpoints spread
    evenly across the window.
    """

    settings = SuperadiabaticSettings() if settings is None else settings

    level = build_level(
        model,
        epsilon,
        q,
        uniform_grid(window, settings.spacing),
        settings.labels,
        settings.gap_fraction,
    )

    stride = max(1, (len(level.grid) - 1) // max(1, n_checkpoints - 1))
    unitaries, indices = _superadiabatic_evolution(level, stride, propagator_settings)

    projectors = level.projectors[indices]

    defects = operator_norm(
        unitaries @ projectors[0] - projectors @ unitaries
    )
    return float(numpy.max(defects))


def superadiabatic_deviation(
    model: "HamiltonianModel",
    epsilon: float,
    q: int,
    window: Tuple[float, float],
    settings: Optional[SuperadiabaticSettings] = None,
    propagator_settings: Optional[PropagatorSettings] = None,
) -> float:
    """Returns ``||V_q(t1, t0) - U(t1, t0)||`` between the superadiabatic and the
    true evolution across the window."""

    settings = SuperadiabaticSettings() if settings is None else settings

    level = build_level(
        model,
        epsilon,
        q,
        uniform_grid(window, settings.spacing),
        settings.labels,
        settings.gap_fraction,
    )

    generator = SampledHamiltonian(level.grid, level.generator())

    superadiabatic = propagate_generator(
        generator, epsilon, *window, propagator_settings
    )
    true = propagate(model, epsilon, *window, settings=propagator_settings)

    return float(operator_norm(superadiabatic.U - true.U))


def reduce_to_effective(
    model: "HamiltonianModel",
    epsilon: float,
    q: int,
    grid: numpy.ndarray,
    initial_frame: Literal["adiabatic", "canonical"] = "adiabatic",
    gap_fraction: float = 0.5,
) -> EffectiveHamiltonian:
    """Reduces a model to an effective two level problem by compressing ``H``
    onto the range of the rank two projector ``P_1q`` built from the two lowest
    eigenvalues.

    The range is spanned by an orthonormal frame which is transported along the
    grid by projecting the previous frame and taking the isometric factor of its
    polar decomposition.

    Parameters
    ----------
    model
        A model with at least three levels whose two lowest eigenvalues are
        separated from the rest of the spectrum.
    epsilon
        The adiabatic parameter.
    q
        The order of the superadiabatic projector.
    grid
        The uniform grid of times to sample on.
    initial_frame
        Whether the frame starts from the eigenvectors of ``H_q(t0)``
        (``"adiabatic"``) or from the first two canonical basis vectors projected
        onto the range (``"canonical"``).

    Returns
    -------
        The effective Hamiltonian ``F^dagger H F`` and the frame ``F`` on the grid.
    """

    if model.dimension < 3:
        raise ValueError("an effective reduction requires at least three levels")

    if initial_frame not in ("adiabatic", "canonical"):
        raise ValueError(
            f"the initial frame must be 'adiabatic' or 'canonical', not "
            f"{initial_frame!r}"
        )

    level = build_level(model, epsilon, q, grid, (1, 2), gap_fraction)

    ranks = numpy.rint(numpy.trace(level.projectors, axis1=1, axis2=2).real)
    invalid = numpy.flatnonzero(ranks != 2)

    if len(invalid) > 0:
        index = invalid[0]
        raise EffectiveRankError(int(ranks[index]), 2, float(level.grid[index]))

    if initial_frame == "adiabatic":
        _, vectors = numpy.linalg.eigh(level.hamiltonians[0])
        frame = vectors[:, :2]
    else:
        frame, _ = polar(level.projectors[0][:, :2])

    frames = [frame]

    for projector in level.projectors[1:]:
        frame, _ = polar(projector @ frame)
        frames.append(frame)

    frames = numpy.array(frames)
    hamiltonians = numpy.asarray(model.evaluate(level.grid), dtype=complex)

    return EffectiveHamiltonian(
        q=q,
        epsilon=epsilon,
        grid=level.grid,
        matrices=dagger(frames) @ hamiltonians @ frames,
        frames=frames,
    )


def effective_transition(
    effective: EffectiveHamiltonian,
    from_label: int = 1,
    to_label: int = 2,
    settings: Optional[PropagatorSettings] = None,
) -> float:
    """Integrates an effective two level Hamiltonian across its grid and returns
    the probability of a transition between its eigenstates at the two ends."""

    hamiltonian = effective.hamiltonian()
    result = propagate_generator(
        hamiltonian, effective.epsilon, effective.grid[0], effective.grid[-1], settings
    )

    _, initial = numpy.linalg.eigh(effective.matrices[0])
    _, final = numpy.linalg.eigh(effective.matrices[-1])

    amplitude = (
        numpy.conjugate(final[:, to_label - 1]) @ result.U @ initial[:, from_label - 1]
    )
    return float(numpy.abs(amplitude) ** 2)
