import logging
from typing import TYPE_CHECKING, Callable, List, Literal, Optional, Sequence, Tuple

import numpy
import scipy.linalg
from scipy.optimize import linear_sum_assignment
from scipy.stats import linregress

from openff.adiabatic._pydantic import BaseModel, Extra, Field, root_validator
from openff.adiabatic.complexplane.exceptions import (
    ClosureNotProportionalError,
    CrossingNotFoundError,
    CrossingOutsideStripError,
    EnclosedCrossingError,
    LoopConvergenceError,
    NoBranchExchangeError,
    PathOutsideStripError,
)
from openff.adiabatic.models.exceptions import ModelDomainError
from openff.adiabatic.spectral import (
    SpectralFrame,
    continue_along,
    frame_at,
    gauge_transport,
)
from openff.adiabatic.utilities.pydantic import Array, ComplexNumber

if TYPE_CHECKING:
    from openff.adiabatic.models import HamiltonianModel

    PositiveFloat = float
    PositiveInt = int
else:
    from openff.adiabatic._pydantic import PositiveFloat, PositiveInt

_logger = logging.getLogger(__name__)

_DISSIPATIVITY_TOLERANCE = -1.0e-10
_CLOSURE_TOLERANCE = 1.0e-6


class ContourPath(BaseModel):
    """A sampled path in the complex time strip. Polygonal paths additionally keep
    their vertices so that they can be resampled more finely."""

    class Config:
        allow_mutation = False

    samples: Array[complex] = Field(..., description="The ordered sample points.")

    closed: bool = Field(
        False, description="Whether the first and last samples coincide."
    )
    orientation: Literal[-1, 0, 1] = Field(
        0,
        description="The orientation of a closed path: -1 for clockwise (negatively "
        "oriented), +1 for counter-clockwise and 0 for open paths.",
    )
    base: ComplexNumber = Field(
        ..., description="The point the path starts (and for loops ends) at."
    )

    vertices: Optional[Array[complex]] = Field(
        None, description="The corners of a polygonal path, if it is one."
    )

    @root_validator(skip_on_failure=True)
    def _validate_closure(cls, values):
        samples = values["samples"]

        if samples.ndim != 1 or len(samples) < 2:
            raise ValueError("a path requires at least two samples")

        if values["closed"] and abs(samples[0] - samples[-1]) > 1.0e-12:
            raise ValueError("the first and last samples of a closed path must agree")

        if not values["closed"] and values["orientation"] != 0:
            raise ValueError("only closed paths carry an orientation")

        return values

    @classmethod
    def polygon(
        cls, vertices: Sequence[complex], samples_per_side: int
    ) -> "ContourPath":
        """Creates a path which visits each vertex in turn, sampling each side at
        ``samples_per_side`` uniformly spaced intervals.

        A path whose last vertex equals its first is closed, and its orientation
        is taken from the sign of its enclosed area.
        """

        vertices = numpy.asarray(vertices, dtype=complex)

        samples = numpy.concatenate(
            [
                numpy.linspace(start, end, samples_per_side + 1)[:-1]
                for start, end in zip(vertices[:-1], vertices[1:])
            ]
            + [vertices[-1:]]
        )

        closed = bool(abs(vertices[0] - vertices[-1]) <= 1.0e-12)
        orientation = 0

        if closed:
            signed_area = 0.5 * numpy.sum(
                (numpy.conjugate(vertices[:-1]) * vertices[1:]).imag
            )
            orientation = 1 if signed_area > 0.0 else -1

        return cls(
            samples=samples,
            closed=closed,
            orientation=orientation,
            base=complex(vertices[0]),
            vertices=vertices,
        )

    def resample(self, samples_per_side: int) -> "ContourPath":
        """Returns the same polygonal path sampled with a different density."""

        if self.vertices is None:
            raise ValueError("only polygonal paths can be resampled")

        return self.polygon(self.vertices, samples_per_side)

    def repeated(self, n_times: int) -> "ContourPath":
        """Returns a closed polygonal path traversed ``n_times`` in a row."""

        if not self.closed or self.vertices is None:
            raise ValueError("only closed polygonal paths can be repeated")

        vertices = numpy.concatenate(
            [self.vertices[:-1]] * n_times + [self.vertices[-1:]]
        )
        return self.polygon(vertices, self.samples_per_side)

    @property
    def samples_per_side(self) -> Optional[int]:
        if self.vertices is None:
            return None

        return (len(self.samples) - 1) // (len(self.vertices) - 1)


class CrossingPoint(BaseModel):
    """A point in the complex strip where two continued eigenvalues coincide."""

    class Config:
        allow_mutation = False

    location: ComplexNumber = Field(..., description="The crossing point z0.")
    pair: Tuple[int, int] = Field(
        ..., description="The labels (j, k) of the eigenvalues which cross."
    )

    order_check: float = Field(
        ...,
        description="The leading exponent of |gap^2(z)| about z0, which is one for "
        "a generic square root branch point.",
    )
    derivative: ComplexNumber = Field(
        ..., description="The derivative of gap^2(z) at z0, non-zero when generic."
    )
    residual: float = Field(..., description="The value of |gap^2(z0)|.")
    n_iterations: int = Field(..., description="The number of Newton iterations.")


class LoopSettings(BaseModel):
    """The settings which control the refinement of loop quantities."""

    class Config:
        extra = Extra.forbid

    samples_per_side: PositiveInt = Field(
        32, description="The number of samples per side of the coarsest loop."
    )
    relative_tolerance: PositiveFloat = Field(
        1.0e-8,
        description="The relative change between successive sample doublings "
        "below which a loop quantity is considered converged.",
    )
    absolute_tolerance: PositiveFloat = Field(
        1.0e-12,
        description="The absolute change below which a loop quantity is "
        "considered converged, used when the quantity vanishes.",
    )
    max_refinements: PositiveInt = Field(
        8, description="The maximum number of sample doublings."
    )
    margin_fraction: PositiveFloat = Field(
        0.5,
        description="The fraction of the distance from a crossing to the real axis "
        "(and to the strip edge) left between the crossing and the loop.",
    )


class LoopIntegral(BaseModel):
    """The integral of a continued eigenvalue branch around a closed loop."""

    class Config:
        allow_mutation = False

    value: ComplexNumber = Field(..., description="The contour integral of e_j dz.")
    start_label: int = Field(..., description="The label j of the branch.")
    exchanged_with: Optional[int] = Field(
        ...,
        description="The label of the branch e_j is continued into, or ``None`` if "
        "the loop encircles no branch point of e_j.",
    )

    samples_per_side: int = Field(
        ..., description="The number of samples per side of the finest loop used."
    )
    relative_change: float = Field(
        ..., description="The change of the estimate in the final refinement."
    )


class DissipativityReport(BaseModel):
    """Whether ``Im int (e_j - e_k) dz`` is non-decreasing along a path."""

    class Config:
        allow_mutation = False

    dissipative: bool = Field(..., description="Whether the path is dissipative.")
    max_violation: float = Field(
        ...,
        description="The magnitude of the most negative increment, or zero if no "
        "increment is negative.",
    )
    cumulative: Array[float] = Field(
        ..., description="The cumulative imaginary part at each sample."
    )
    pair: Tuple[int, int] = Field(..., description="The labels (j, k).")


class _Romberg:
    """Richardson extrapolates a sequence of estimates whose errors are expansions
    in even powers of the sample spacing, which halves between estimates."""

    def __init__(self):
        self._rows: List[List[complex]] = []

    def add(self, estimate: complex) -> complex:
        row = [complex(estimate)]

        if len(self._rows) > 0:
            previous = self._rows[-1]

            for order in range(1, len(previous) + 1):
                row.append(
                    row[order - 1]
                    + (row[order - 1] - previous[order - 1]) / (4.0**order - 1.0)
                )

        self._rows.append(row)
        return row[-1]

    @property
    def change(self) -> float:
        if len(self._rows) < 2:
            return numpy.inf

        return abs(self._rows[-1][-1] - self._rows[-2][-1])


def _refine(
    estimate: Callable[[int], complex], settings: LoopSettings, quantity: str
) -> Tuple[complex, int, float]:
    """Doubles the number of samples per side until the Romberg extrapolated
    estimate converges."""

    romberg = _Romberg()

    for refinement in range(settings.max_refinements + 1):
        samples_per_side = settings.samples_per_side * 2**refinement
        value = romberg.add(estimate(samples_per_side))

        change = romberg.change

        _logger.debug(
            f"{quantity} with {samples_per_side} samples per side: {value:.12g} "
            f"(change {change:.3e})"
        )

        if change <= settings.relative_tolerance * abs(value) or (
            change <= settings.absolute_tolerance
        ):
            return value, samples_per_side, change / max(abs(value), 1.0e-300)

    raise LoopConvergenceError(
        quantity, change / max(abs(value), 1.0e-300), samples_per_side
    )


def _sorted_eigenvalues(matrix: numpy.ndarray) -> numpy.ndarray:
    values = scipy.linalg.eigvals(matrix)
    return values[numpy.lexsort((values.imag, values.real))]


def _gap_squared(
    model: "HamiltonianModel", z: complex, reference: Optional[numpy.ndarray]
) -> Tuple[complex, Optional[numpy.ndarray]]:
    """Evaluates ``(e_j(z) - e_k(z))^2``, which is analytic about a generic crossing.

    For two levels this is the discriminant ``tr(H)^2 - 4 det(H)``. For more levels
    the two eigenvalues closest to ``reference`` are used and returned as the new
    reference.
    """

    matrix = model.evaluate(z)

    if model.dimension == 2:
        trace = matrix[0, 0] + matrix[1, 1]
        determinant = matrix[0, 0] * matrix[1, 1] - matrix[0, 1] * matrix[1, 0]

        return trace**2 - 4.0 * determinant, reference

    values = scipy.linalg.eigvals(matrix)

    rows, columns = linear_sum_assignment(
        numpy.abs(reference[:, None] - values[None, :])
    )
    pair_values = values[columns[numpy.argsort(rows)]]

    return (pair_values[0] - pair_values[1]) ** 2, pair_values


def _gap_squared_derivative(
    model: "HamiltonianModel", z: complex, reference: Optional[numpy.ndarray]
) -> complex:
    """Differentiates ``gap^2`` by a central difference, which for an analytic
    function may be taken along the real direction."""

    h = 1.0e-6 * max(1.0, abs(z))

    return (
        _gap_squared(model, z + h, reference)[0]
        - _gap_squared(model, z - h, reference)[0]
    ) / (2.0 * h)


def _order_check(
    model: "HamiltonianModel", location: complex, reference: Optional[numpy.ndarray]
) -> float:
    """Fits the exponent ``p`` of ``|gap^2(z)| ~ |z - z0|^p`` on small circles."""

    radii = numpy.geomspace(1.0e-3, 8.0e-3, 4)
    angles = numpy.linspace(0.0, 2.0 * numpy.pi, 16, endpoint=False)

    magnitudes = []

    for radius in radii:
        circle = location + radius * numpy.exp(1.0j * angles)

        magnitudes.append(
            numpy.mean([abs(_gap_squared(model, z, reference)[0]) for z in circle])
        )

    return float(linregress(numpy.log(radii), numpy.log(magnitudes)).slope)


def find_crossing(
    model: "HamiltonianModel",
    pair: Tuple[int, int],
    seed: complex,
    tolerance: float = 1.0e-12,
    max_iterations: int = 50,
) -> CrossingPoint:
    """Locates a complex crossing point of two eigenvalues by Newton's method on the
    analytic function ``gap^2(z) = (e_j(z) - e_k(z))^2``.

    Parameters
    ----------
    model
        The model of interest.
    pair
        The labels (j, k) of the eigenvalues which should cross. For more than two
        levels these are the positions of the eigenvalues at the seed when ordered
        by increasing real part.
    seed
        The starting point of the iteration, usually in the upper strip.
    tolerance
        The value of ``|gap^2|`` below which the iteration is converged.
    max_iterations
        The maximum number of Newton iterations.

    Returns
    -------
        The crossing point.
    """

    z = complex(seed)
    j, k = pair

    reference = None

    if model.dimension != 2:
        reference = _sorted_eigenvalues(model.evaluate(z))[[j - 1, k - 1]]

    value = numpy.inf

    try:
        for iteration in range(1, max_iterations + 1):
            value, reference = _gap_squared(model, z, reference)

            if abs(value) <= tolerance:
                crossing = CrossingPoint(
                    location=z,
                    pair=pair,
                    derivative=_gap_squared_derivative(model, z, reference),
                    order_check=_order_check(model, z, reference),
                    residual=abs(value),
                    n_iterations=iteration,
                )

                _logger.debug(
                    f"found a crossing of {pair} at z={z:.10g} after {iteration} "
                    f"iterations"
                )

                return crossing

            derivative = _gap_squared_derivative(model, z, reference)

            if derivative == 0.0:
                break

            z = z - value / derivative

            if abs(z.imag) >= model.strip_halfwidth:
                raise CrossingOutsideStripError(z, model.strip_halfwidth)

    except ModelDomainError:
        raise CrossingOutsideStripError(z, model.strip_halfwidth)

    raise CrossingNotFoundError(seed, z, abs(value), max_iterations)


def find_crossings(
    model: "HamiltonianModel",
    pair: Tuple[int, int] = (1, 2),
    window: Tuple[float, float] = (-3.0, 3.0),
    n_real: int = 13,
    heights: Sequence[float] = (0.25, 0.5, 0.75),
) -> List[CrossingPoint]:
    """Runs ``find_crossing`` from a lattice of seeds in the upper strip and returns
    the distinct crossings found, ordered by their real part.

    Parameters
    ----------
    model
        The model of interest.
    pair
        The labels (j, k) of the eigenvalues which should cross.
    window
        The range of real parts of the seeds.
    n_real
        The number of seeds along the real direction.
    heights
        The imaginary parts of the seeds as fractions of the strip half-width.
    """

    crossings: List[CrossingPoint] = []

    seeds = [
        complex(real, height * model.strip_halfwidth)
        for height in heights
        for real in numpy.linspace(*window, n_real)
    ]

    for seed in seeds:
        try:
            crossing = find_crossing(model, pair, seed)
        except (CrossingNotFoundError, CrossingOutsideStripError):
            continue

        if crossing.location.imag <= 0.0:
            continue

        if any(
            abs(crossing.location - existing.location) < 1.0e-6
            for existing in crossings
        ):
            continue

        crossings.append(crossing)

    return sorted(crossings, key=lambda crossing: crossing.location.real)


def _check_enclosed_crossings(
    model: "HamiltonianModel",
    crossing: CrossingPoint,
    real_bounds: Tuple[float, float],
    top: float,
    n_seeds: int = 5,
):
    """Runs ``find_crossing`` from a lattice of seeds inside the rectangle
    ``real_bounds x (0, top)`` and raises if it converges to a second crossing of
    the same pair inside the rectangle."""

    location = complex(crossing.location)
    lower, upper = real_bounds

    seeds = [
        complex(real, imag)
        for imag in numpy.linspace(0.0, top, n_seeds + 2)[1:-1]
        for real in numpy.linspace(lower, upper, n_seeds + 2)[1:-1]
    ]

    for seed in seeds:
        try:
            other = find_crossing(model, crossing.pair, seed)
        except (CrossingNotFoundError, CrossingOutsideStripError):
            continue

        other_location = complex(other.location)

        if abs(other_location - location) < 1.0e-6:
            continue

        if (
            lower < other_location.real < upper
            and 0.0 < other_location.imag < top
        ):
            raise EnclosedCrossingError(location, other_location)


def crossing_loop(
    model: "HamiltonianModel",
    crossing: CrossingPoint,
    settings: Optional[LoopSettings] = None,
) -> ContourPath:
    """Builds a negatively oriented rectangle based on the real axis below a
    crossing point, which encircles it.

    The loop starts at ``Re z0``, runs left along the real axis, up, right above the
    crossing and back down to the real axis.

    Raises
    ------
    EnclosedCrossingError
        If another crossing of the same pair lies inside the loop.
    """

    settings = LoopSettings() if settings is None else settings

    location = complex(crossing.location)

    height = location.imag
    margin = settings.margin_fraction * min(height, model.strip_halfwidth - height)

    if margin <= 0.0:
        raise CrossingOutsideStripError(location, model.strip_halfwidth)

    base = location.real
    half_width = height

    top = height + margin

    _check_enclosed_crossings(
        model, crossing, (base - half_width, base + half_width), top
    )

    vertices = [
        base,
        base - half_width,
        base - half_width + 1.0j * top,
        base + half_width + 1.0j * top,
        base + half_width,
        base,
    ]

    return ContourPath.polygon(vertices, settings.samples_per_side)


def reflect_loop(loop: ContourPath) -> ContourPath:
    """Returns the Schwarz reflection of a path into the other half plane, which
    reverses the orientation of a loop."""

    vertices = None if loop.vertices is None else numpy.conjugate(loop.vertices)

    return ContourPath(
        samples=numpy.conjugate(loop.samples),
        closed=loop.closed,
        orientation=-loop.orientation,
        base=loop.base.conjugate(),
        vertices=vertices,
    )


def _check_inside_strip(model: "HamiltonianModel", path: ContourPath):
    largest_imaginary = float(numpy.max(numpy.abs(path.samples.imag)))

    if largest_imaginary >= model.strip_halfwidth:
        raise PathOutsideStripError(largest_imaginary, model.strip_halfwidth)


def _closure_label(
    initial: SpectralFrame, final: SpectralFrame, label: int
) -> Tuple[int, numpy.ndarray]:
    """Returns the label of the initial eigenvector which the continued eigenvector
    with ``label`` ends up parallel to, together with that continued vector."""

    vector = final.eigenvectors[:, final.column(label)]

    overlaps = numpy.abs(numpy.conjugate(initial.eigenvectors).T @ vector) / (
        numpy.linalg.norm(initial.eigenvectors, axis=0) * numpy.linalg.norm(vector)
    )

    return initial.labels[int(numpy.argmax(overlaps))], vector


def _trapezoid(values: numpy.ndarray, samples: numpy.ndarray) -> complex:
    return complex(numpy.sum(0.5 * (values[1:] + values[:-1]) * numpy.diff(samples)))


def loop_integral(
    model: "HamiltonianModel",
    loop: ContourPath,
    start_label: int,
    require_exchange: bool = True,
    settings: Optional[LoopSettings] = None,
) -> LoopIntegral:
    """Integrates a continued eigenvalue branch around a closed polygonal loop.

    The branch is continued sample to sample with ``continue_along``, the integral
    of each side is estimated with the trapezoid rule and the estimates are
    Romberg extrapolated as the number of samples is doubled.

    Parameters
    ----------
    model
        The model of interest.
    loop
        The closed polygonal loop.
    start_label
        The label j of the branch at the base of the loop.
    require_exchange
        Whether to raise an exception if the branch returns to itself. Otherwise
        the result is flagged with ``exchanged_with=None``.
    settings
        The refinement settings.

    Returns
    -------
        The contour integral of the branch.
    """

    settings = LoopSettings() if settings is None else settings

    if not loop.closed:
        raise ValueError("the loop integral requires a closed path")

    _check_inside_strip(model, loop)

    closure = {}

    def estimate(samples_per_side: int) -> complex:
        path = loop.resample(samples_per_side)
        frames = continue_along(model, path.samples)

        values = numpy.array(
            [frame.eigenvalues[frame.column(start_label)] for frame in frames]
        )
        closure["label"], _ = _closure_label(frames[0], frames[-1], start_label)

        return _trapezoid(values, path.samples)

    value, samples_per_side, change = _refine(
        estimate, settings, f"loop integral of e_{start_label}"
    )

    exchanged_with = closure["label"]

    if exchanged_with == start_label:
        if require_exchange:
            raise NoBranchExchangeError(start_label)

        exchanged_with = None

    return LoopIntegral(
        value=value,
        start_label=start_label,
        exchanged_with=exchanged_with,
        samples_per_side=samples_per_side,
        relative_change=change,
    )


def geometric_prefactor(
    model: "HamiltonianModel",
    loop: ContourPath,
    start_label: int = 1,
    settings: Optional[LoopSettings] = None,
) -> complex:
    """Computes the complex angle ``theta`` defined by transporting the eigenvector
    ``phi_j`` around a loop which exchanges it with ``phi_k``:

        phi_j(base | loop) = exp(-i theta) phi_k(base)

    The real axis gauge at the base follows the convention of ``eigen_frame``. The
    transport is that of ``gauge_transport`` and the overlap is Romberg
    extrapolated as the number of samples is doubled.

    Notes
    -----
    * Only ``Im theta`` (and so ``exp(2 Im theta)``) is independent of the gauge
      convention. The real part is returned in (-pi, pi].

    Parameters
    ----------
    model
        The model of interest.
    loop
        The closed polygonal loop, which should encircle a single crossing point.
    start_label
        The label j of the transported eigenvector.
    settings
        The refinement settings.

    Returns
    -------
        The complex angle ``theta``.
    """

    settings = LoopSettings() if settings is None else settings

    if not loop.closed:
        raise ValueError("the geometric prefactor requires a closed path")

    _check_inside_strip(model, loop)

    def estimate(samples_per_side: int) -> complex:
        path = loop.resample(samples_per_side)
        frames = gauge_transport(continue_along(model, path.samples))

        initial, final = frames[0], frames[-1]

        target_label, vector = _closure_label(initial, final, start_label)

        if target_label == start_label:
            raise NoBranchExchangeError(start_label)

        column = initial.column(target_label)
        overlap = initial.left_eigenvectors[column, :] @ vector

        residual = numpy.linalg.norm(
            vector - initial.eigenvectors[:, column] * overlap
        ) / numpy.linalg.norm(vector)

        if residual > _CLOSURE_TOLERANCE:
            raise ClosureNotProportionalError(start_label, target_label, residual)

        return overlap

    overlap, _, _ = _refine(
        estimate, settings, f"transported overlap of phi_{start_label}"
    )

    return complex(1.0j * numpy.log(overlap))


def _pair_differences(
    frames: Sequence[SpectralFrame], pair: Tuple[int, int]
) -> numpy.ndarray:
    j, k = pair

    return numpy.array(
        [
            frame.eigenvalues[frame.column(j)] - frame.eigenvalues[frame.column(k)]
            for frame in frames
        ]
    )


def dissipativity_check(
    model: "HamiltonianModel",
    path: ContourPath,
    pair: Tuple[int, int] = (1, 2),
    frame: Optional[SpectralFrame] = None,
) -> DissipativityReport:
    """Checks whether ``Im int (e_j - e_k) dz`` is non-decreasing along a path.

    Parameters
    ----------
    model
        The model of interest.
    path
        The path, typically running from -T to +T.
    pair
        The labels (j, k).
    frame
        The labelled frame at the first sample. By default a fresh frame is used,
        which is labelled in increasing order on the real axis.

    Returns
    -------
        The report, with the path dissipative if every trapezoid increment is at
        least -1e-10.
    """

    _check_inside_strip(model, path)

    frames = continue_along(model, path.samples, frame=frame)
    differences = _pair_differences(frames, pair)

    increments = (
        0.5 * (differences[1:] + differences[:-1]) * numpy.diff(path.samples)
    ).imag

    most_negative = float(numpy.min(increments))

    return DissipativityReport(
        dissipative=bool(most_negative >= _DISSIPATIVITY_TOLERANCE),
        max_violation=max(0.0, -most_negative),
        cumulative=numpy.concatenate([[0.0], numpy.cumsum(increments)]),
        pair=pair,
    )


def level_line(
    model: "HamiltonianModel",
    pair: Tuple[int, int],
    start: complex,
    length: float,
    step: float = 0.01,
    heading: Literal[-1, 1] = 1,
    frame: Optional[SpectralFrame] = None,
    tolerance: float = 1.0e-14,
    max_corrector_iterations: int = 10,
) -> ContourPath:
    """Traces a level line of ``Im int (e_j - e_k) dz``.

    Each step is predicted along ``conj(e_j - e_k)``, which keeps the integrand
    real to first order, and then corrected normal to that direction with the
    secant method until the trapezoid increment vanishes.

    Parameters
    ----------
    model
        The model of interest.
    pair
        The labels (j, k).
    start
        The first point of the line.
    length
        The (approximate) arc length to trace.
    step
        The arc length of each step.
    heading
        Whether to trace in the direction of increasing (+1) or decreasing (-1)
        real part.
    frame
        The labelled frame at ``start``. By default a fresh frame is used.
    tolerance
        The largest allowed magnitude of each increment.
    max_corrector_iterations
        The maximum number of secant iterations per step.

    Returns
    -------
        The sampled level line.
    """

    point = complex(start)
    frame = frame_at(model, point) if frame is None else frame
    difference = _pair_differences([frame], pair)[0]

    samples = [point]
    travelled = 0.0

    while travelled < length - 1.0e-12:
        h = min(step, length - travelled)

        if difference == 0.0:
            raise ValueError(f"the level line reached a crossing point at z={point}")

        direction = numpy.conjugate(difference) / abs(difference)
        direction = -direction if heading * direction.real < 0.0 else direction

        predicted = point + h * direction

        def increment(offset: float):
            candidate = predicted + offset * 1.0j * direction

            if abs(candidate.imag) >= model.strip_halfwidth:
                raise PathOutsideStripError(abs(candidate.imag), model.strip_halfwidth)

            candidate_frame = continue_along(
                model, [point, candidate], frame=frame
            )[-1]
            candidate_difference = _pair_differences([candidate_frame], pair)[0]

            value = (
                0.5 * (difference + candidate_difference) * (candidate - point)
            ).imag
            return value, candidate, candidate_frame, candidate_difference

        previous_offset, offset = 0.0, 1.0e-3 * h
        previous_value, *accepted = increment(previous_offset)

        if abs(previous_value) > tolerance:
            for _ in range(max_corrector_iterations):
                value, *accepted = increment(offset)

                if abs(value) <= tolerance or value == previous_value:
                    break

                previous_offset, offset = offset, offset - value * (
                    offset - previous_offset
                ) / (value - previous_value)
                previous_value = value

        point, frame, difference = accepted

        samples.append(point)
        travelled += h

    return ContourPath(samples=numpy.array(samples), base=complex(start))


def stokes_lines(
    model: "HamiltonianModel",
    crossing: CrossingPoint,
    reach: float = 5.0,
    step: float = 0.02,
    offset_fraction: float = 0.05,
) -> Tuple[ContourPath, ContourPath]:
    """Traces the two level lines of ``Im int_{z0} (e_j - e_k) dz = 0`` which leave
    a crossing point towards the left and towards the right. Together they form
    the limit of paths from -inf to +inf passing just above the crossing along
    which the imaginary part is constant.

    Near ``z0`` the integral behaves as ``(2 / 3) c (z - z0)^(3/2)`` with
    ``c^2 = d gap^2 / dz``, so the three lines leave ``z0`` at the angles where
    ``Im[c exp(3 i phi / 2)] = 0``. Each line is started a small distance from
    ``z0`` and traced with ``level_line``.

    Parameters
    ----------
    model
        The model of interest.
    crossing
        The crossing point.
    reach
        How far (in real part) from the crossing each line is traced.
    step
        The arc length of each tracing step.
    offset_fraction
        The distance from the crossing each line is started at, as a fraction of
        ``Im z0``.

    Returns
    -------
        The left and right lines, both ordered by increasing real part so that
        the left line ends and the right line starts next to the crossing.
    """

    location = complex(crossing.location)
    radius = offset_fraction * abs(location.imag)

    phase = numpy.angle(numpy.sqrt(complex(crossing.derivative)))
    angles = (numpy.arange(3) * numpy.pi - phase) / 1.5

    left_angle = angles[numpy.argmin(numpy.cos(angles))]
    right_angle = angles[numpy.argmax(numpy.cos(angles))]

    lines = []

    for angle, heading in ((left_angle, -1), (right_angle, 1)):
        start = location + radius * numpy.exp(1.0j * angle)

        frame = continue_along(model, [location.real, start])[-1]
        length = reach + 2.0 * abs(location.imag)

        lines.append(
            level_line(
                model, crossing.pair, start, length, step, heading=heading, frame=frame
            )
        )

    left, right = lines

    return (
        ContourPath(samples=left.samples[::-1], base=complex(left.samples[-1])),
        right,
    )


def loop_permutation(
    model: "HamiltonianModel",
    loop: ContourPath,
    settings: Optional[LoopSettings] = None,
) -> Tuple[int, ...]:
    """Returns, for each label in turn, the label of the branch it is continued into
    after one traversal of a closed loop."""

    settings = LoopSettings() if settings is None else settings

    if not loop.closed:
        raise ValueError("a monodromy requires a closed path")

    _check_inside_strip(model, loop)

    path = loop if loop.vertices is None else loop.resample(settings.samples_per_side)
    frames = continue_along(model, path.samples)

    return tuple(
        _closure_label(frames[0], frames[-1], label)[0] for label in frames[0].labels
    )
