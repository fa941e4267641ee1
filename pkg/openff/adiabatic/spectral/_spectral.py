import logging
from typing import TYPE_CHECKING, Collection, List, Optional, Sequence, Tuple, Union

import numpy
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from openff.adiabatic._pydantic import BaseModel, Field
from openff.adiabatic.spectral.exceptions import (
    AmbiguousMatchingError,
    ContinuationRefinementError,
    NonHermitianError,
    RichardsonConsistencyError,
)
from openff.adiabatic.utilities.linalg import dagger, hermiticity_defect
from openff.adiabatic.utilities.pydantic import Array, ComplexNumber

if TYPE_CHECKING:
    from openff.adiabatic.models import HamiltonianModel

_logger = logging.getLogger(__name__)

_AMBIGUITY_TOLERANCE = 1.0e-6


class SpectralFrame(BaseModel):
    """The eigenvalues and eigenvectors of ``H(z)`` at a single (possibly complex)
    time together with the labels which tie each column to the labelling in
    increasing order at t = -inf."""

    class Config:
        allow_mutation = False

    point: ComplexNumber = Field(..., description="The complex time z of the frame.")

    eigenvalues: Array[complex] = Field(
        ..., description="The eigenvalues e_j(z), one per column."
    )
    eigenvectors: Array[complex] = Field(
        ...,
        description="The right eigenvectors phi_j(z) stored as the columns of an "
        "(n, n) matrix.",
    )
    left_eigenvectors: Array[complex] = Field(
        ...,
        description="The left eigenvectors stored as the rows of an (n, n) matrix "
        "normalized such that left @ right = I. On the real axis these are the "
        "conjugate transposes of the right eigenvectors.",
    )

    labels: Tuple[int, ...] = Field(
        ..., description="The label of the eigenvalue stored in each column."
    )

    @property
    def dimension(self) -> int:
        return len(self.eigenvalues)

    @property
    def on_real_axis(self) -> bool:
        return self.point.imag == 0.0

    def column(self, label: int) -> int:
        """Returns the index of the column which stores the eigenpair with a given
        label."""
        return self.labels.index(label)


class Projector(BaseModel):
    """A spectral projector onto the span of a subset of eigenvectors."""

    class Config:
        allow_mutation = False

    matrix: Array[complex] = Field(..., description="The (n, n) projector matrix.")
    rank: int = Field(..., description="The rank of the projector.")


def _apply_phase_convention(vectors: numpy.ndarray) -> numpy.ndarray:
    """Multiplies each column by the phase which makes its largest-modulus entry
    real and positive, ties going to the lowest index."""

    indices = numpy.argmax(numpy.abs(vectors), axis=0)
    entries = vectors[indices, numpy.arange(vectors.shape[1])]

    return vectors * (numpy.abs(entries) / entries)[None, :]


def _is_hermitian_point(hamiltonian: numpy.ndarray, point: complex) -> bool:
    return point.imag == 0.0 and hermiticity_defect(hamiltonian) <= 1.0e-12 * max(
        1.0, float(numpy.max(numpy.abs(hamiltonian)))
    )


def _hermitian_eigensystem(
    hamiltonian: numpy.ndarray,
) -> Tuple[numpy.ndarray, numpy.ndarray]:
    hermitian = 0.5 * (hamiltonian + dagger(hamiltonian))

    if numpy.all(hermitian.imag == 0.0):
        values, vectors = scipy.linalg.eigh(hermitian.real)
    else:
        values, vectors = scipy.linalg.eigh(hermitian)

    return values.astype(complex), vectors.astype(complex)


def _general_eigensystem(
    hamiltonian: numpy.ndarray,
) -> Tuple[numpy.ndarray, numpy.ndarray]:
    values, vectors = scipy.linalg.eig(hamiltonian)
    vectors = vectors / numpy.linalg.norm(vectors, axis=0)[None, :]

    return values.astype(complex), vectors.astype(complex)


def eigen_frame(
    hamiltonian: numpy.ndarray, point: float = 0.0, tolerance: float = 1.0e-12
) -> SpectralFrame:
    """Diagonalizes a hermitian matrix, returning its eigenvalues in ascending order
    and orthonormal eigenvectors whose largest-modulus entries are real and
    positive.

    Parameters
    ----------
    hamiltonian
        The hermitian matrix with shape=(n, n).
    point
        The (real) time at which the matrix was evaluated.
    tolerance
        The largest allowed entry of ``H - H^dagger`` relative to the largest entry
        of ``H`` (or absolute if that is smaller than one).

    Returns
    -------
        The spectral frame labelled 1..n in increasing order.
    """

    hamiltonian = numpy.asarray(hamiltonian, dtype=complex)

    defect = hermiticity_defect(hamiltonian)
    allowed = tolerance * max(1.0, float(numpy.max(numpy.abs(hamiltonian))))

    if defect > allowed:
        raise NonHermitianError(defect, allowed)

    values, vectors = _hermitian_eigensystem(hamiltonian)
    vectors = _apply_phase_convention(vectors)

    return SpectralFrame(
        point=point,
        eigenvalues=values.real.astype(complex),
        eigenvectors=vectors,
        left_eigenvectors=dagger(vectors),
        labels=tuple(range(1, len(values) + 1)),
    )


def complex_frame(hamiltonian: numpy.ndarray, point: complex) -> SpectralFrame:
    """Diagonalizes the (generally non-hermitian) matrix ``H(z)`` at a complex time.
    The eigenpairs are ordered by increasing real (then imaginary) part, the right
    eigenvectors have unit norm and the left eigenvectors are biorthonormal to
    them.

    Notes
    -----
    * The ordering is only a starting convention - labels along a path should be
      obtained by continuing a frame from the real axis with ``continue_along``.
    """

    hamiltonian = numpy.asarray(hamiltonian, dtype=complex)

    values, vectors = _general_eigensystem(hamiltonian)
    order = numpy.lexsort((values.imag, values.real))

    vectors = _apply_phase_convention(vectors[:, order])

    return SpectralFrame(
        point=point,
        eigenvalues=values[order],
        eigenvectors=vectors,
        left_eigenvectors=numpy.linalg.inv(vectors),
        labels=tuple(range(1, len(values) + 1)),
    )


def frame_at(model: "HamiltonianModel", point: complex) -> SpectralFrame:
    """Returns a fresh (un-continued) frame of a model at a given time."""

    point = complex(point)
    hamiltonian = model.evaluate(point)

    if point.imag == 0.0:
        return eigen_frame(hamiltonian, point.real)

    return complex_frame(hamiltonian, point)


def _match_frame(
    previous: SpectralFrame, hamiltonian: numpy.ndarray, point: complex
) -> Tuple[SpectralFrame, float, Optional[AmbiguousMatchingError]]:
    """Diagonalizes ``hamiltonian`` and orders its eigenpairs to follow those of
    ``previous``.

    Returns
    -------
        The continued frame, the smallest normalized overlap between matched
        eigenvectors and, if the matching was ambiguous, the error describing it.
    """

    hermitian = _is_hermitian_point(hamiltonian, point)

    values, vectors = (
        _hermitian_eigensystem(hamiltonian)
        if hermitian
        else _general_eigensystem(hamiltonian)
    )

    previous_vectors = previous.eigenvectors / numpy.linalg.norm(
        previous.eigenvectors, axis=0
    )
    overlaps = numpy.abs(dagger(previous_vectors) @ vectors)

    rows, columns = linear_sum_assignment(-overlaps)
    columns = columns[numpy.argsort(rows)]

    ambiguity = None

    if len(values) > 1:
        for row in range(len(values)):
            ordered = numpy.sort(overlaps[row])[::-1]

            if ordered[0] - ordered[1] >= _AMBIGUITY_TOLERANCE:
                continue

            others = overlaps[row].copy()
            others[columns[row]] = -numpy.inf

            competitor = int(numpy.argmax(others))
            competing_row = int(numpy.flatnonzero(columns == competitor)[0])

            ambiguity = AmbiguousMatchingError(
                (previous.labels[row], previous.labels[competing_row]),
                (float(ordered[0]), float(ordered[1])),
                point,
            )
            break

    matched_vectors = vectors[:, columns]
    matched_values = values[columns]

    inner = numpy.sum(numpy.conjugate(previous.eigenvectors) * matched_vectors, axis=0)
    phases = numpy.ones_like(inner)
    nonzero = numpy.abs(inner) > 0.0
    phases[nonzero] = numpy.conjugate(inner[nonzero]) / numpy.abs(inner[nonzero])

    matched_vectors = matched_vectors * phases[None, :]

    frame = SpectralFrame(
        point=point,
        eigenvalues=matched_values.real.astype(complex)
        if hermitian
        else matched_values,
        eigenvectors=matched_vectors,
        left_eigenvectors=dagger(matched_vectors)
        if hermitian
        else numpy.linalg.inv(matched_vectors),
        labels=previous.labels,
    )

    worst_overlap = float(numpy.min(overlaps[numpy.arange(len(values)), columns]))

    return frame, worst_overlap, ambiguity


def continue_frame(
    previous: SpectralFrame,
    hamiltonian: numpy.ndarray,
    point: Optional[complex] = None,
) -> SpectralFrame:
    """Diagonalizes the next matrix along a path and reorders its eigenpairs so that
    each column maximizes its overlap with the same column of the previous frame.
    Each matched overlap is made real and positive and the labels are carried
    over.

    Parameters
    ----------
    previous
        The frame at the previous point along the path.
    hamiltonian
        The matrix ``H`` at the next point along the path.
    point
        The time of the next point. If not provided the time of the previous frame
        is re-used.

    Returns
    -------
        The continued frame.
    """

    point = previous.point if point is None else complex(point)

    frame, _, ambiguity = _match_frame(
        previous, numpy.asarray(hamiltonian, dtype=complex), point
    )

    if ambiguity is not None:
        raise ambiguity

    return frame


def _continue_to(
    model: "HamiltonianModel",
    previous: SpectralFrame,
    target: complex,
    min_overlap: float,
    max_halvings: int,
) -> SpectralFrame:
    pending = [target]
    current = previous

    smallest_step = abs(target - previous.point) / 2.0**max_halvings

    while len(pending) > 0:
        point = pending[-1]

        frame, worst_overlap, ambiguity = _match_frame(
            current, model.evaluate(point), point
        )

        if ambiguity is None and worst_overlap >= min_overlap:
            current = frame
            pending.pop()
            continue

        if abs(point - current.point) <= smallest_step:
            raise ContinuationRefinementError(previous.point, target, max_halvings)

        pending.append(0.5 * (current.point + point))

    return current


def continue_along(
    model: "HamiltonianModel",
    points: Sequence[complex],
    frame: Optional[SpectralFrame] = None,
    min_overlap: float = 0.75,
    max_halvings: int = 40,
) -> List[SpectralFrame]:
    """Continues the eigensystem of a model along a sequence of points, halving the
    step between points whenever the matched overlap drops below ``min_overlap``.

    Parameters
    ----------
    model
        The model whose eigensystem should be continued.
    points
        The ordered points along the path.
    frame
        The frame at the first point. If not provided, a fresh frame is computed,
        which on the real axis is labelled in increasing order.
    min_overlap
        The smallest acceptable normalized overlap between matched eigenvectors.
    max_halvings
        The maximum number of times a single step may be halved.

    Returns
    -------
        The continued frames at each of the requested points.
    """

    points = [complex(point) for point in points]

    frames = [frame_at(model, points[0]) if frame is None else frame]

    for point in points[1:]:
        frames.append(_continue_to(model, frames[-1], point, min_overlap, max_halvings))

    return frames


def gauge_transport(frames: Sequence[SpectralFrame]) -> List[SpectralFrame]:
    """Applies discrete parallel transport to a label-continuous sequence of frames.

    Each eigenvector ``phi_j(k + 1)`` is rescaled by a factor ``s`` (and its left
    partner by ``1 / s``) such that ``l_j(k) phi_j(k + 1) = l_j(k + 1) phi_j(k)``
    while ``l_j(k + 1) phi_j(k + 1) = 1``. On the real axis, where
    ``l_j = phi_j^dagger``, ``s`` is a pure phase which makes
    ``<phi_j(k)|phi_j(k + 1)>`` real and positive. Off the real axis the same rule
    is its analytic continuation. In the refinement limit this realizes
    ``<phi_j|phi_j'> = 0``.

    Parameters
    ----------
    frames
        The frames along the path, already label continuous.

    Returns
    -------
        The transported frames. The first frame is returned unchanged.
    """

    if len(frames) == 0:
        return []

    transported = [frames[0]]

    for frame in frames[1:]:
        previous = transported[-1]

        right = numpy.array(frame.eigenvectors, dtype=complex)
        left = numpy.array(frame.left_eigenvectors, dtype=complex)

        for column in range(frame.dimension):
            vector, co_vector = right[:, column].copy(), left[column, :].copy()

            forward = previous.left_eigenvectors[column, :] @ vector
            backward = co_vector @ previous.eigenvectors[:, column]

            scale = numpy.sqrt(backward / (forward * (co_vector @ vector)))

            if (scale * forward).real < 0.0:
                scale = -scale

            right[:, column] = vector * scale
            left[column, :] = co_vector / (scale * (co_vector @ vector))

        transported.append(
            SpectralFrame(
                point=frame.point,
                eigenvalues=frame.eigenvalues,
                eigenvectors=right,
                left_eigenvectors=left,
                labels=frame.labels,
            )
        )

    return transported


def _validate_labels(labels: Collection[int], dimension: int) -> List[int]:
    labels = sorted(set(labels))

    if len(labels) == 0 or labels[0] < 1 or labels[-1] > dimension:
        raise ValueError(f"labels must be a non-empty subset of 1..{dimension}")

    return labels


def spectral_projector(frame: SpectralFrame, labels: Collection[int]) -> Projector:
    """Builds the spectral projector ``sum_j phi_j l_j`` over a subset of labels,
    which on the real axis is the orthogonal projector ``sum_j phi_j phi_j^dagger``.
    """

    labels = _validate_labels(labels, frame.dimension)
    columns = [frame.column(label) for label in labels]

    matrix = (
        frame.eigenvectors[:, columns] @ frame.left_eigenvectors[columns, :]
    )

    return Projector(matrix=matrix, rank=len(columns))


def grid_projectors(
    hamiltonians: numpy.ndarray, labels: Collection[int]
) -> numpy.ndarray:
    """Builds the orthogonal spectral projectors of a stack of hermitian matrices
    onto the eigenvalues with the given labels in increasing order.

    Parameters
    ----------
    hamiltonians
        The hermitian matrices with shape=(n_points, n, n).
    labels
        The (one-based) labels of the eigenvalues to project onto.

    Returns
    -------
        The projectors with shape=(n_points, n, n).
    """

    hamiltonians = numpy.asarray(hamiltonians, dtype=complex)
    labels = _validate_labels(labels, hamiltonians.shape[-1])

    _, vectors = numpy.linalg.eigh(0.5 * (hamiltonians + dagger(hamiltonians)))
    selected = vectors[..., [label - 1 for label in labels]]

    return selected @ dagger(selected)


def projector_derivative_estimate(
    model: "HamiltonianModel",
    t: Union[float, numpy.ndarray],
    labels: Collection[int],
    h: float = 1.0e-4,
    tolerance: float = 1.0e-6,
) -> Tuple[numpy.ndarray, float]:
    """Estimates ``dP/dt`` of a spectral projector by Richardson extrapolating the
    central differences with steps ``h`` and ``h / 2``.

    Parameters
    ----------
    model
        The model of interest.
    t
        The real time (or array of times) at which to differentiate.
    labels
        The (one-based) labels which define the projector.
    h
        The larger of the two central difference steps.
    tolerance
        The largest allowed difference between the two central difference
        estimates, relative to the size of the derivative when that exceeds one.

    Returns
    -------
        The derivative with shape=``numpy.shape(t) + (n, n)`` and the largest
        estimated error.
    """

    t = numpy.asarray(t, dtype=float)

    offsets = numpy.array([-h, -0.5 * h, 0.5 * h, h])
    projectors = grid_projectors(model.evaluate(t[..., None] + offsets), labels)

    coarse = (projectors[..., 3, :, :] - projectors[..., 0, :, :]) / (2.0 * h)
    fine = (projectors[..., 2, :, :] - projectors[..., 1, :, :]) / h

    estimate = (4.0 * fine - coarse) / 3.0

    errors = numpy.max(numpy.abs(fine - coarse), axis=(-2, -1))
    allowed = tolerance * numpy.maximum(
        1.0, numpy.max(numpy.abs(estimate), axis=(-2, -1))
    )

    if numpy.any(errors > allowed):
        worst = numpy.unravel_index(numpy.argmax(errors - allowed), errors.shape)

        raise RichardsonConsistencyError(
            float(t[worst]), float(errors[worst]), float(allowed[worst])
        )

    return estimate, float(numpy.max(errors, initial=0.0))


def projector_derivative(
    model: "HamiltonianModel",
    t: Union[float, numpy.ndarray],
    labels: Collection[int],
    h: float = 1.0e-4,
    tolerance: float = 1.0e-6,
) -> numpy.ndarray:
    """Returns ``dP/dt`` of the spectral projector with the given labels. See
    ``projector_derivative_estimate`` for details."""

    estimate, error = projector_derivative_estimate(model, t, labels, h, tolerance)
    _logger.debug(f"dP/dt estimated to within {error:.3e}")

    return estimate
