"""Small dense linear algebra helpers shared across the framework."""
import numpy


def dagger(matrix: numpy.ndarray) -> numpy.ndarray:
    """Returns the conjugate transpose of a matrix (or of a stack of matrices)."""
    return numpy.conjugate(numpy.swapaxes(matrix, -1, -2))


def commutator(a: numpy.ndarray, b: numpy.ndarray) -> numpy.ndarray:
    """Returns ``[a, b] = ab - ba``, broadcasting over leading stack dimensions."""
    return a @ b - b @ a


def hermiticity_defect(matrix: numpy.ndarray) -> float:
    """Returns the largest absolute entry of ``H - H^dagger``."""
    return float(numpy.max(numpy.abs(matrix - dagger(matrix)), initial=0.0))


def unitarity_defect(matrix: numpy.ndarray) -> float:
    """Returns the spectral norm of ``U^dagger U - I``."""
    identity = numpy.eye(matrix.shape[-1])
    return float(numpy.linalg.norm(dagger(matrix) @ matrix - identity, ord=2))


def operator_norm(matrix: numpy.ndarray) -> numpy.ndarray:
    """Returns the spectral norm of a matrix, or of each matrix in a stack."""
    return numpy.linalg.norm(matrix, ord=2, axis=(-2, -1))


def hermitian_exponential(matrix: numpy.ndarray, scale) -> numpy.ndarray:
    """Computes ``exp(-i * scale * K)`` for a hermitian ``K`` through its
    eigendecomposition so that the result is unitary to machine precision.

    Parameters
    ----------
    matrix
        The hermitian generator ``K`` with shape=(n, n), or a stack of generators
        with shape=(m, n, n).
    scale
        The real factor multiplying the generator, e.g. ``h / epsilon``, or one
        factor per generator in the stack.
    """

    hermitian = 0.5 * (matrix + dagger(matrix))

    eigenvalues, eigenvectors = numpy.linalg.eigh(hermitian)
    scale = numpy.asarray(scale, dtype=float)[..., None]
    phases = numpy.exp(-1.0j * scale * eigenvalues)

    return (eigenvectors * phases[..., None, :]) @ dagger(eigenvectors)
