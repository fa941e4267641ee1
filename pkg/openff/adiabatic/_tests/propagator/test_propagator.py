import numpy
import pytest

from openff.adiabatic.models import tanh_sweep, truncation_time
from openff.adiabatic.propagator import (
    AdiabaticGenerator,
    ConvergenceSettings,
    PropagatorSettings,
    adiabatic_propagate,
    coefficients,
    evolution_history,
    propagate,
    propagate_generator,
    transition_probability,
)
from openff.adiabatic.propagator.exceptions import (
    StepLimitExceededError,
    TruncationConvergenceError,
)
from openff.adiabatic.spectral import eigen_frame, grid_projectors
from openff.adiabatic.utilities.linalg import (
    dagger,
    hermiticity_defect,
    operator_norm,
)

EPSILONS = [0.1, 0.05, 0.025]


def _log_slope(epsilons, values) -> float:
    return float(numpy.polyfit(numpy.log(epsilons), numpy.log(values), 1)[0])


@pytest.fixture(scope="module")
def sweep_model():
    return tanh_sweep(1.0)


def test_constant_model(constant_model):
    result = propagate(constant_model, 0.1, 0.0, 1.0)

    expected = numpy.diag([numpy.exp(10.0j), numpy.exp(-10.0j)])

    assert numpy.allclose(result.U, expected, atol=1.0e-8)
    assert result.interval == (0.0, 1.0)
    assert result.unitarity_defect < 1.0e-10


def test_backwards(constant_model):
    forward = propagate(constant_model, 0.1, 0.0, 1.0)
    backward = propagate(constant_model, 0.1, 1.0, 0.0)

    assert numpy.allclose(backward.U @ forward.U, numpy.eye(2), atol=1.0e-8)


def test_time_reversal(tanh_model):
    forward = propagate(tanh_model, 0.1, -2.0, 2.0, tol=1.0e-11)
    backward = propagate(tanh_model, 0.1, 2.0, -2.0, tol=1.0e-11)

    assert numpy.allclose(backward.U, dagger(forward.U), atol=1.0e-7)


def test_empty_interval(lz_model):
    result = propagate(lz_model, 0.1, 0.3, 0.3)

    assert result.step_count == 0
    assert numpy.allclose(result.U, numpy.eye(2))


def test_unitarity(tanh_model):
    result = propagate(tanh_model, 0.05, -5.0, 5.0, tol=1.0e-10)

    assert result.unitarity_defect < 1.0e-8
    assert result.error_estimate < 1.0e-5
    assert result.step_count > 0

    assert result.step_times[0] == -5.0
    assert result.step_times[-1] == 5.0
    assert numpy.all(numpy.diff(result.step_times) > 0.0)


def test_step_bound(tanh_model):
    settings = PropagatorSettings(phase_resolution=0.5)
    result = propagate(tanh_model, 0.1, 0.0, 2.0, settings=settings)

    assert numpy.max(numpy.diff(result.step_times)) <= 0.05 + 1.0e-12


def test_tolerance_override(tanh_model):
    settings = PropagatorSettings(tolerance=1.0e-4)

    coarse = propagate(tanh_model, 0.1, -2.0, 2.0, settings=settings)
    fine = propagate(tanh_model, 0.1, -2.0, 2.0, tol=1.0e-11, settings=settings)

    assert fine.step_count > coarse.step_count


def test_step_limit(tanh_model):
    settings = PropagatorSettings(max_steps=10)

    with pytest.raises(StepLimitExceededError, match="exceeded the cap of 10 steps"):
        propagate(tanh_model, 0.01, -5.0, 5.0, settings=settings)


def test_evolution_history(tanh_model):
    times = [-2.0, -1.0, 0.5, 2.0]
    unitaries, result = evolution_history(tanh_model, 0.1, times)

    assert unitaries.shape == (4, 2, 2)
    assert numpy.allclose(unitaries[0], numpy.eye(2))
    assert numpy.allclose(unitaries[-1], result.U)

    # composition through an intermediate checkpoint
    partial = propagate(tanh_model, 0.1, 0.5, 2.0)
    assert numpy.allclose(partial.U @ unitaries[2], unitaries[-1], atol=1.0e-7)


class TestTransitionProbability:
    def test_landau_zener(self, lz_model):
        result = transition_probability(lz_model, 0.1, 1, 2, tol=1.0e-8)

        assert result.probability == pytest.approx(0.01969, rel=0.03)
        assert result.unitarity_defect < 1.0e-6

    def test_scattering_safe(self, sweep_model):
        result = transition_probability(sweep_model, 0.5, 1, 2)

        assert result.truncation_time == truncation_time(sweep_model, 1.0e-8)
        assert 0.0 < result.probability < 1.0

    def test_symmetry(self, sweep_model):
        forward = transition_probability(sweep_model, 0.5, 1, 2)
        backward = transition_probability(sweep_model, 0.5, 2, 1)

        assert forward.probability == pytest.approx(backward.probability, rel=1.0e-4)

    def test_probabilities_sum_to_one(self, sweep_model):
        stays = transition_probability(sweep_model, 0.5, 1, 1)
        leaves = transition_probability(sweep_model, 0.5, 1, 2)

        assert stays.probability + leaves.probability == pytest.approx(1.0)

    def test_truncation_not_converged(self, lz_model):
        convergence = ConvergenceSettings(
            initial_time=2.0, max_doublings=1, relative_tolerance=1.0e-12
        )

        with pytest.raises(TruncationConvergenceError, match="did not converge"):
            transition_probability(lz_model, 0.5, 1, 2, convergence=convergence)


class TestCoefficients:
    def test_constant_model(self, constant_model):
        trace = coefficients(
            constant_model, 0.1, numpy.array([1.0, 0.0]), numpy.linspace(0, 1, 11)
        )

        assert trace.coefficients.shape == (11, 2)
        assert trace.labels == (1, 2)
        assert numpy.allclose(trace.coefficients[:, 0], 1.0, atol=1.0e-8)
        assert numpy.allclose(trace.coefficients[:, 1], 0.0, atol=1.0e-8)
        assert numpy.allclose(trace.dynamical_phases[:, 0], -trace.times / 0.1)

    def test_norm(self, sweep_model):
        frame = eigen_frame(sweep_model.evaluate(-6.0), -6.0)
        initial_state = frame.eigenvectors[:, frame.column(1)]

        trace = coefficients(
            sweep_model, 0.1, initial_state, numpy.linspace(-6, 6, 25)
        )

        populations = numpy.abs(trace.coefficients) ** 2

        assert numpy.allclose(populations.sum(axis=1), 1.0, atol=1.0e-8)
        assert numpy.all(populations[:, 0] > 0.99)


def test_first_order_excitation(sweep_model):
    """The population which leaves the adiabatic level part way through the
    evolution is first order in epsilon."""

    excitations = []

    for epsilon in EPSILONS:
        result = propagate(sweep_model, epsilon, -10.0, 0.0, tol=1.0e-11)

        initial, final = grid_projectors(
            sweep_model.evaluate(numpy.array([-10.0, 0.0])), {1}
        )
        excitations.append(
            operator_norm((numpy.eye(2) - final) @ result.U @ initial)
        )

    assert _log_slope(EPSILONS, excitations) == pytest.approx(1.0, abs=0.15)


class TestAdiabaticEvolution:
    def test_generator_hermitian(self, sweep_model):
        generator = AdiabaticGenerator(sweep_model, {1}, 0.1)
        matrices = generator.evaluate(numpy.linspace(-2.0, 2.0, 9))

        assert matrices.shape == (9, 2, 2)
        assert hermiticity_defect(matrices) < 1.0e-10

    def test_intertwining(self, sweep_model):
        result = adiabatic_propagate(sweep_model, 0.1, -5.0, 5.0, {1}, tol=1.0e-11)

        assert result.intertwining_defect < 1.0e-6
        assert result.unitarity_defect < 1.0e-8

    def test_generic_generator(self, sweep_model):
        generator = AdiabaticGenerator(sweep_model, {1}, 0.1)

        direct = propagate_generator(generator, 0.1, -1.0, 1.0)
        adiabatic = adiabatic_propagate(sweep_model, 0.1, -1.0, 1.0, {1})

        assert numpy.allclose(direct.U, adiabatic.U)

    def test_adiabatic_theorem(self, sweep_model):
        deviations = []

        for epsilon in EPSILONS:
            exact = propagate(sweep_model, epsilon, -5.0, 5.0, tol=1.0e-11)
            adiabatic = adiabatic_propagate(
                sweep_model, epsilon, -5.0, 5.0, {1}, tol=1.0e-11
            )

            deviations.append(operator_norm(exact.U - adiabatic.U))

        assert _log_slope(EPSILONS, deviations) == pytest.approx(1.0, abs=0.2)
