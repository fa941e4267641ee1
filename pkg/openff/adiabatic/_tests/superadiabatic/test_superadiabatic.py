import logging

import numpy
import pytest

from openff.adiabatic.asymptotics import fit_decay_rate
from openff.adiabatic.models import coupled_pair
from openff.adiabatic.propagator import PropagatorSettings, transition_probability
from openff.adiabatic.spectral import grid_projectors
from openff.adiabatic.superadiabatic import (
    SampledHamiltonian,
    SuperadiabaticSettings,
    build_level,
    effective_transition,
    level_sequence,
    optimal_truncation,
    reduce_to_effective,
    superadiabatic_deviation,
    superadiabatic_transition,
    transition_history,
    uniform_grid,
    verify_intertwining,
)
from openff.adiabatic.superadiabatic.exceptions import GapClosureError
from openff.adiabatic.utilities.linalg import (
    dagger,
    hermiticity_defect,
    operator_norm,
)

PRECISE = PropagatorSettings(tolerance=1.0e-12)


def _log_slope(epsilons, values) -> float:
    return float(numpy.polyfit(numpy.log(epsilons), numpy.log(values), 1)[0])


@pytest.fixture(scope="module")
def grid():
    return uniform_grid((-3.0, 3.0))


def test_uniform_grid():
    grid = uniform_grid((0.0, 1.0), 0.3)

    assert len(grid) == 5
    assert grid[0] == 0.0
    assert grid[-1] == 1.0
    assert numpy.max(numpy.diff(grid)) <= 0.3

    assert len(uniform_grid((-3.0, 3.0))) == 1201


def test_uniform_grid_decreasing():
    with pytest.raises(ValueError, match="must be increasing"):
        uniform_grid((1.0, 0.0))


class TestBuildLevel:
    def test_zeroth_order(self, tanh_model, grid):
        level = build_level(tanh_model, 0.1, 0, grid)

        hamiltonians = tanh_model.evaluate(grid)

        assert level.q == 0
        assert numpy.allclose(level.hamiltonians, hamiltonians)
        assert numpy.allclose(level.projectors, grid_projectors(hamiltonians, {1}))

    def test_fixed_point(self, constant_model, grid):
        level = build_level(constant_model, 0.1, 3, grid)

        assert numpy.allclose(level.hamiltonians, constant_model.evaluate(grid))
        assert numpy.allclose(level.projector_derivatives, 0.0)
        assert level.defect_norm == 0.0

    def test_hermitian_projectors(self, tanh_model, grid):
        level = build_level(tanh_model, 0.1, 3, grid)

        projectors = level.projectors

        assert hermiticity_defect(level.hamiltonians) < 1.0e-10
        assert numpy.max(numpy.abs(projectors @ projectors - projectors)) < 1.0e-9
        assert level.hamiltonians.shape == (len(grid), 2, 2)

    def test_first_order_defect(self, tanh_model, grid):
        level = build_level(tanh_model, 0.05, 0, grid)
        following = build_level(tanh_model, 0.05, 1, grid)

        defects = operator_norm(following.hamiltonians - level.hamiltonians)

        assert numpy.max(defects) == pytest.approx(level.defect_norm)
        # the correction decays with the coupling away from the crossing
        assert defects[0] < 0.1 * defects[len(grid) // 2]
        assert level.defect_norm < 0.25

    def test_stencil_derivative(self, tanh_model, grid):
        level = build_level(tanh_model, 0.1, 0, grid)

        h = 1.0e-4

        for index in (100, 600, 1000):
            t = grid[index]
            forward, backward = grid_projectors(
                tanh_model.evaluate(numpy.array([t + h, t - h])), {1}
            )

            assert numpy.allclose(
                level.projector_derivatives[index],
                (forward - backward) / (2.0 * h),
                atol=1.0e-6,
            )

    def test_projectors_converge(self, tanh_model, grid):
        adiabatic = grid_projectors(tanh_model.evaluate(grid), {1})

        distances = []

        for epsilon in (0.1, 0.05, 0.025):
            level = build_level(tanh_model, epsilon, 2, grid)
            distances.append(numpy.max(operator_norm(level.projectors - adiabatic)))

        assert distances[0] > distances[1] > distances[2]

    def test_gap_closure(self, tanh_model, grid):
        with pytest.raises(GapClosureError, match="The spectral gap of H_1"):
            build_level(tanh_model, 0.1, 2, grid, gap_fraction=10.0)

    def test_negative_order(self, tanh_model, grid):
        with pytest.raises(ValueError, match="non-negative"):
            build_level(tanh_model, 0.1, -1, grid)

    def test_non_uniform_grid(self, tanh_model):
        with pytest.raises(ValueError, match="uniform"):
            build_level(tanh_model, 0.1, 1, numpy.array([0.0, 0.1, 0.3, 0.4, 0.5]))


def test_level_sequence(tanh_model, grid):
    defects = level_sequence(tanh_model, 0.05, 4, grid)

    assert len(defects) == 4
    assert defects[1] < defects[0]

    assert level_sequence(tanh_model, 0.1, 4, grid, gap_fraction=10.0) == [
        pytest.approx(build_level(tanh_model, 0.1, 0, grid).defect_norm)
    ]


class TestSuperadiabaticTransition:
    def test_zeroth_order(self, tanh_model):
        window = (-2.0, 2.0)

        probability = superadiabatic_transition(tanh_model, 0.1, 0, window)
        history = transition_history(tanh_model, 0.1, 0, window, [0.0, 2.0])

        assert probability > 0.0
        assert history[-1] == pytest.approx(probability, rel=1.0e-3)

    def test_adiabatic_order(self, tanh_model):
        epsilons = [0.1, 0.05, 0.035, 0.02]

        probabilities = [
            superadiabatic_transition(
                tanh_model, epsilon, 0, (2.0, 8.0), propagator_settings=PRECISE
            )
            for epsilon in epsilons
        ]

        assert _log_slope(epsilons, probabilities) == pytest.approx(2.0, abs=0.2)

    @pytest.mark.parametrize("q, expected_slope", [(1, 4.0), (2, 6.0)])
    def test_order(self, tanh_model, q, expected_slope):
        epsilons = [0.1, 0.05, 0.025]

        probabilities = [
            superadiabatic_transition(
                tanh_model, epsilon, q, (2.0, 8.0), propagator_settings=PRECISE
            )
            for epsilon in epsilons
        ]

        assert _log_slope(epsilons, probabilities) == pytest.approx(
            expected_slope, abs=0.5
        )

    def test_history_decreasing_times(self, tanh_model):
        with pytest.raises(ValueError, match="strictly increasing"):
            transition_history(tanh_model, 0.1, 1, (-2.0, 2.0), [1.0, 0.0])


class TestOptimalTruncation:
    def test_large_epsilon(self, tanh_model, grid, caplog):
        with caplog.at_level(logging.WARNING):
            truncation = optimal_truncation(tanh_model, 0.5, 6, grid)

        assert truncation.q_star == 0
        assert truncation.diverging
        assert truncation.level.q == 0

        # the gap of an intermediate Hamiltonian closes before q_max is reached
        assert 1 <= len(truncation.defect_norms) < 6
        assert "diverges from the first order" in caplog.text

    def test_gap_closure_excludes_last_level(self, tanh_model, grid, monkeypatch):
        levels = [
            build_level(tanh_model, 0.1, 0, grid).copy(update={"defect_norm": norm})
            for norm in (0.3, 0.2, 0.1)
        ]

        def iterate_levels(*_):
            yield from levels
            raise GapClosureError(3, 0.0, 0.1, 0.0)

        monkeypatch.setattr(
            "openff.adiabatic.superadiabatic._superadiabatic._iterate_levels",
            iterate_levels,
        )

        truncation = optimal_truncation(tanh_model, 0.1, 6, grid)

        # the defect of the last level is measured against a closed gap
        assert truncation.defect_norms == pytest.approx([0.3, 0.2, 0.1])
        assert truncation.q_star == 1
        assert not truncation.diverging

    def test_gap_closure_at_first_order(self, tanh_model, grid):
        settings = SuperadiabaticSettings(gap_fraction=10.0)
        truncation = optimal_truncation(tanh_model, 0.1, 4, grid, settings)

        assert len(truncation.defect_norms) == 1
        assert truncation.q_star == 0
        assert truncation.diverging

    def test_order_grows(self, tanh_model):
        grid = uniform_grid((-4.0, 4.0))

        coarse = optimal_truncation(tanh_model, 0.1, 12, grid)
        fine = optimal_truncation(tanh_model, 0.025, 12, grid)

        assert fine.q_star > coarse.q_star
        assert not fine.diverging

        assert fine.level.q == fine.q_star
        assert fine.defect_norms[fine.q_star] == min(fine.defect_norms)

    def test_transition_criterion(self, tanh_model, grid):
        settings = SuperadiabaticSettings(criterion="transition")
        truncation = optimal_truncation(tanh_model, 0.1, 3, grid, settings)

        assert truncation.q_star > 0

    def test_invalid_order(self, tanh_model, grid):
        with pytest.raises(ValueError, match="at least 1"):
            optimal_truncation(tanh_model, 0.1, 0, grid)


class TestIntertwining:
    def test_constant(self, constant_model):
        assert verify_intertwining(constant_model, 0.1, 2, (0.0, 2.0)) <= 1.0e-10

    def test_adiabatic(self, tanh_model):
        defect = verify_intertwining(
            tanh_model, 0.1, 0, (-3.0, 3.0), propagator_settings=PRECISE
        )
        assert defect <= 1.0e-6

    @pytest.mark.parametrize("q", [0, 1])
    def test_deviation_vanishes_adiabatically(self, tanh_model, q):
        # V_q - U is first order in epsilon for q <= 1
        deviations = [
            superadiabatic_deviation(
                tanh_model, epsilon, q, (-3.0, 3.0), propagator_settings=PRECISE
            )
            for epsilon in (0.1, 0.05, 0.025)
        ]

        assert deviations[0] > deviations[1] > deviations[2]


class TestSampledHamiltonian:
    def test_interpolates(self, tanh_model, grid):
        sampled = SampledHamiltonian(grid, tanh_model.evaluate(grid))

        assert sampled.dimension == 2
        nodes = grid[::50]
        assert numpy.allclose(sampled.evaluate(nodes), tanh_model.evaluate(nodes))

        between = numpy.array([0.0012, 1.3333])
        assert numpy.allclose(
            sampled.evaluate(between), tanh_model.evaluate(between), atol=1.0e-8
        )

    def test_out_of_range(self, tanh_model, grid):
        sampled = SampledHamiltonian(grid, tanh_model.evaluate(grid))

        with pytest.raises(ValueError, match="within the sampled interval"):
            sampled.evaluate([3.5])


class TestEffectiveReduction:
    def test_decoupled(self):
        model = coupled_pair(0.3, 0.0)
        grid = uniform_grid((-2.0, 2.0), 0.01)

        effective = reduce_to_effective(model, 0.1, 2, grid, initial_frame="canonical")

        assert effective.matrices.shape == (len(grid), 2, 2)
        assert numpy.allclose(effective.matrices, model.evaluate(grid)[:, :2, :2])

    def test_frames_orthonormal(self):
        model = coupled_pair(0.3, 0.1)
        effective = reduce_to_effective(model, 0.1, 1, uniform_grid((-2.0, 2.0), 0.01))

        overlaps = dagger(effective.frames) @ effective.frames
        assert numpy.allclose(overlaps, numpy.eye(2))

    def test_matches_full_model(self):
        model = coupled_pair(0.3, 0.1)
        epsilon = 0.05

        full = transition_probability(model, epsilon, 1, 2, tol=1.0e-10)

        window = (-full.truncation_time, full.truncation_time)

        effective = reduce_to_effective(model, epsilon, 1, uniform_grid(window))
        probability = effective_transition(effective, settings=PRECISE)

        assert probability == pytest.approx(full.probability, rel=0.05)

    def test_two_levels(self, tanh_model, grid):
        with pytest.raises(ValueError, match="at least three levels"):
            reduce_to_effective(tanh_model, 0.1, 1, grid)

    def test_unknown_initial_frame(self):
        model = coupled_pair(0.3, 0.1)

        with pytest.raises(ValueError, match="initial frame must be"):
            reduce_to_effective(
                model, 0.1, 1, uniform_grid((-1.0, 1.0), 0.01), initial_frame="diabatic"
            )


def test_settings_defaults():
    settings = SuperadiabaticSettings()

    assert settings.q_max == 12
    assert settings.criterion == "defect"


class TestExponentialEstimate:
    @pytest.fixture(scope="class")
    def truncations(self, tanh_model):
        grid = uniform_grid((-4.0, 4.0))

        return {
            epsilon: optimal_truncation(tanh_model, epsilon, 12, grid)
            for epsilon in (0.05, 0.04, 0.033, 0.025, 0.02)
        }

    def test_transition(self, tanh_model, truncations):
        samples = [
            (
                epsilon,
                superadiabatic_transition(
                    tanh_model,
                    epsilon,
                    truncation.q_star,
                    (-4.0, 4.0),
                    propagator_settings=PRECISE,
                ),
            )
            for epsilon, truncation in truncations.items()
        ]

        fit = fit_decay_rate(samples)

        assert fit.gamma_fit > 0.0
        assert fit.r_squared >= 0.99

    def test_deviation(self, tanh_model, truncations):
        samples = [
            (
                epsilon,
                superadiabatic_deviation(
                    tanh_model,
                    epsilon,
                    truncation.q_star,
                    (-4.0, 4.0),
                    propagator_settings=PRECISE,
                ),
            )
            for epsilon, truncation in truncations.items()
        ]

        fit = fit_decay_rate(samples)

        # q* is an integer, so the deviation decays along a staircase
        assert fit.gamma_fit > 0.0
        assert fit.r_squared >= 0.9
