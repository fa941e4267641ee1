import numpy
import pytest

from openff.adiabatic.asymptotics import (
    fit_decay_rate,
    lz_exponent,
    relative_deviation,
    stokes_dissipativity,
    theorem1_estimate,
    theorem1prime_estimate,
)
from openff.adiabatic.asymptotics.exceptions import (
    DecayFitError,
    MultipleCrossingsError,
)
from openff.adiabatic.complexplane import find_crossing
from openff.adiabatic.models import (
    cascade_surrogate,
    complex_hermitian,
    three_level_cascade,
)
from openff.adiabatic.propagator import transition_probability


@pytest.fixture(scope="module")
def cascade():
    return three_level_cascade(0.1, -1.0, 1.0)


@pytest.mark.parametrize(
    "a, delta, expected",
    [(1.0, 0.5, -0.392699), (2.0, 0.5, -0.196350), (1.0, 0.0, 0.0)],
)
def test_lz_exponent(a, delta, expected):
    assert lz_exponent(a, delta) == pytest.approx(expected, abs=1.0e-6)


def test_lz_exponent_invalid_rate():
    with pytest.raises(ValueError, match="must be positive"):
        lz_exponent(0.0, 0.5)


def test_relative_deviation():
    assert relative_deviation(2.0, 1.5) == pytest.approx(0.25)


class TestFitDecayRate:
    def test_exact(self):
        epsilons = [0.1, 0.05, 0.025, 0.0125]
        samples = [(epsilon, 3.0 * numpy.exp(-0.8 / epsilon)) for epsilon in epsilons]

        fit = fit_decay_rate(samples)

        assert fit.gamma_fit == pytest.approx(0.4, rel=1.0e-10)
        assert fit.prefactor_fit == pytest.approx(3.0, rel=1.0e-8)
        assert fit.r_squared == pytest.approx(1.0, abs=1.0e-12)
        assert numpy.allclose(fit.residuals, 0.0, atol=1.0e-8)

    def test_sorted(self):
        samples = [(epsilon, numpy.exp(-1.0 / epsilon)) for epsilon in (1, 4, 2, 3)]
        fit = fit_decay_rate(samples)

        assert numpy.allclose(fit.epsilons, [4.0, 3.0, 2.0, 1.0])

    def test_too_few_samples(self):
        with pytest.raises(DecayFitError, match="At least four samples"):
            fit_decay_rate([(0.1, 0.1), (0.05, 0.01), (0.025, 0.001)])

    def test_non_positive_probability(self):
        samples = [(0.1, 0.1), (0.05, 0.01), (0.025, 0.0), (0.0125, 0.001)]

        with pytest.raises(DecayFitError, match="must be positive"):
            fit_decay_rate(samples)

    def test_error_floor(self):
        epsilons = [0.2, 0.1, 0.05, 0.04, 0.025, 0.0125]
        samples = [(epsilon, numpy.exp(-0.2 / epsilon)) for epsilon in epsilons]

        # exp(-0.2 / 0.025) ~ 3.4e-4 sits below 100 x 1e-5
        fit = fit_decay_rate(samples, error_floor=1.0e-5)

        assert numpy.allclose(fit.epsilons, [0.2, 0.1, 0.05, 0.04])
        assert fit.gamma_fit == pytest.approx(0.1)

        with pytest.raises(DecayFitError, match="found 2"):
            fit_decay_rate(samples, error_floor=1.0e-3)


class TestTheorem1:
    def test_landau_zener(self, lz_model):
        estimate = theorem1_estimate(lz_model, 0.1)

        assert estimate.exponent_per_eps == pytest.approx(-0.392699, abs=1.0e-6)
        assert estimate.log_prefactor == pytest.approx(0.0, abs=1.0e-6)
        assert estimate.value == pytest.approx(0.01969, rel=1.0e-3)

        assert estimate.regime == "asymptotic"
        assert len(estimate.components) == 1
        assert estimate.components[0].start_label == 1

    def test_value(self, lz_model):
        estimate = theorem1_estimate(lz_model, 0.05)

        assert estimate.value == pytest.approx(
            numpy.exp(estimate.log_prefactor + estimate.exponent_per_eps / 0.05)
        )

    def test_agrees_with_integrator(self, tanh_model):
        epsilon = 0.05

        estimate = theorem1_estimate(tanh_model, epsilon)
        numeric = transition_probability(tanh_model, epsilon, 1, 2, tol=1.0e-10)

        assert estimate.log_prefactor == pytest.approx(0.0, abs=1.0e-6)
        assert relative_deviation(numeric.probability, estimate.value) <= 5 * epsilon

    def test_multiple_crossings(self, lz_model, monkeypatch):
        crossing = find_crossing(lz_model, (1, 2), 0.4j)

        monkeypatch.setattr(
            "openff.adiabatic.asymptotics._asymptotics.find_crossings",
            lambda *_: [crossing, crossing],
        )

        with pytest.raises(MultipleCrossingsError, match="found 2"):
            theorem1_estimate(lz_model, 0.1)


def test_stokes_dissipativity(lz_model):
    crossing = find_crossing(lz_model, (1, 2), 0.4j)
    dissipative, reports = stokes_dissipativity(lz_model, crossing, 3.0)

    assert dissipative
    assert len(reports) == 2
    assert all(report.max_violation <= 1.0e-10 for report in reports)


class TestTheorem1Prime:
    def test_components(self, cascade):
        estimate = theorem1prime_estimate(cascade, 0.04)

        assert len(estimate.components) == 2
        assert [component.crossing.pair for component in estimate.components] == [
            (1, 2),
            (2, 3),
        ]
        assert [component.start_label for component in estimate.components] == [1, 2]
        assert all(
            component.exponent_per_eps < 0.0 for component in estimate.components
        )

    def test_surrogates(self, cascade):
        estimate = theorem1prime_estimate(cascade, 0.04)

        for component, crossing in zip(estimate.components, (0, 1)):
            surrogate = theorem1_estimate(cascade_surrogate(cascade, crossing), 0.04)

            assert component.exponent_per_eps == pytest.approx(
                surrogate.exponent_per_eps, rel=0.1
            )

    def test_weak_coupling_limit(self, cascade):
        exponents = [
            theorem1prime_estimate(cascade, 0.1, delta=delta).exponent_per_eps
            for delta in (0.1, 0.05, 0.025)
        ]

        assert exponents[0] < exponents[1] < exponents[2] < 0.0

        estimate = theorem1prime_estimate(cascade, 0.1, delta=0.025)
        assert estimate.value > theorem1prime_estimate(cascade, 0.1).value

    def test_diabatic_limit(self, cascade):
        estimates = [
            theorem1prime_estimate(cascade, 0.05, delta=delta)
            for delta in (0.1, 0.05, 0.025)
        ]
        values = [estimate.value for estimate in estimates]

        assert values[0] < values[1] < values[2] < 1.0
        # the exponent closes like delta^2
        assert numpy.log(values[2]) > numpy.log(values[0]) / 8.0

        prefactors = [abs(estimate.log_prefactor) for estimate in estimates]
        assert prefactors[2] <= prefactors[0] + 1.0e-6

    def test_agrees_with_integrator(self, cascade):
        epsilon = 0.04

        estimate = theorem1prime_estimate(cascade, epsilon)
        numeric = transition_probability(cascade, epsilon, 1, 3, tol=1.0e-10)

        expected = estimate.log_prefactor + estimate.exponent_per_eps / epsilon

        assert numpy.log(numeric.probability) == pytest.approx(expected, rel=0.05)


class TestLandauZenerSweep:
    @pytest.fixture(scope="class")
    def samples(self, lz_model):
        results = {
            epsilon: transition_probability(lz_model, epsilon, 1, 2, tol=1.0e-10)
            for epsilon in (0.1, 0.08, 0.06, 0.05, 0.04)
        }
        return [(epsilon, result.probability) for epsilon, result in results.items()]

    def test_exponent(self, samples):
        fit = fit_decay_rate(samples)

        assert 2.0 * fit.gamma_fit == pytest.approx(-lz_exponent(1.0, 0.5), rel=0.03)
        assert 0.8 <= fit.prefactor_fit <= 1.25
        assert fit.r_squared >= 0.99

    def test_point_value(self, samples):
        probabilities = dict(samples)
        assert probabilities[0.1] == pytest.approx(0.01969, rel=0.03)


def test_twisted_prefactor():
    model = complex_hermitian(1.0, 0.3, 0.2)
    epsilons = numpy.array([0.05, 0.04, 0.033, 0.029, 0.025])

    estimate = theorem1_estimate(model, 0.05)
    assert abs(estimate.log_prefactor) > 1.0e-6

    probabilities = numpy.array(
        [
            transition_probability(model, epsilon, 1, 2, tol=1.0e-10).probability
            for epsilon in epsilons
        ]
    )

    fit = fit_decay_rate(list(zip(epsilons, probabilities)))

    assert 2.0 * fit.gamma_fit == pytest.approx(-estimate.exponent_per_eps, rel=0.03)

    # P exp(-exponent / epsilon) = prefactor (1 + O(epsilon))
    scaled = probabilities * numpy.exp(-estimate.exponent_per_eps / epsilons)
    _, prefactor = numpy.polyfit(epsilons, scaled, 1)

    assert prefactor == pytest.approx(numpy.exp(estimate.log_prefactor), rel=0.1)
