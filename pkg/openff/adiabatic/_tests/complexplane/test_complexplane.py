import numpy
import pytest

from openff.adiabatic._pydantic import ValidationError
from openff.adiabatic.complexplane import (
    ContourPath,
    LoopSettings,
    crossing_loop,
    dissipativity_check,
    find_crossing,
    find_crossings,
    geometric_prefactor,
    level_line,
    loop_integral,
    loop_permutation,
    reflect_loop,
    stokes_lines,
)
from openff.adiabatic.complexplane.exceptions import (
    CrossingNotFoundError,
    EnclosedCrossingError,
    NoBranchExchangeError,
    PathOutsideStripError,
)
from openff.adiabatic.models import complex_hermitian
from openff.adiabatic.spectral import continue_along

# -i pi delta^2 / (4 a) for a = 1, delta = 0.5
LZ_LOOP_INTEGRAL = -0.25j * numpy.pi * 0.25


@pytest.fixture(scope="module")
def twisted_model():
    return complex_hermitian(1.0, 0.3, 0.2)


@pytest.fixture(scope="module")
def lz_crossing(lz_model):
    return find_crossing(lz_model, (1, 2), 0.4j)


class TestContourPath:
    def test_polygon(self):
        path = ContourPath.polygon([0.0, 1.0, 1.0 + 1.0j], 4)

        assert not path.closed
        assert path.orientation == 0
        assert len(path.samples) == 9
        assert path.samples_per_side == 4
        assert numpy.isclose(path.samples[4], 1.0)

    @pytest.mark.parametrize(
        "vertices, orientation",
        [
            ([0.0, 1.0, 1.0 + 1.0j, 1.0j, 0.0], 1),
            ([0.0, 1.0j, 1.0 + 1.0j, 1.0, 0.0], -1),
        ],
    )
    def test_orientation(self, vertices, orientation):
        path = ContourPath.polygon(vertices, 8)

        assert path.closed
        assert path.orientation == orientation

    def test_resample(self):
        path = ContourPath.polygon([0.0, 1.0, 1.0 + 1.0j, 0.0], 4).resample(16)

        assert path.samples_per_side == 16
        assert len(path.samples) == 3 * 16 + 1

    def test_repeated(self):
        loop = ContourPath.polygon([0.0, 1.0, 1.0 + 1.0j, 0.0], 4)
        twice = loop.repeated(2)

        assert twice.closed
        assert len(twice.vertices) == 7
        assert twice.orientation == loop.orientation

    def test_reflect(self, lz_model, lz_crossing):
        loop = crossing_loop(lz_model, lz_crossing)
        reflected = reflect_loop(loop)

        assert reflected.orientation == -loop.orientation
        assert numpy.allclose(reflected.samples, numpy.conjugate(loop.samples))

    def test_open_path_orientation(self):
        with pytest.raises(ValidationError, match="only closed paths"):
            ContourPath(samples=numpy.array([0.0, 1.0]), base=0.0, orientation=1)

    def test_unclosed_loop(self):
        with pytest.raises(ValidationError, match="must agree"):
            ContourPath(samples=numpy.array([0.0, 1.0]), base=0.0, closed=True)

    def test_resample_sampled_path(self):
        path = ContourPath(samples=numpy.array([0.0, 1.0]), base=0.0)

        with pytest.raises(ValueError, match="only polygonal paths"):
            path.resample(4)


class TestFindCrossing:
    def test_landau_zener(self, lz_crossing):
        assert numpy.isclose(lz_crossing.location, 0.5j, atol=1.0e-10)
        assert lz_crossing.pair == (1, 2)
        assert lz_crossing.residual <= 1.0e-12
        assert lz_crossing.order_check == pytest.approx(1.0, abs=0.05)

    def test_tanh_sweep(self, tanh_model):
        crossing = find_crossing(tanh_model, (1, 2), 0.3j)

        assert numpy.isclose(crossing.location, 1.0j * numpy.arctan(0.3), atol=1e-10)
        assert crossing.order_check == pytest.approx(1.0, abs=0.05)

    def test_twisted(self, twisted_model):
        crossing = find_crossing(twisted_model, (1, 2), 0.3j)

        # tanh^2 z = -(delta^2 + b^2) / (1 - b^2)
        expected = 1.0j * numpy.arctan(numpy.sqrt(0.13 / 0.96))

        assert numpy.isclose(crossing.location, expected, atol=1.0e-10)
        assert crossing.order_check == pytest.approx(1.0, abs=0.05)
        assert abs(crossing.derivative) > 0.0

    def test_not_converged(self, lz_model):
        with pytest.raises(CrossingNotFoundError, match="within 1 iterations"):
            find_crossing(lz_model, (1, 2), 0.1 + 0.1j, max_iterations=1)

    def test_find_crossings(self, tanh_model):
        crossings = find_crossings(tanh_model)

        assert len(crossings) == 1
        assert numpy.isclose(crossings[0].location, 1.0j * numpy.arctan(0.3))


class TestLoopIntegral:
    def test_crossing_loop(self, lz_model, lz_crossing):
        loop = crossing_loop(lz_model, lz_crossing)

        assert loop.closed
        assert loop.orientation == -1
        assert numpy.isclose(loop.base, 0.0)
        assert numpy.max(loop.samples.imag) < lz_model.strip_halfwidth

    def test_enclosed_crossing(self, lz_model, lz_crossing, monkeypatch):
        other = lz_crossing.copy(update={"location": lz_crossing.location - 0.2j})

        monkeypatch.setattr(
            "openff.adiabatic.complexplane._complexplane.find_crossing",
            lambda *_, **__: other,
        )

        with pytest.raises(EnclosedCrossingError, match="also encloses"):
            crossing_loop(lz_model, lz_crossing)

    def test_landau_zener(self, lz_model, lz_crossing):
        result = loop_integral(lz_model, crossing_loop(lz_model, lz_crossing), 1)

        assert numpy.isclose(result.value, LZ_LOOP_INTEGRAL, atol=1.0e-7)
        assert result.exchanged_with == 2
        assert result.relative_change <= 1.0e-8

    def test_reflection(self, lz_model, lz_crossing):
        loop = reflect_loop(crossing_loop(lz_model, lz_crossing))
        result = loop_integral(lz_model, loop, 1)

        assert numpy.isclose(result.value, numpy.conjugate(LZ_LOOP_INTEGRAL), atol=1e-7)

    def test_doubled_loop(self, lz_model, lz_crossing):
        loop = crossing_loop(lz_model, lz_crossing)

        first = loop_integral(lz_model, loop, 1).value
        second = loop_integral(lz_model, loop, 2).value

        doubled = loop_integral(lz_model, loop.repeated(2), 1, require_exchange=False)

        # two traversals return the branch to itself through its partner
        assert doubled.exchanged_with is None
        assert numpy.isclose(doubled.value, first + second, atol=1.0e-7)
        assert numpy.isclose(second, -first, atol=1.0e-7)

    def test_homotopy_invariance(self, tanh_model):
        crossing = find_crossing(tanh_model, (1, 2), 0.3j)

        values = [
            loop_integral(
                tanh_model,
                crossing_loop(tanh_model, crossing, LoopSettings(margin_fraction=f)),
                1,
            ).value
            for f in (0.3, 0.6)
        ]

        assert numpy.isclose(values[0], values[1], atol=1.0e-7)

    def test_no_crossing(self, lz_model):
        loop = ContourPath.polygon([3.0, 4.0, 4.0 + 0.2j, 3.0 + 0.2j, 3.0], 16)

        result = loop_integral(lz_model, loop, 1, require_exchange=False)

        assert result.exchanged_with is None
        assert abs(result.value) < 1.0e-10

        with pytest.raises(NoBranchExchangeError, match="returned to itself"):
            loop_integral(lz_model, loop, 1)

    def test_open_path(self, lz_model):
        path = ContourPath.polygon([0.0, 1.0], 4)

        with pytest.raises(ValueError, match="closed path"):
            loop_integral(lz_model, path, 1)

    def test_outside_strip(self, lz_model):
        loop = ContourPath.polygon([0.0, 1.0, 1.0 + 1.5j, 0.0], 4)

        with pytest.raises(PathOutsideStripError, match="outside of the strip"):
            loop_integral(lz_model, loop, 1)


class TestGeometricPrefactor:
    def test_real_symmetric_lz(self, lz_model, lz_crossing):
        theta = geometric_prefactor(lz_model, crossing_loop(lz_model, lz_crossing))
        assert abs(theta.imag) < 1.0e-7

    def test_real_symmetric_tanh(self, tanh_model):
        crossing = find_crossing(tanh_model, (1, 2), 0.3j)
        theta = geometric_prefactor(tanh_model, crossing_loop(tanh_model, crossing))

        assert abs(theta.imag) < 1.0e-7
        assert -numpy.pi < theta.real <= numpy.pi

    def test_twisted(self, twisted_model):
        crossing = find_crossing(twisted_model, (1, 2), 0.3j)

        thetas = [
            geometric_prefactor(
                twisted_model,
                crossing_loop(twisted_model, crossing, LoopSettings(margin_fraction=f)),
            )
            for f in (0.3, 0.6)
        ]

        assert abs(thetas[0].imag) > 1.0e-6
        assert thetas[0].imag == pytest.approx(thetas[1].imag, abs=1.0e-6)

    def test_no_crossing(self, lz_model):
        loop = ContourPath.polygon([3.0, 4.0, 4.0 + 0.2j, 3.0 + 0.2j, 3.0], 16)

        with pytest.raises(NoBranchExchangeError):
            geometric_prefactor(lz_model, loop)


class TestLoopPermutation:
    def test_single(self, lz_model, lz_crossing):
        loop = crossing_loop(lz_model, lz_crossing)
        assert loop_permutation(lz_model, loop) == (2, 1)

    def test_twice(self, lz_model, lz_crossing):
        loop = crossing_loop(lz_model, lz_crossing).repeated(2)
        assert loop_permutation(lz_model, loop) == (1, 2)

    def test_no_crossing(self, lz_model):
        loop = ContourPath.polygon([3.0, 4.0, 4.0 + 0.2j, 3.0 + 0.2j, 3.0], 16)
        assert loop_permutation(lz_model, loop) == (1, 2)


class TestDissipativity:
    def test_real_axis(self, tanh_model):
        path = ContourPath(samples=numpy.linspace(-5.0, 5.0, 201) + 0.0j, base=-5.0)

        report = dissipativity_check(tanh_model, path)

        assert report.dissipative
        assert report.max_violation == 0.0
        assert numpy.allclose(report.cumulative, 0.0)

    def test_straight_path_above_crossing(self, lz_model):
        samples = numpy.linspace(-3.0, 3.0, 301) + 0.6j
        path = ContourPath(samples=samples, base=complex(samples[0]))

        report = dissipativity_check(lz_model, path)

        assert report.pair == (1, 2)
        assert report.cumulative.shape == (301,)
        assert report.max_violation >= 0.0

    def test_outside_strip(self, lz_model):
        path = ContourPath(samples=numpy.array([-1.0 + 1.5j, 1.0 + 1.5j]), base=-1.0)

        with pytest.raises(PathOutsideStripError):
            dissipativity_check(lz_model, path)

    def test_level_line(self, lz_model):
        start = -2.0 + 0.2j
        frame = continue_along(lz_model, [start.real, start])[-1]

        line = level_line(lz_model, (1, 2), start, 0.5, frame=frame)
        report = dissipativity_check(lz_model, line, (1, 2), frame)

        assert report.dissipative
        assert report.max_violation <= 1.0e-10
        assert numpy.allclose(report.cumulative, 0.0, atol=1.0e-10)

    def test_stokes_lines(self, lz_model, lz_crossing):
        left, right = stokes_lines(lz_model, lz_crossing, reach=3.0)

        assert left.samples[0].real <= -3.0
        assert right.samples[-1].real >= 3.0

        for line in (left, right):
            start = complex(line.samples[0])
            frame = continue_along(lz_model, [start.real, start])[-1]

            report = dissipativity_check(lz_model, line, (1, 2), frame)

            assert report.dissipative
            assert report.max_violation <= 1.0e-10
