"""The operations an experiment configuration can run."""
import functools
import logging
from multiprocessing import Pool
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy
from tqdm import tqdm

import openff.adiabatic
from openff.adiabatic.asymptotics import (
    AsymptoticEstimate,
    fit_decay_rate,
    relative_deviation,
    stokes_dissipativity,
    theorem1_estimate,
    theorem1prime_estimate,
)
from openff.adiabatic.asymptotics.exceptions import DecayFitError
from openff.adiabatic.cli.config import ExperimentConfig
from openff.adiabatic.cli.exceptions import ConfigValidationError, SweepPointError
from openff.adiabatic.cli.output import (
    config_hash,
    model_parameters,
    write_manifest,
    write_table,
)
from openff.adiabatic.complexplane import (
    CrossingPoint,
    crossing_loop,
    find_crossing,
    find_crossings,
    geometric_prefactor,
    loop_integral,
)
from openff.adiabatic.propagator import coefficients, transition_probability
from openff.adiabatic.spectral import eigen_frame
from openff.adiabatic.superadiabatic import (
    level_sequence,
    optimal_truncation,
    superadiabatic_transition,
    uniform_grid,
)
from openff.adiabatic.utilities.exceptions import AdiabaticException

_logger = logging.getLogger(__name__)

Table = Tuple[List[str], List[List[Any]], Optional[Dict[str, float]]]


def _guarded(
    epsilon: float, function: Callable, config: ExperimentConfig
) -> Tuple[Optional[List[Any]], Optional[str]]:
    """Runs one point of a sweep, returning the error message in place of raising
    so that it crosses the process boundary intact."""

    try:
        return function(epsilon, config), None
    except AdiabaticException as error:
        return None, str(error)


def _map_epsilons(
    function: Callable, config: ExperimentConfig, n_jobs: int
) -> List[List[Any]]:
    """Evaluates ``function(epsilon, config)`` for each epsilon in the grid across
    a pool of processes. The rows are returned in the order of the grid."""

    epsilons = config.epsilon_grid

    with Pool(processes=n_jobs) as pool:
        results = list(
            tqdm(
                pool.imap(
                    functools.partial(_guarded, function=function, config=config),
                    epsilons,
                ),
                total=len(epsilons),
            )
        )

    rows = []

    for epsilon, (row, message) in zip(epsilons, results):
        if message is not None:
            raise SweepPointError(epsilon, message)

        rows.append(row)

    return rows


def _probability_column(config: ExperimentConfig) -> str:
    return f"P{config.to_label}{config.from_label}"


def _transition_row(epsilon: float, config: ExperimentConfig) -> List[Any]:
    result = transition_probability(
        config.model,
        epsilon,
        config.from_label,
        config.to_label,
        settings=config.propagator,
        convergence=config.convergence,
    )
    _logger.info(f"epsilon={epsilon} P={result.probability:.6e}")

    return [
        epsilon,
        result.probability,
        result.truncation_time,
        result.unitarity_defect,
        result.error_estimate,
    ]


def _decay_fit(rows: Sequence[Sequence[Any]], error_floor: float) -> Optional[dict]:
    try:
        fit = fit_decay_rate([(row[0], row[1]) for row in rows], error_floor)
    except DecayFitError as error:
        _logger.warning(f"the decay rate could not be fit: {error}")
        return None

    return {
        "gamma_fit": fit.gamma_fit,
        "prefactor_fit": fit.prefactor_fit,
        "r_squared": fit.r_squared,
    }


def simulate(config: ExperimentConfig, n_jobs: int) -> Table:
    """Either traces the populations of the adiabatic levels across ``window``,
    or computes a single scattering transition probability."""

    epsilon = config.epsilon_grid[0]

    if config.window is None:
        row = _transition_row(epsilon, config)

        columns = [
            "epsilon",
            _probability_column(config),
            "T_used",
            "unitarity_defect",
            "error_estimate",
        ]
        return columns, [row], None

    times = numpy.linspace(*config.window, config.n_times)

    frame = eigen_frame(config.model.evaluate(times[0]), times[0])
    initial_state = frame.eigenvectors[:, frame.column(config.from_label)]

    trace = coefficients(
        config.model, epsilon, initial_state, times, settings=config.propagator
    )
    populations = numpy.abs(trace.coefficients) ** 2

    columns = ["t"] + [f"population_{label}" for label in trace.labels]
    rows = [[t, *row] for t, row in zip(times, populations)]

    return columns, rows, None


def sweep(config: ExperimentConfig, n_jobs: int) -> Table:
    """Computes the scattering transition probability across the epsilon grid
    and fits its decay rate."""

    rows = _map_epsilons(_transition_row, config, n_jobs)

    columns = [
        "epsilon",
        _probability_column(config),
        "T_used",
        "unitarity_defect",
        "error_estimate",
    ]
    return columns, rows, _decay_fit(rows, config.propagator.tolerance)


def _crossings(config: ExperimentConfig) -> List[CrossingPoint]:
    if config.seed is not None:
        return [find_crossing(config.model, config.pair, config.seed)]

    return find_crossings(config.model, config.pair)


def crossing(config: ExperimentConfig, n_jobs: int) -> Table:
    """Locates the crossing points of the configured pair of eigenvalues."""

    columns = ["z0_real", "z0_imag", "residual", "order_check", "n_iterations"]
    rows = [
        [
            point.location.real,
            point.location.imag,
            point.residual,
            point.order_check,
            point.n_iterations,
        ]
        for point in _crossings(config)
    ]

    return columns, rows, None


def loop_integral_table(config: ExperimentConfig, n_jobs: int) -> Table:
    """Integrates the lower eigenvalue of the pair around a loop enclosing each
    crossing point."""

    columns = [
        "z0_real",
        "z0_imag",
        "integral_real",
        "integral_imag",
        "exponent_per_eps",
        "exchanged_with",
        "samples_per_side",
    ]
    rows = []

    for point in _crossings(config):
        loop = crossing_loop(config.model, point, config.loop)
        integral = loop_integral(
            config.model, loop, config.pair[0], settings=config.loop
        )

        rows.append(
            [
                point.location.real,
                point.location.imag,
                integral.value.real,
                integral.value.imag,
                2.0 * integral.value.imag,
                integral.exchanged_with,
                integral.samples_per_side,
            ]
        )

    return columns, rows, None


def prefactor(config: ExperimentConfig, n_jobs: int) -> Table:
    """Computes the geometric angle of the loop around each crossing point."""

    columns = ["z0_real", "z0_imag", "theta_real", "theta_imag", "prefactor"]
    rows = []

    for point in _crossings(config):
        loop = crossing_loop(config.model, point, config.loop)
        theta = geometric_prefactor(config.model, loop, config.pair[0], config.loop)

        rows.append(
            [
                point.location.real,
                point.location.imag,
                theta.real,
                theta.imag,
                numpy.exp(2.0 * theta.imag),
            ]
        )

    return columns, rows, None


def dissipativity(config: ExperimentConfig, n_jobs: int) -> Table:
    """Checks the dissipativity of the Stokes lines which leave each crossing
    point to the left and to the right."""

    columns = ["z0_real", "z0_imag", "line", "dissipative", "max_violation"]
    rows = []

    for point in _crossings(config):
        _, reports = stokes_dissipativity(config.model, point, config.reach)

        if len(reports) == 0:
            rows.append([point.location.real, point.location.imag, "none", False, ""])

        for side, report in zip(("left", "right"), reports):
            rows.append(
                [
                    point.location.real,
                    point.location.imag,
                    side,
                    report.dissipative,
                    report.max_violation,
                ]
            )

    return columns, rows, None


def _superadiabatic_row(epsilon: float, config: ExperimentConfig) -> List[Any]:
    settings = config.superadiabatic
    grid = uniform_grid(config.window, settings.spacing)

    if config.q is None:
        result = optimal_truncation(
            config.model, epsilon, settings.q_max, grid, settings, config.propagator
        )
        q, defect_norms, diverging = (
            result.q_star,
            result.defect_norms,
            result.diverging,
        )
    else:
        q, diverging = config.q, False
        defect_norms = level_sequence(
            config.model,
            epsilon,
            q + 1,
            grid,
            settings.labels,
            settings.gap_fraction,
        )

    transition = superadiabatic_transition(
        config.model, epsilon, q, config.window, settings, config.propagator
    )
    _logger.info(f"epsilon={epsilon} q={q} transition={transition:.6e}")

    return [
        epsilon,
        q,
        defect_norms[q] if q < len(defect_norms) else numpy.nan,
        transition,
        diverging,
        ";".join(repr(float(norm)) for norm in defect_norms),
    ]


def superadiabatic(config: ExperimentConfig, n_jobs: int) -> Table:
    """Measures the transition probability in a superadiabatic basis across the
    epsilon grid, at a fixed or at the optimal order."""

    if config.window is None:
        raise ConfigValidationError(
            ["window: a finite window is required by the superadiabatic operation"]
        )

    rows = _map_epsilons(_superadiabatic_row, config, n_jobs)

    columns = [
        "epsilon",
        "q",
        "defect_norm",
        "transition",
        "diverging",
        "defect_norms",
    ]
    return columns, rows, None


def _estimate(config: ExperimentConfig, epsilon: float) -> AsymptoticEstimate:
    if config.model.type == "three-level-cascade":
        return theorem1prime_estimate(config.model, epsilon, settings=config.loop)

    return theorem1_estimate(
        config.model, epsilon, config.pair, config.loop, config.reach
    )


def compare(config: ExperimentConfig, n_jobs: int) -> Table:
    """Juxtaposes the numerical transition probability with the asymptotic
    estimate across the epsilon grid."""

    epsilons = config.epsilon_grid
    estimate = _estimate(config, epsilons[0])

    transitions = _map_epsilons(_transition_row, config, n_jobs)

    columns = [
        "epsilon",
        f"{_probability_column(config)}_numeric",
        f"{_probability_column(config)}_estimate",
        "relative_deviation",
        "regime",
    ]
    rows = []

    for epsilon, (_, numeric, *_) in zip(epsilons, transitions):
        value = float(
            numpy.exp(estimate.log_prefactor + estimate.exponent_per_eps / epsilon)
        )
        rows.append(
            [
                epsilon,
                numeric,
                value,
                relative_deviation(numeric, value),
                estimate.regime,
            ]
        )

    return columns, rows, _decay_fit(rows, config.propagator.tolerance)


OPERATIONS: Dict[str, Callable[[ExperimentConfig, int], Table]] = {
    "simulate": simulate,
    "sweep": sweep,
    "crossing": crossing,
    "loop-integral": loop_integral_table,
    "prefactor": prefactor,
    "dissipativity": dissipativity,
    "superadiabatic": superadiabatic,
    "compare": compare,
}


def run(config: ExperimentConfig, output_path: str, n_jobs: int = 1) -> str:
    """Runs the operation of a configuration and writes its table and manifest.

    Parameters
    ----------
    config
        The validated configuration, whose ``operation`` must be set.
    output_path
        The path of the CSV table to write.
    n_jobs
        The number of processes sweeps are spread across.

    Returns
    -------
        The path of the run manifest.
    """

    if config.operation is None:
        raise ConfigValidationError(["operation: an operation is required"])

    columns, rows, fit = OPERATIONS[config.operation](config, n_jobs)

    # every row carries the model and its parameters
    columns = [*columns, "model", "parameters"]
    parameters = model_parameters(config)
    rows = [[*row, config.model.type, parameters] for row in rows]

    metadata = {
        "openff-adiabatic": openff.adiabatic.__version__,
        "operation": config.operation,
        "model": config.model.type,
        "parameters": parameters,
        "tolerance": config.propagator.tolerance,
        "config-hash": config_hash(config),
    }
    write_table(output_path, columns, rows, metadata, fit)

    return write_manifest(output_path, config)
