import logging

import click

import openff.adiabatic
from openff.adiabatic.asymptotics import fit_decay_rate
from openff.adiabatic.cli.experiment import exit_codes
from openff.adiabatic.cli.output import read_table, write_table


@click.command(help="Fit ln P = ln C - 2 gamma / epsilon to a sweep or compare table.")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--output",
    "output_path",
    type=click.Path(dir_okay=False),
    default="fit.csv",
    help="The path to write the fitted values to.",
    show_default=True,
)
@click.option(
    "--error-floor",
    type=float,
    default=None,
    help="The integrator error floor. Probabilities below 100 times it are not fit.",
)
def fit(input_path: str, output_path: str, error_floor: float):
    logging.basicConfig(level=logging.INFO)

    columns, rows = read_table(input_path)

    probability_columns = [column for column in columns if column.startswith("P")]

    if "epsilon" not in columns or len(probability_columns) == 0:
        raise click.BadParameter(
            "the table must have an epsilon and a probability column",
            param_hint="INPUT_PATH",
        )

    epsilon_index = columns.index("epsilon")
    probability_index = columns.index(probability_columns[0])

    samples = [
        (float(row[epsilon_index]), float(row[probability_index])) for row in rows
    ]

    with exit_codes():
        result = fit_decay_rate(samples, error_floor)

    write_table(
        output_path,
        ["gamma_fit", "prefactor_fit", "r_squared", "n_samples"],
        [
            [
                result.gamma_fit,
                result.prefactor_fit,
                result.r_squared,
                len(result.epsilons),
            ]
        ],
        {
            "openff-adiabatic": openff.adiabatic.__version__,
            "source": input_path,
            "column": probability_columns[0],
        },
    )
