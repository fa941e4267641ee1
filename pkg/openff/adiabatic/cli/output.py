"""Writing and reading the self-describing CSV tables produced by the CLI."""
import csv
import hashlib
import json
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy

import openff.adiabatic
from openff.adiabatic.cli.config import ExperimentConfig


def _format_value(value: Any) -> str:
    if isinstance(value, (bool, numpy.bool_)):
        return str(bool(value))
    if isinstance(value, (int, numpy.integer)):
        return str(int(value))
    if isinstance(value, (float, numpy.floating)):
        return repr(float(value))

    return str(value)


def config_hash(config: ExperimentConfig) -> str:
    """Returns the sha256 hash of the canonical JSON form of a configuration."""
    return hashlib.sha256(config.json(sort_keys=True).encode()).hexdigest()


def model_parameters(config: ExperimentConfig) -> str:
    """Returns the parameters of the configured model as compact canonical JSON."""
    return json.dumps(
        json.loads(config.model.json(exclude={"type"}, sort_keys=True)),
        sort_keys=True,
        separators=(",", ":"),
    )


def write_table(
    path: str,
    columns: Sequence[str],
    rows: Sequence[Sequence[Any]],
    metadata: Dict[str, Any],
    fit: Optional[Dict[str, float]] = None,
):
    """Writes a CSV table preceded by ``# key: value`` metadata lines and
    optionally followed by a ``# fit:`` summary line.

    Parameters
    ----------
    path
        The path to write to.
    columns
        The column names.
    rows
        The rows of the table.
    metadata
        The values to record in the header.
    fit
        The values to record in the fit summary trailer.
    """

    with open(path, "w", newline="") as file:
        for key, value in metadata.items():
            file.write(f"# {key}: {_format_value(value)}\n")

        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows([[_format_value(value) for value in row] for row in rows])

        if fit is not None:
            summary = ", ".join(
                f"{key}={_format_value(value)}" for key, value in fit.items()
            )
            file.write(f"# fit: {summary}\n")


def read_table(path: str) -> Tuple[List[str], List[List[str]]]:
    """Reads a table written by ``write_table``, skipping its ``#`` lines.

    Returns
    -------
        The column names and the rows.
    """

    with open(path, newline="") as file:
        lines = [line for line in file if not line.startswith("#")]

    columns, *rows = list(csv.reader(lines))
    return columns, rows


def write_manifest(output_path: str, config: ExperimentConfig) -> str:
    """Records the package version, the configuration hash and the resolved
    configuration next to an output file.

    Returns
    -------
        The path of the manifest.
    """

    manifest_path = f"{output_path}.manifest.json"

    manifest = {
        "version": openff.adiabatic.__version__,
        "config_hash": config_hash(config),
        "config": json.loads(config.json(sort_keys=True)),
    }

    with open(manifest_path, "w") as file:
        json.dump(manifest, file, indent=2, sort_keys=True)
        file.write("\n")

    return manifest_path
