"""Input schemas and strict readers for the exporter's file formats.

Every reader validates before parsing and reports the first offending
column or key by name, so a schema drift upstream fails loudly instead of
producing a silently wrong figure.
"""

import csv
import json

CSV_SCHEMAS = {
    "spectrum_sweep": ("sweep_value", "index", "eigenvalue",
                       "log10_nearest_spacing"),
    "min_spacing": ("n", "eps", "measured_min_spacing", "model_min_spacing",
                    "log10_ratio"),
    "level_curves": ("p", "phi", "energy", "e_sep_lower", "e_sep_upper"),
    "mathieu_compare": ("index", "harper_eigenvalue",
                        "mathieu_scaled_eigenvalue", "difference",
                        "harper_spacing", "mathieu_spacing"),
}

DRIFT_KEYS = ("params0", "params1", "duration_over_hbar", "steps",
              "amplitudes", "labels_init", "labels_final",
              "boundary_indices", "region_probs", "diagnostics")


class SchemaError(ValueError):
    """Input file does not match the documented exporter schema."""


def read_csv_columns(path, kind):
    """Parse a CSV into {column: list of floats}, validating the header.

    The header must name exactly the documented columns in order; the first
    mismatch is reported by name.  A file with no data rows is an error.
    """
    expected = CSV_SCHEMAS[kind]
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header "
                              f"{','.join(expected)}")
        for i, name in enumerate(expected):
            if i >= len(header) or header[i] != name:
                got = header[i] if i < len(header) else "<missing>"
                raise SchemaError(
                    f"{path}: column {i} is {got!r}, expected {name!r}")
        if len(header) > len(expected):
            raise SchemaError(f"{path}: unexpected column {header[len(expected)]!r}")
        cols = {name: [] for name in expected}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(expected):
                raise SchemaError(f"{path}:{lineno}: expected "
                                  f"{len(expected)} fields, got {len(row)}")
            for name, cell in zip(expected, row):
                try:
                    cols[name].append(float(cell))
                except ValueError:
                    raise SchemaError(
                        f"{path}:{lineno}: column {name!r} value {cell!r} "
                        f"is not numeric")
    if not cols[expected[0]]:
        raise SchemaError(f"{path}: no data rows")
    return cols


def read_drift_report(path):
    """Parse one drift JSON report, checking the top-level keys."""
    with open(path) as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: not valid JSON ({e})")
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    for key in DRIFT_KEYS:
        if key not in data:
            raise SchemaError(f"{path}: missing key {key!r}")
    amps = data["amplitudes"]
    n = len(amps)
    if n == 0 or any(len(row) != n for row in amps):
        raise SchemaError(f"{path}: amplitudes is not a square matrix")
    return data
