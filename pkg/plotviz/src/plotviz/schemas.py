"""Input validation for the documented qpdyn output schemas.

Every loader raises :class:`SchemaError` with the offending field name so
the CLI can exit nonzero and say exactly what is missing or malformed.
"""

from __future__ import annotations

import csv
import json

import numpy as np

FREQ_SCHEMA = "qpdyn-frequencies/1"
MODES_SCHEMA = "qpdyn-modes/1"


class SchemaError(ValueError):
    def __init__(self, field: str, detail: str = ""):
        self.field = field
        msg = f"schema violation in field {field!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise SchemaError("<file>", f"{path} does not exist") from None
    except json.JSONDecodeError as exc:
        raise SchemaError("<document>", f"not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise SchemaError("<document>", "top level must be an object")
    return doc


def _require(doc: dict, field: str, kinds) -> object:
    if field not in doc:
        raise SchemaError(field, "missing")
    value = doc[field]
    if not isinstance(value, kinds):
        raise SchemaError(field, f"expected {kinds}, got {type(value).__name__}")
    return value


def load_frequencies(path) -> dict:
    """Frequency-table JSON: schema tag, dt, rows of {bin, omega, periods}."""
    doc = _load_json(path)
    tag = _require(doc, "schema", str)
    if tag != FREQ_SCHEMA:
        raise SchemaError("schema", f"expected {FREQ_SCHEMA!r}, got {tag!r}")
    _require(doc, "dt", (int, float))
    rows = _require(doc, "rows", list)
    if not rows:
        raise SchemaError("rows", "empty")
    for i, row in enumerate(rows):
        if not isinstance(row, dict):
            raise SchemaError(f"rows[{i}]", "not an object")
        for key in ("bin", "omega"):
            if key not in row:
                raise SchemaError(f"rows[{i}].{key}", "missing")
            if not isinstance(row[key], (int, float)):
                raise SchemaError(f"rows[{i}].{key}", "not a number")
        for key in ("period_samples", "period_time"):
            if key in row and row[key] is not None and not isinstance(
                row[key], (int, float)
            ):
                raise SchemaError(f"rows[{i}].{key}", "not a number or null")
    return doc


def load_modes(path) -> dict:
    """Eigenmode JSON: schema tag, dt, modes of {index, lambda, values}."""
    doc = _load_json(path)
    tag = _require(doc, "schema", str)
    if tag != MODES_SCHEMA:
        raise SchemaError("schema", f"expected {MODES_SCHEMA!r}, got {tag!r}")
    _require(doc, "dt", (int, float))
    modes = _require(doc, "modes", list)
    if not modes:
        raise SchemaError("modes", "empty")
    for i, mode in enumerate(modes):
        if not isinstance(mode, dict):
            raise SchemaError(f"modes[{i}]", "not an object")
        for key in ("index", "lambda", "values"):
            if key not in mode:
                raise SchemaError(f"modes[{i}].{key}", "missing")
        values = mode["values"]
        try:
            arr = np.asarray(values, dtype=float)
        except (TypeError, ValueError):
            raise SchemaError(f"modes[{i}].values", "not numeric") from None
        if arr.ndim != 2 or arr.size == 0:
            raise SchemaError(f"modes[{i}].values", "must be a nonempty matrix")
    return doc


def load_table(path) -> tuple[list[str], np.ndarray]:
    """Numeric CSV with one header line: trajectory, reference or error."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            rows = [r for r in reader if r and any(c.strip() for c in r)]
    except FileNotFoundError:
        raise SchemaError("<file>", f"{path} does not exist") from None
    if len(rows) < 2:
        raise SchemaError("rows", "need a header line and at least one data row")
    header = [c.strip() for c in rows[0]]
    width = len(header)
    data = []
    for i, row in enumerate(rows[1:], start=1):
        if len(row) != width:
            raise SchemaError(f"rows[{i}]", f"expected {width} fields, got {len(row)}")
        try:
            data.append([float(c) for c in row])
        except ValueError:
            raise SchemaError(f"rows[{i}]", "non-numeric field") from None
    return header, np.asarray(data)
