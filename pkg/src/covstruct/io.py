"""CSV ingestion and the JSON result document."""

import csv
import hashlib
import json
import math

import jsonschema
import numpy as np

from .exceptions import ParseError, SampleSizeError

SCHEMA_VERSION = "1"

# JSON Schema of every emitted document.
RESULT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "command", "dataset", "result", "timing"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {
            "type": "object",
            "required": ["name", "args"],
            "properties": {"name": {"type": "string"}, "args": {"type": "object"}},
        },
        "dataset": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["N", "d", "sha256"],
                    "properties": {
                        "N": {"type": "integer", "minimum": 1},
                        "d": {"type": "integer", "minimum": 1},
                        "sha256": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
                    },
                },
            ]
        },
        "result": {"type": ["object", "array"]},
        "timing": {
            "type": "object",
            "required": ["elapsed_seconds"],
            "properties": {"elapsed_seconds": {"type": "number", "minimum": 0}},
        },
    },
    "additionalProperties": False,
}


def load_csv(path, has_header=False):
    """Read a rectangular numeric table (rows = observations) into an (N, d) array."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh)]
    if has_header and rows:
        rows = rows[1:]
    offset = 2 if has_header else 1  # 1-based line number of rows[0]
    data, width = [], None
    for i, row in enumerate(rows):
        if not row or all(not c.strip() for c in row):
            continue
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"line {i + offset}: expected {width} columns, found {len(row)}",
                             row=i + offset, column=None)
        vals = []
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"line {i + offset}, column {j + 1}: non-numeric cell {cell!r}",
                                 row=i + offset, column=j + 1) from None
            if not math.isfinite(v):
                raise ParseError(f"line {i + offset}, column {j + 1}: non-finite value {cell!r}",
                                 row=i + offset, column=j + 1)
            vals.append(v)
        data.append(vals)
    if len(data) < 2:
        raise SampleSizeError(f"need at least 2 observations, found {len(data)}")
    return np.array(data, dtype=float)


def fingerprint(X):
    X = np.ascontiguousarray(X, dtype="<f8")
    return {"N": int(X.shape[0]), "d": int(X.shape[1]), "sha256": hashlib.sha256(X.tobytes()).hexdigest()}


def sanitize(obj):
    """Make ``obj`` strict-JSON: numpy scalars to Python, inf/nan to None."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return sanitize(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def make_document(command, result, dataset=None, elapsed=0.0):
    return {
        "schema_version": SCHEMA_VERSION,
        "command": sanitize(command),
        "dataset": dataset,
        "result": sanitize(result),
        "timing": {"elapsed_seconds": float(elapsed)},
    }


def validate_document(doc):
    """Raise ``jsonschema.ValidationError`` unless ``doc`` matches the schema."""
    jsonschema.validate(doc, RESULT_SCHEMA)
    json.dumps(doc, allow_nan=False)
    return doc


def dumps(doc):
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def payload_bytes(doc):
    """Serialization without the timing field (the determinism contract)."""
    return dumps({k: v for k, v in doc.items() if k != "timing"}).encode()
