"""Model files and deterministic CSV/JSON output.

A model file is a JSON object, either naming a zoo model::

    {"model": "simple_rw", "a": 12, "b": 0, "params": {"p_plus": 0.2, "q_plus": 0.4}}

or giving explicit rate tables indexed from ``b``::

    {"b": -2, "a": 2, "p": [0.5, 0.4, 0.3, 0.2], "q": [0.2, 0.3, 0.4, 0.5]}

``p`` covers ``b..a-1`` and ``q`` covers ``b+1..a`` (full-length arrays with
the boundary zeros are accepted too).
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import tempfile
from pathlib import Path

import jsonschema
import numpy as np

from .chain import MODELS, ChainSpec, InvalidChainError, make_model, validate_spec

__all__ = ["MODEL_SCHEMA", "load_model", "spec_from_dict", "write_json", "write_csv", "to_jsonable"]

MODEL_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "birth-and-death chain",
    "type": "object",
    "properties": {
        "model": {"type": "string", "enum": list(MODELS) + ["custom"]},
        "a": {"type": "integer", "minimum": 0},
        "b": {"type": "integer", "maximum": 0},
        "params": {"type": "object"},
        "p": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
        "q": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
        "name": {"type": "string"},
    },
    "required": ["a"],
    "additionalProperties": False,
    "if": {"anyOf": [{"required": ["p"]}, {"required": ["q"]}]},
    "then": {"required": ["p", "q", "b"]},
    "else": {"required": ["model"]},
}


def spec_from_dict(doc: dict) -> ChainSpec:
    """Validate ``doc`` against :data:`MODEL_SCHEMA` and build the chain."""
    try:
        jsonschema.validate(doc, MODEL_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise InvalidChainError(f"model file: {exc.message} (at {where})") from None
    if "p" in doc:
        spec = ChainSpec.from_tables(doc["b"], doc["a"], doc["p"], doc["q"],
                                     name=doc.get("name", doc.get("model", "custom")))
        problems = validate_spec(spec)
        if problems:
            raise InvalidChainError("; ".join(problems))
        return spec
    params = dict(doc.get("params", {}))
    if "b" in doc:
        params["b"] = doc["b"]
    return make_model(doc["model"], params, doc["a"])


def load_model(path) -> ChainSpec:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidChainError(f"{path}: not valid JSON ({exc})") from None
    return spec_from_dict(doc)


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats.

    NaN and infinities become the strings ``"nan"``, ``"inf"``, ``"-inf"`` so
    the output stays strict JSON.
    """
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def _atomic_write(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> Path:
    _atomic_write(path, json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return Path(path)


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows) -> Path:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    _atomic_write(path, buf.getvalue())
    return Path(path)
