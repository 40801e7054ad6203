"""JSON helpers: complex numbers as {re, im} pairs, dataclasses unwrapped,
NaN/Inf sanitized to null so reports are valid, byte-stable JSON."""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np


def complex_to_json(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def json_to_complex(d) -> complex:
    return complex(float(d["re"]), float(d["im"]))


def to_jsonable(obj):
    """Recursively convert reports to plain JSON-serializable structures."""
    if obj is None or isinstance(obj, (bool, str, int)):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, complex):
        return complex_to_json(obj)
    if isinstance(obj, (np.floating,)):
        return to_jsonable(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.complexfloating,)):
        return complex_to_json(complex(obj))
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, "to_json"):
            return to_jsonable(obj.to_json())
        return {f.name: to_jsonable(getattr(obj, f.name))
                for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if hasattr(obj, "to_json"):
        return to_jsonable(obj.to_json())
    raise TypeError(f"cannot serialize {type(obj)!r}")


def dumps_report(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2,
                      allow_nan=False) + "\n"


def dump_report(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_report(obj))
