"""Canonical text serialization.

Every document the engine emits (project files, frame streams, fixture
keys) goes through this module so that serialize -> parse -> serialize is
byte-stable: UTF-8, keys sorted, compact separators, floats rounded to at
most six decimals (times are rounded to milliseconds by the model layer
before they reach this point).
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import Any

FLOAT_PLACES = 6
TIME_PLACES = 3


def canonical_float(value: float, places: int = FLOAT_PLACES) -> float:
    """Round to the canonical precision and normalize -0.0 to 0.0."""
    v = float(value)
    if math.isnan(v) or math.isinf(v):
        raise ValueError(f"non-finite float {v!r} cannot be serialized canonically")
    r = round(v, places)
    if r == 0.0:
        return 0.0
    return r


def round_time(seconds: float) -> float:
    """Times are stored with millisecond precision on serialization."""
    return canonical_float(seconds, TIME_PLACES)


def _normalize(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, float):
        return canonical_float(obj)
    if isinstance(obj, dict):
        return {str(k): _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    raise TypeError(f"cannot canonicalize value of type {type(obj).__name__}")


def canonical_json(obj: Any) -> str:
    """Deterministic JSON text for an already-dumped document structure."""
    return json.dumps(_normalize(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_bytes(obj: Any) -> bytes:
    return canonical_json(obj).encode("utf-8")


def content_hash(obj: Any) -> str:
    """SHA-256 of the canonical serialization; stable across key order."""
    return hashlib.sha256(canonical_bytes(obj)).hexdigest()


def text_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
