"""Canonical serialization and hashing for reproducibility metadata.

Artifacts embed a hash of the configuration that produced them; reruns with
an identical configuration and seed must reproduce identical hashes, so the
serialization here is canonical (sorted keys, repr-exact floats, no
timestamps or environment state).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json

import numpy as np

TOOL_VERSION = "uavplace 0.1.0"


def to_jsonable(obj):
    """Recursively convert dataclasses/arrays/numpy scalars to JSON types."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: to_jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and obj == float("inf"):
        return "inf"
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def canonical_json(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"), allow_nan=True)


def config_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()[:16]
