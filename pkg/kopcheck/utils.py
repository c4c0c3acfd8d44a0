"""
kopcheck Utilities - Shared helper functions.

Responsibilities:
- Deterministic JSON serialization (reports, document payloads)
- Canonical encoding of opaque payload values

Invariants:
- Same value = byte-identical text
- Tuples are encoded as JSON arrays and decoded back to tuples
"""

import json
from typing import Any, Mapping


def serialize_json(data: Mapping[str, Any]) -> str:
    """
    Serialize dictionary to JSON deterministically.

    Args:
        data: Dictionary to serialize.

    Returns:
        JSON string with sorted keys, 2-space indent, trailing newline.
    """
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def encode_payload(value: Any) -> str:
    """
    Encode an opaque payload as canonical single-line JSON.

    Supported values: None, bool, int, str, and (nested) tuples/lists of
    these. Lists and tuples both encode as arrays.

    Raises:
        TypeError: If the value holds an unsupported type (floats included;
            payload equality must not depend on float formatting).
    """
    return json.dumps(_check_payload(value), separators=(",", ":"), ensure_ascii=True)


def decode_payload(text: str) -> Any:
    """Decode canonical JSON back into a payload; arrays become tuples."""
    return _freeze(json.loads(text))


def _check_payload(value: Any) -> Any:
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, (tuple, list)):
        return [_check_payload(v) for v in value]
    raise TypeError(f"unsupported payload type: {type(value).__name__}")


def _freeze(value: Any) -> Any:
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    if isinstance(value, dict):
        raise ValueError("payload objects are not supported")
    if isinstance(value, float):
        raise ValueError("payload floats are not supported")
    return value
