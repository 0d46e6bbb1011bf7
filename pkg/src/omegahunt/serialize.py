"""Deterministic JSON/CSV emission and content hashing.

All CLI outputs and the witness store go through these helpers so that a
fixed payload always serializes to identical bytes: dict keys are sorted,
floats carry 17 significant digits (lossless for float64 round-trips),
and JSON documents are newline-terminated.  Non-finite floats and unknown
types are programming errors, not data.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from typing import Any, Iterable, Sequence


def _format_float(v: float) -> str:
    assert math.isfinite(v), f"non-finite float {v!r} in payload"
    text = format(v, ".17g")
    # keep a float marker so json round-trips preserve the type
    if "." not in text and "e" not in text and "E" not in text:
        text += ".0"
    return text


def _serialize(obj: Any, out: list) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_format_float(obj))
    elif isinstance(obj, dict):
        keys = list(obj.keys())
        assert all(isinstance(k, str) for k in keys), "dict keys must be strings"
        out.append("{")
        for i, k in enumerate(sorted(keys)):
            if i:
                out.append(",")
            out.append(json.dumps(k, ensure_ascii=False))
            out.append(":")
            _serialize(obj[k], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _serialize(v, out)
        out.append("]")
    else:
        raise AssertionError(f"unserializable type {type(obj).__name__}")


def canonical_json(obj: Any) -> str:
    """Deterministic single-line JSON: sorted keys, 17-digit floats."""
    out: list = []
    _serialize(obj, out)
    return "".join(out)


def emit_json(payload: Any) -> bytes:
    """Newline-terminated canonical JSON document."""
    return (canonical_json(payload) + "\n").encode("utf-8")


def emit_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> bytes:
    """CSV with RFC-style quoting; floats carry 17 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow(
            [_format_float(v) if isinstance(v, float) else v for v in row]
        )
    return buf.getvalue().encode("utf-8")


def content_hash(obj: Any) -> str:
    """sha256 hex digest of the canonical JSON of obj."""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
