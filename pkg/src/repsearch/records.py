"""Reading and writing per-text representation records (JSONL wire format).

One UTF-8 JSON object per line:

    {"id": "doc7",
     "dense": [0.12, -3.4, ...],
     "logits": {"fox": 11.25, "dog": 10.5, ...},
     "tokens": [{"token": " fox", "dense": [...], "logits": {...}}, ...]}

`dense` is the text-level dense vector (required, non-empty, finite).
`logits` is optional and comes in two forms: a mapping from token string to
raw logit value (already restricted to the tokens of interest; anything not
listed is treated as absent), or a full-vocabulary array of floats whose
positions are resolved against a separately supplied vocabulary. `tokens`
is optional and carries one sub-record per generated token for the
multi-representation modes. Unknown fields are ignored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import ParseError, SchemaError

__all__ = [
    "TokenRecord",
    "RepresentationRecord",
    "parse_record",
    "serialize_record",
    "load_records",
    "write_records",
]


@dataclass
class TokenRecord:
    """Representation of a single generated token."""

    token: str
    dense: np.ndarray
    logits: dict[str, float] = field(default_factory=dict)
    logit_vector: np.ndarray | None = None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TokenRecord):
            return NotImplemented
        return (
            self.token == other.token
            and np.array_equal(self.dense, other.dense)
            and self.logits == other.logits
            and _vec_equal(self.logit_vector, other.logit_vector)
        )


@dataclass
class RepresentationRecord:
    """Representation of one text: a dense vector plus optional logits/tokens."""

    id: str
    dense: np.ndarray
    logits: dict[str, float] = field(default_factory=dict)
    logit_vector: np.ndarray | None = None
    tokens: list[TokenRecord] | None = None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RepresentationRecord):
            return NotImplemented
        return (
            self.id == other.id
            and np.array_equal(self.dense, other.dense)
            and self.logits == other.logits
            and _vec_equal(self.logit_vector, other.logit_vector)
            and self.tokens == other.tokens
        )


def _vec_equal(a: np.ndarray | None, b: np.ndarray | None) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return np.array_equal(a, b)


def _as_float_array(values: object, what: str, path: str | None, line: int | None) -> np.ndarray:
    if not isinstance(values, list) or not values:
        raise SchemaError(f"{what} must be a non-empty array of numbers", path, line)
    try:
        arr = np.asarray(values, dtype=np.float64)
    except (TypeError, ValueError):
        raise SchemaError(f"{what} contains non-numeric entries", path, line) from None
    if arr.ndim != 1:
        raise SchemaError(f"{what} must be a flat array", path, line)
    if not np.all(np.isfinite(arr)):
        raise SchemaError(f"{what} contains non-finite values", path, line)
    return arr.astype(np.float32)


def _parse_logits(
    obj: object, what: str, path: str | None, line: int | None
) -> tuple[dict[str, float], np.ndarray | None]:
    """Accept either the pair form (mapping) or the full-vocabulary array form."""
    if obj is None:
        return {}, None
    if isinstance(obj, dict):
        out: dict[str, float] = {}
        for key, value in obj.items():
            if not isinstance(key, str) or not key:
                raise SchemaError(f"{what} keys must be non-empty strings", path, line)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise SchemaError(f"{what}[{key!r}] must be a number", path, line)
            value = float(value)
            if not np.isfinite(value):
                raise SchemaError(f"{what}[{key!r}] must be finite", path, line)
            out[key] = value
        return out, None
    if isinstance(obj, list):
        return {}, _as_float_array(obj, what, path, line)
    raise SchemaError(f"{what} must be an object or an array", path, line)


def _parse_token(obj: object, idx: int, path: str | None, line: int | None) -> TokenRecord:
    what = f"tokens[{idx}]"
    if not isinstance(obj, dict):
        raise SchemaError(f"{what} must be an object", path, line)
    token = obj.get("token")
    if not isinstance(token, str) or not token:
        raise SchemaError(f"{what}.token must be a non-empty string", path, line)
    dense = _as_float_array(obj.get("dense"), f"{what}.dense", path, line)
    logits, logit_vector = _parse_logits(obj.get("logits"), f"{what}.logits", path, line)
    return TokenRecord(token=token, dense=dense, logits=logits, logit_vector=logit_vector)


def parse_record(text: str, path: str | None = None, line: int | None = None) -> RepresentationRecord:
    """Parse one JSONL line into a record, raising ParseError/SchemaError."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path, line) from None
    if not isinstance(obj, dict):
        raise SchemaError("record must be a JSON object", path, line)
    rid = obj.get("id")
    if not isinstance(rid, str) or not rid:
        raise SchemaError("missing or empty 'id'", path, line)
    if "dense" not in obj:
        raise SchemaError("missing 'dense'", path, line)
    dense = _as_float_array(obj["dense"], "dense", path, line)
    logits, logit_vector = _parse_logits(obj.get("logits"), "logits", path, line)
    tokens: list[TokenRecord] | None = None
    if obj.get("tokens") is not None:
        raw = obj["tokens"]
        if not isinstance(raw, list) or not raw:
            raise SchemaError("tokens must be a non-empty array", path, line)
        tokens = [_parse_token(t, i, path, line) for i, t in enumerate(raw)]
    return RepresentationRecord(
        id=rid, dense=dense, logits=logits, logit_vector=logit_vector, tokens=tokens
    )


def _logits_json(logits: Mapping[str, float], vector: np.ndarray | None) -> object:
    if vector is not None:
        return [float(x) for x in vector]
    return {k: float(v) for k, v in logits.items()}


def serialize_record(record: RepresentationRecord) -> str:
    """Serialize a record to one JSON line (no trailing newline)."""
    obj: dict[str, object] = {
        "id": record.id,
        "dense": [float(x) for x in record.dense],
        "logits": _logits_json(record.logits, record.logit_vector),
    }
    if record.tokens is not None:
        obj["tokens"] = [
            {
                "token": t.token,
                "dense": [float(x) for x in t.dense],
                "logits": _logits_json(t.logits, t.logit_vector),
            }
            for t in record.tokens
        ]
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def load_records(path: str) -> list[RepresentationRecord]:
    """Load and validate a JSONL records file.

    Checks per-file consistency: ids unique, all dense vectors (token-level
    included) share one dimensionality, and all full-vocabulary logit arrays
    share one length. Blank lines are skipped.
    """
    records: list[RepresentationRecord] = []
    seen: set[str] = set()
    dim: int | None = None
    vocab_len: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            rec = parse_record(raw, path, lineno)
            if rec.id in seen:
                raise SchemaError(f"duplicate id {rec.id!r}", path, lineno)
            seen.add(rec.id)
            dims = [rec.dense.shape[0]]
            if rec.tokens:
                dims.extend(t.dense.shape[0] for t in rec.tokens)
            for d in dims:
                if dim is None:
                    dim = d
                elif d != dim:
                    raise SchemaError(
                        f"dense dimension {d} differs from earlier dimension {dim}",
                        path,
                        lineno,
                    )
            vecs = [rec.logit_vector] if rec.logit_vector is not None else []
            if rec.tokens:
                vecs.extend(t.logit_vector for t in rec.tokens if t.logit_vector is not None)
            for v in vecs:
                if vocab_len is None:
                    vocab_len = v.shape[0]
                elif v.shape[0] != vocab_len:
                    raise SchemaError(
                        f"logit array length {v.shape[0]} differs from earlier length {vocab_len}",
                        path,
                        lineno,
                    )
            records.append(rec)
    return records


def write_records(records: Iterable[RepresentationRecord], path: str) -> None:
    """Write records as JSONL, one per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(serialize_record(rec))
            fh.write("\n")
