"""Pooled and multi-representation modes over per-token records.

A record may carry one sub-record per generated token. Five retrieval modes
consume them:

- "first-token": the record's own top-level dense vector and logits (the
  representation at the position that predicts the first generated token).
  Token sub-records are not needed.
- "first-word": pool the sub-records of the first generated word into one
  representation (mean for dense, elementwise max for logits).
- "multi-token": pool every generated token's sub-record the same way.
- "per-token": keep one representation per generated token and score with
  late interaction.
- "per-word": pool within each word's token group, keep one representation
  per word, and score with late interaction.

Word groups: a new word starts at the first token and at every token whose
string begins with a space character.

Late-interaction score of query Q against document D: for each query
representation take the maximum similarity over all document
representations, and sum those maxima. Dense similarity is the cosine
(representations are unit-normalized when a MultiRep is built); sparse
similarity is the integer dot product of the quantized representations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import BuildError, ConfigError
from .records import RepresentationRecord, TokenRecord
from .runs import RunList
from .sparsifier import SparseRep, SparsifierConfig, sparsify
from .validation import check_positive_int

__all__ = [
    "SINGLE_REP_MODES",
    "MULTI_REP_MODES",
    "MODES",
    "MultiRep",
    "group_words",
    "pool_tokens",
    "pooled_record",
    "multirep_from_record",
    "colbert_score",
    "search_multirep",
]

SINGLE_REP_MODES = ("first-token", "first-word", "multi-token")
MULTI_REP_MODES = ("per-token", "per-word")
MODES = SINGLE_REP_MODES + MULTI_REP_MODES


@dataclass
class MultiRep:
    """Parallel per-representation arrays for one text.

    `dense` is an (m, d) float32 matrix with unit rows; `sparse` holds m
    quantized representations aligned with the rows.
    """

    dense: np.ndarray
    sparse: list[SparseRep]

    @property
    def count(self) -> int:
        return len(self.sparse)


def group_words(tokens: Sequence[TokenRecord]) -> list[list[TokenRecord]]:
    """Split a token sequence into word groups on leading-space boundaries."""
    groups: list[list[TokenRecord]] = []
    for i, token in enumerate(tokens):
        if i == 0 or token.token.startswith(" "):
            groups.append([token])
        else:
            groups[-1].append(token)
    return groups


def pool_tokens(tokens: Sequence[TokenRecord]) -> tuple[np.ndarray, dict[str, float]]:
    """Mean-pool dense vectors, max-pool logits over the union of keys."""
    if not tokens:
        raise BuildError("cannot pool an empty token group")
    dense = np.mean([np.asarray(t.dense, dtype=np.float64) for t in tokens], axis=0)
    logits: dict[str, float] = {}
    for token in tokens:
        if token.logit_vector is not None:
            raise BuildError("pooling over full-vocabulary token logits is not supported")
        for key, value in token.logits.items():
            if key not in logits or value > logits[key]:
                logits[key] = value
    return dense.astype(np.float32), logits


def _require_tokens(record: RepresentationRecord, mode: str) -> list[TokenRecord]:
    if not record.tokens:
        raise BuildError(f"record {record.id!r} has no token sub-records, required by mode {mode!r}")
    return record.tokens


def pooled_record(record: RepresentationRecord, mode: str) -> RepresentationRecord:
    """Reduce a record to a single representation per the given pooled mode."""
    if mode not in SINGLE_REP_MODES:
        raise ConfigError(f"mode must be one of {SINGLE_REP_MODES}, got {mode!r}")
    if mode == "first-token":
        return RepresentationRecord(
            id=record.id,
            dense=record.dense,
            logits=record.logits,
            logit_vector=record.logit_vector,
        )
    tokens = _require_tokens(record, mode)
    if mode == "first-word":
        tokens = group_words(tokens)[0]
    dense, logits = pool_tokens(tokens)
    return RepresentationRecord(id=record.id, dense=dense, logits=logits)


def _unit_rows(rows: list[np.ndarray], record_id: str) -> np.ndarray:
    matrix = np.vstack([np.asarray(r, dtype=np.float64) for r in rows])
    norms = np.linalg.norm(matrix, axis=1)
    if np.any(norms == 0.0) or not np.all(np.isfinite(norms)):
        raise BuildError(f"record {record_id!r}: a representation has zero or non-finite norm")
    return (matrix / norms[:, None]).astype(np.float32)


def multirep_from_record(
    record: RepresentationRecord,
    mode: str,
    config: SparsifierConfig = SparsifierConfig(),
) -> MultiRep:
    """Build the per-token or per-word representation set for one record.

    Each representation's logits go through the standard sparsification
    pipeline independently.
    """
    if mode not in MULTI_REP_MODES:
        raise ConfigError(f"mode must be one of {MULTI_REP_MODES}, got {mode!r}")
    tokens = _require_tokens(record, mode)
    if mode == "per-token":
        for t in tokens:
            if t.logit_vector is not None:
                raise BuildError("per-token mode over full-vocabulary logits is not supported")
        parts = [(np.asarray(t.dense, dtype=np.float64), dict(t.logits)) for t in tokens]
    else:
        parts = []
        for group in group_words(tokens):
            dense_vec, logits = pool_tokens(group)
            parts.append((dense_vec.astype(np.float64), logits))
    dense = _unit_rows([p[0] for p in parts], record.id)
    sparse = [sparsify(p[1], config) for p in parts]
    return MultiRep(dense=dense, sparse=sparse)


def _sparse_dot(a: SparseRep, b: SparseRep) -> int:
    if len(a) > len(b):
        a, b = b, a
    return sum(w * b[t] for t, w in a.items() if t in b)


def colbert_score(query: MultiRep, doc: MultiRep, kind: str) -> float:
    """Sum over query representations of the max similarity to the document."""
    if doc.count == 0 or query.count == 0:
        raise BuildError("late-interaction scoring needs at least one representation per side")
    if kind == "dense":
        sims = query.dense @ doc.dense.T
        return float(np.sum(np.max(sims, axis=1)))
    if kind == "sparse":
        total = 0
        for q_rep in query.sparse:
            total += max(_sparse_dot(q_rep, d_rep) for d_rep in doc.sparse)
        return float(total)
    raise ConfigError(f"kind must be 'dense' or 'sparse', got {kind!r}")


def search_multirep(
    docs: Iterable[tuple[str, MultiRep]],
    query: MultiRep,
    kind: str,
    k: int,
) -> RunList:
    """Exact top-k late-interaction search over (doc_id, MultiRep) pairs.

    Dense scores are kept regardless of sign, matching the dense index;
    sparse scores must be strictly positive, matching the inverted index.
    """
    check_positive_int(k, "k")
    pairs = []
    for doc_id, rep in docs:
        score = colbert_score(query, rep, kind)
        if kind == "sparse" and score <= 0.0:
            continue
        pairs.append((doc_id, score))
    pairs.sort(key=lambda p: (-p[1], p[0]))
    return RunList(query_id="", entries=pairs[:k])
