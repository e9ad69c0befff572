"""Exact inverted index over integer-weighted sparse representations.

Scoring is the integer dot product between the query's token weights and each
document's token weights; only documents with a strictly positive score are
returned. Search is term-at-a-time over full postings lists, so results are
exact, including the tie rule (descending score, then ascending doc id).

The on-disk format is a little-endian binary file:

    magic b"RSIX" | version u32 | doc_count u32
    doc_count x (u32 byte length, utf-8 doc id)
    token_count u32
    token_count x (u32 byte length, utf-8 token,
                   u32 postings length,
                   postings length x (u32 doc ordinal, u32 weight))

Tokens are written in ascending token order and postings in ascending
ordinal order, so identical indexes serialize to identical bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import BuildError, ParseError
from .runs import RunList
from .sparsifier import SparseRep
from .validation import check_doc_ids, check_positive_int, check_sparse_rep

__all__ = [
    "InvertedIndex",
    "build_sparse_index",
    "search_sparse",
    "save_sparse_index",
    "load_sparse_index",
    "dump_postings",
    "SparseIndexer",
]

_MAGIC = b"RSIX"
_VERSION = 1
_U32_MAX = 2**32 - 1


@dataclass
class InvertedIndex:
    """Postings keyed by token; doc ordinals index into `doc_ids`."""

    doc_ids: list[str]
    postings: dict[str, list[tuple[int, int]]] = field(default_factory=dict)

    @property
    def doc_count(self) -> int:
        return len(self.doc_ids)

    @property
    def token_count(self) -> int:
        return len(self.postings)


def build_sparse_index(docs: Iterable[tuple[str, SparseRep]]) -> InvertedIndex:
    """Build an inverted index from (doc_id, sparse representation) pairs."""
    doc_ids: list[str] = []
    postings: dict[str, list[tuple[int, int]]] = {}
    for doc_id, rep in docs:
        check_sparse_rep(rep, where=f"doc {doc_id!r}")
        ordinal = len(doc_ids)
        doc_ids.append(doc_id)
        for token, weight in rep.items():
            postings.setdefault(token, []).append((ordinal, int(weight)))
    check_doc_ids(doc_ids)
    return InvertedIndex(doc_ids=doc_ids, postings=postings)


def search_sparse(index: InvertedIndex, query: SparseRep, k: int) -> RunList:
    """Exact top-k by integer dot product; only positive scores are returned."""
    check_positive_int(k, "k")
    scores = np.zeros(index.doc_count, dtype=np.int64)
    for token, q_weight in query.items():
        for ordinal, d_weight in index.postings.get(token, ()):
            scores[ordinal] += int(q_weight) * d_weight
    hit = np.nonzero(scores > 0)[0]
    pairs = sorted(
        ((index.doc_ids[i], int(scores[i])) for i in hit),
        key=lambda p: (-p[1], p[0]),
    )
    return RunList(query_id="", entries=[(d, float(s)) for d, s in pairs[:k]])


def _write_str(fh, text: str) -> None:
    raw = text.encode("utf-8")
    fh.write(struct.pack("<I", len(raw)))
    fh.write(raw)


def _read_exact(fh, n: int, path: str) -> bytes:
    raw = fh.read(n)
    if len(raw) != n:
        raise ParseError("truncated index file", path)
    return raw


def _read_str(fh, path: str) -> str:
    (n,) = struct.unpack("<I", _read_exact(fh, 4, path))
    return _read_exact(fh, n, path).decode("utf-8")


def save_sparse_index(index: InvertedIndex, path: str) -> None:
    """Write the index in the documented binary format."""
    if index.doc_count > _U32_MAX:
        raise BuildError("too many documents for the on-disk format")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, index.doc_count))
        for doc_id in index.doc_ids:
            _write_str(fh, doc_id)
        fh.write(struct.pack("<I", index.token_count))
        for token in sorted(index.postings):
            plist = index.postings[token]
            _write_str(fh, token)
            fh.write(struct.pack("<I", len(plist)))
            for ordinal, weight in plist:
                fh.write(struct.pack("<II", ordinal, weight))


def load_sparse_index(path: str) -> InvertedIndex:
    """Read an index written by save_sparse_index."""
    with open(path, "rb") as fh:
        if _read_exact(fh, 4, path) != _MAGIC:
            raise ParseError("not a sparse index file (bad magic)", path)
        version, doc_count = struct.unpack("<II", _read_exact(fh, 8, path))
        if version != _VERSION:
            raise ParseError(f"unsupported sparse index version {version}", path)
        doc_ids = [_read_str(fh, path) for _ in range(doc_count)]
        (token_count,) = struct.unpack("<I", _read_exact(fh, 4, path))
        postings: dict[str, list[tuple[int, int]]] = {}
        for _ in range(token_count):
            token = _read_str(fh, path)
            (n,) = struct.unpack("<I", _read_exact(fh, 4, path))
            raw = np.frombuffer(_read_exact(fh, 8 * n, path), dtype="<u4").reshape(n, 2)
            plist = [(int(o), int(w)) for o, w in raw]
            for ordinal, _ in plist:
                if ordinal >= doc_count:
                    raise ParseError(f"posting ordinal {ordinal} out of range", path)
            postings[token] = plist
        if fh.read(1):
            raise ParseError("trailing bytes after index payload", path)
    return InvertedIndex(doc_ids=doc_ids, postings=postings)


def dump_postings(index: InvertedIndex, limit: int | None = None) -> str:
    """Human-readable postings listing for inspection tooling."""
    lines = [f"documents: {index.doc_count}", f"tokens: {index.token_count}"]
    for token in sorted(index.postings)[: limit if limit is not None else None]:
        entries = " ".join(
            f"{index.doc_ids[ordinal]}:{weight}" for ordinal, weight in index.postings[token]
        )
        lines.append(f"{token}\t{entries}")
    return "\n".join(lines) + "\n"


class SparseIndexer(BaseEstimator):
    """Estimator wrapper: fit stores the index, search queries it."""

    def fit(self, X: Sequence[SparseRep], y: Sequence[str] | None = None) -> "SparseIndexer":
        """X is a sequence of sparse representations, y the matching doc ids.

        When y is omitted, ids "0", "1", ... are assigned in order.
        """
        doc_ids = [str(i) for i in range(len(X))] if y is None else list(y)
        if len(doc_ids) != len(X):
            raise BuildError(f"got {len(X)} representations but {len(doc_ids)} doc ids")
        self.index_ = build_sparse_index(zip(doc_ids, X))
        return self

    def search(self, query: SparseRep, k: int = 10) -> RunList:
        check_is_fitted(self, "index_")
        return search_sparse(self.index_, query, k)
