"""Exact flat index over dense vectors with cosine scoring.

Vectors are L2-normalized at build time (normalization happens in float64,
storage is float32), so search is a single matrix-vector product. Every
stored document is scored; negative and zero cosines are kept, and ties are
broken by ascending doc id. Queries are normalized the same way, which makes
scores invariant to positive rescaling of either side.

On-disk format, little-endian:

    magic b"RDIX" | version u32 | doc_count u32 | dim u32
    doc_count x (u32 byte length, utf-8 doc id)
    doc_count x dim float32 (row-major, normalized rows)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import BuildError, ParseError
from .runs import RunList
from .validation import as_dense_matrix, check_doc_ids, check_positive_int

__all__ = [
    "DenseIndex",
    "build_dense_index",
    "search_dense",
    "save_dense_index",
    "load_dense_index",
    "DenseIndexer",
]

_MAGIC = b"RDIX"
_VERSION = 1


@dataclass
class DenseIndex:
    """Unit-normalized float32 vectors with aligned doc ids."""

    doc_ids: list[str]
    vectors: np.ndarray

    @property
    def doc_count(self) -> int:
        return len(self.doc_ids)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


def _normalize(vec: np.ndarray, what: str) -> np.ndarray:
    vec64 = np.asarray(vec, dtype=np.float64)
    norm = float(np.linalg.norm(vec64))
    if norm == 0.0 or not np.isfinite(norm):
        raise BuildError(f"{what} has zero or non-finite norm")
    return (vec64 / norm).astype(np.float32)


def build_dense_index(docs: Iterable[tuple[str, np.ndarray]]) -> DenseIndex:
    """Build a flat index from (doc_id, vector) pairs."""
    doc_ids: list[str] = []
    rows: list[np.ndarray] = []
    dim: int | None = None
    for doc_id, vec in docs:
        arr = np.asarray(vec, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] == 0:
            raise BuildError(f"doc {doc_id!r}: vector must be 1-D and non-empty")
        if not np.all(np.isfinite(arr)):
            raise BuildError(f"doc {doc_id!r}: vector contains non-finite values")
        if dim is None:
            dim = arr.shape[0]
        elif arr.shape[0] != dim:
            raise BuildError(
                f"doc {doc_id!r}: vector dimension {arr.shape[0]} does not match index dimension {dim}"
            )
        doc_ids.append(doc_id)
        rows.append(_normalize(arr, f"doc {doc_id!r}"))
    check_doc_ids(doc_ids)
    if not rows:
        raise BuildError("cannot build a dense index from zero documents")
    return DenseIndex(doc_ids=doc_ids, vectors=np.vstack(rows))


def search_dense(index: DenseIndex, query: np.ndarray, k: int) -> RunList:
    """Exact top-k by cosine similarity over every stored document."""
    check_positive_int(k, "k")
    q = np.asarray(query, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != index.dim:
        raise BuildError(f"query dimension {q.shape} does not match index dimension {index.dim}")
    if not np.all(np.isfinite(q)):
        raise BuildError("query vector contains non-finite values")
    qn = _normalize(q, "query")
    scores = index.vectors @ qn
    order = sorted(range(index.doc_count), key=lambda i: (-scores[i], index.doc_ids[i]))
    top = order[:k]
    return RunList(query_id="", entries=[(index.doc_ids[i], float(scores[i])) for i in top])


def save_dense_index(index: DenseIndex, path: str) -> None:
    """Write the index in the documented binary format."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<III", _VERSION, index.doc_count, index.dim))
        for doc_id in index.doc_ids:
            raw = doc_id.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
        fh.write(np.ascontiguousarray(index.vectors, dtype="<f4").tobytes())


def load_dense_index(path: str) -> DenseIndex:
    """Read an index written by save_dense_index."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ParseError("not a dense index file (bad magic)", path)
        header = fh.read(12)
        if len(header) != 12:
            raise ParseError("truncated index file", path)
        version, doc_count, dim = struct.unpack("<III", header)
        if version != _VERSION:
            raise ParseError(f"unsupported dense index version {version}", path)
        doc_ids = []
        for _ in range(doc_count):
            raw_len = fh.read(4)
            if len(raw_len) != 4:
                raise ParseError("truncated index file", path)
            (n,) = struct.unpack("<I", raw_len)
            raw = fh.read(n)
            if len(raw) != n:
                raise ParseError("truncated index file", path)
            doc_ids.append(raw.decode("utf-8"))
        payload = fh.read(4 * doc_count * dim)
        if len(payload) != 4 * doc_count * dim:
            raise ParseError("truncated vector payload", path)
        if fh.read(1):
            raise ParseError("trailing bytes after index payload", path)
    vectors = np.frombuffer(payload, dtype="<f4").reshape(doc_count, dim).copy()
    return DenseIndex(doc_ids=doc_ids, vectors=vectors)


class DenseIndexer(BaseEstimator):
    """Estimator wrapper: fit normalizes and stores vectors, search scores."""

    def fit(self, X, y: Sequence[str] | None = None) -> "DenseIndexer":
        """X is an (n, d) array of vectors, y the matching doc ids."""
        X = as_dense_matrix(X)
        doc_ids = [str(i) for i in range(X.shape[0])] if y is None else list(y)
        if len(doc_ids) != X.shape[0]:
            raise BuildError(f"got {X.shape[0]} vectors but {len(doc_ids)} doc ids")
        self.index_ = build_dense_index(zip(doc_ids, X))
        return self

    def search(self, query: np.ndarray, k: int = 10) -> RunList:
        check_is_fitted(self, "index_")
        return search_dense(self.index_, query, k)
