"""Lexical BM25 ranking as the third retrieval leg.

Uses the package's own word tokenizer (lowercased, punctuation dropped);
stopword removal is configurable and off by default. Defaults k1=0.9, b=0.4
follow the common passage-ranking baseline configuration.

Scoring for query q and document d of length |d|:

    idf(t) = ln(1 + (N - df(t) + 0.5) / (df(t) + 0.5))
    score(q, d) = sum over occurrences of t in q of
        idf(t) * tf(t, d) * (k1 + 1) / (tf(t, d) + k1 * (1 - b + b * |d| / avgdl))

Repeated query terms contribute once per occurrence. Only documents with a
strictly positive score are returned, ties broken by ascending doc id.

On-disk format, little-endian:

    magic b"RBMX" | version u32 | k1 f64 | b f64 | flags u32 (bit 0: stopwords removed)
    doc_count u32 | doc_count x (u32 byte length, utf-8 doc id) | doc_count x u32 doc length
    token_count u32 | token_count x (u32 byte length, utf-8 token,
                                     u32 postings length,
                                     postings length x (u32 doc ordinal, u32 term frequency))
"""

from __future__ import annotations

import math
import struct
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import BuildError, ParseError
from .runs import RunList
from .text import PUNCTUATION, english_stopwords, extract_words
from .validation import check_doc_ids, check_positive_int

__all__ = [
    "Bm25Index",
    "bm25_tokenize",
    "build_bm25_index",
    "search_bm25",
    "save_bm25_index",
    "load_bm25_index",
    "Bm25Indexer",
]

_MAGIC = b"RBMX"
_VERSION = 1


def bm25_tokenize(text: str, remove_stopwords: bool = False) -> list[str]:
    """Lowercased word tokens with punctuation dropped; stopwords optional."""
    stopwords = english_stopwords() if remove_stopwords else frozenset()
    return extract_words(text, stopwords=stopwords, punctuation=PUNCTUATION, lowercase=True)


@dataclass
class Bm25Index:
    """Term-frequency postings plus the document statistics BM25 needs."""

    doc_ids: list[str]
    doc_lens: list[int]
    postings: dict[str, list[tuple[int, int]]] = field(default_factory=dict)
    k1: float = 0.9
    b: float = 0.4
    remove_stopwords: bool = False

    @property
    def doc_count(self) -> int:
        return len(self.doc_ids)

    @property
    def avgdl(self) -> float:
        return float(np.mean(self.doc_lens)) if self.doc_lens else 0.0


def build_bm25_index(
    docs: Iterable[tuple[str, str]],
    k1: float = 0.9,
    b: float = 0.4,
    remove_stopwords: bool = False,
) -> Bm25Index:
    """Build from (doc_id, text) pairs. Empty documents are allowed."""
    if k1 < 0 or not 0.0 <= b <= 1.0:
        raise BuildError(f"k1 must be >= 0 and b in [0, 1], got k1={k1} b={b}")
    doc_ids: list[str] = []
    doc_lens: list[int] = []
    postings: dict[str, list[tuple[int, int]]] = {}
    for doc_id, text in docs:
        ordinal = len(doc_ids)
        tokens = bm25_tokenize(text, remove_stopwords)
        doc_ids.append(doc_id)
        doc_lens.append(len(tokens))
        for token, tf in sorted(Counter(tokens).items()):
            postings.setdefault(token, []).append((ordinal, tf))
    check_doc_ids(doc_ids)
    return Bm25Index(
        doc_ids=doc_ids,
        doc_lens=doc_lens,
        postings=postings,
        k1=k1,
        b=b,
        remove_stopwords=remove_stopwords,
    )


def idf(index: Bm25Index, token: str) -> float:
    """ln(1 + (N - df + 0.5) / (df + 0.5)); 0 document frequency is allowed."""
    df = len(index.postings.get(token, ()))
    return math.log(1.0 + (index.doc_count - df + 0.5) / (df + 0.5))


def search_bm25(index: Bm25Index, query_text: str, k: int) -> RunList:
    """Exact top-k BM25 scores; only positive scores are returned."""
    check_positive_int(k, "k")
    tokens = bm25_tokenize(query_text, index.remove_stopwords)
    scores = np.zeros(index.doc_count, dtype=np.float64)
    avgdl = index.avgdl
    for token, qtf in Counter(tokens).items():
        plist = index.postings.get(token)
        if not plist:
            continue
        token_idf = idf(index, token)
        for ordinal, tf in plist:
            norm = 1.0 - index.b + index.b * index.doc_lens[ordinal] / avgdl
            partial = token_idf * tf * (index.k1 + 1.0) / (tf + index.k1 * norm)
            scores[ordinal] += qtf * partial
    hit = np.nonzero(scores > 0.0)[0]
    pairs = sorted(
        ((index.doc_ids[i], float(scores[i])) for i in hit),
        key=lambda p: (-p[1], p[0]),
    )
    return RunList(query_id="", entries=pairs[:k])


def save_bm25_index(index: Bm25Index, path: str) -> None:
    """Write the index in the documented binary format."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", _VERSION))
        fh.write(struct.pack("<dd", index.k1, index.b))
        fh.write(struct.pack("<I", 1 if index.remove_stopwords else 0))
        fh.write(struct.pack("<I", index.doc_count))
        for doc_id in index.doc_ids:
            raw = doc_id.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
        fh.write(struct.pack(f"<{index.doc_count}I", *index.doc_lens))
        fh.write(struct.pack("<I", len(index.postings)))
        for token in sorted(index.postings):
            plist = index.postings[token]
            raw = token.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<I", len(plist)))
            for ordinal, tf in plist:
                fh.write(struct.pack("<II", ordinal, tf))


def _read_exact(fh, n: int, path: str) -> bytes:
    raw = fh.read(n)
    if len(raw) != n:
        raise ParseError("truncated index file", path)
    return raw


def load_bm25_index(path: str) -> Bm25Index:
    """Read an index written by save_bm25_index."""
    with open(path, "rb") as fh:
        if _read_exact(fh, 4, path) != _MAGIC:
            raise ParseError("not a BM25 index file (bad magic)", path)
        (version,) = struct.unpack("<I", _read_exact(fh, 4, path))
        if version != _VERSION:
            raise ParseError(f"unsupported BM25 index version {version}", path)
        k1, b = struct.unpack("<dd", _read_exact(fh, 16, path))
        (flags,) = struct.unpack("<I", _read_exact(fh, 4, path))
        (doc_count,) = struct.unpack("<I", _read_exact(fh, 4, path))
        doc_ids = []
        for _ in range(doc_count):
            (n,) = struct.unpack("<I", _read_exact(fh, 4, path))
            doc_ids.append(_read_exact(fh, n, path).decode("utf-8"))
        doc_lens = list(struct.unpack(f"<{doc_count}I", _read_exact(fh, 4 * doc_count, path)))
        (token_count,) = struct.unpack("<I", _read_exact(fh, 4, path))
        postings: dict[str, list[tuple[int, int]]] = {}
        for _ in range(token_count):
            (n,) = struct.unpack("<I", _read_exact(fh, 4, path))
            token = _read_exact(fh, n, path).decode("utf-8")
            (m,) = struct.unpack("<I", _read_exact(fh, 4, path))
            raw = np.frombuffer(_read_exact(fh, 8 * m, path), dtype="<u4").reshape(m, 2)
            plist = [(int(o), int(tf)) for o, tf in raw]
            for ordinal, _ in plist:
                if ordinal >= doc_count:
                    raise ParseError(f"posting ordinal {ordinal} out of range", path)
            postings[token] = plist
        if fh.read(1):
            raise ParseError("trailing bytes after index payload", path)
    return Bm25Index(
        doc_ids=doc_ids,
        doc_lens=doc_lens,
        postings=postings,
        k1=k1,
        b=b,
        remove_stopwords=bool(flags & 1),
    )


class Bm25Indexer(BaseEstimator):
    """Estimator wrapper: fit tokenizes and indexes texts, search scores."""

    def __init__(self, k1: float = 0.9, b: float = 0.4, remove_stopwords: bool = False):
        self.k1 = k1
        self.b = b
        self.remove_stopwords = remove_stopwords

    def fit(self, X: Sequence[str], y: Sequence[str] | None = None) -> "Bm25Indexer":
        """X is a sequence of document texts, y the matching doc ids."""
        doc_ids = [str(i) for i in range(len(X))] if y is None else list(y)
        if len(doc_ids) != len(X):
            raise BuildError(f"got {len(X)} texts but {len(doc_ids)} doc ids")
        self.index_ = build_bm25_index(
            zip(doc_ids, X), k1=self.k1, b=self.b, remove_stopwords=self.remove_stopwords
        )
        return self

    def search(self, query_text: str, k: int = 10) -> RunList:
        check_is_fitted(self, "index_")
        return search_bm25(self.index_, query_text, k)
