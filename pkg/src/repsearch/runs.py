"""Ranked result lists and standard six-column run file IO.

A run file line is `query_id Q0 doc_id rank score tag`, whitespace separated,
ranks starting at 1, scores printed with six decimal places. The in-memory
form keeps entries ordered best-first with the invariant: descending score,
ties broken by ascending doc_id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import ParseError, SchemaError

__all__ = ["RunList", "write_run_file", "read_run_file"]


@dataclass
class RunList:
    """Ranked retrieval results for one query."""

    query_id: str
    entries: list[tuple[str, float]] = field(default_factory=list)

    @classmethod
    def from_scores(
        cls,
        query_id: str,
        scores: Mapping[str, float] | Iterable[tuple[str, float]],
        k: int | None = None,
    ) -> "RunList":
        """Build a RunList from doc scores: sort descending, ties by doc_id.

        Duplicate doc ids are rejected. `k` truncates to the top k entries.
        """
        pairs = list(scores.items()) if isinstance(scores, Mapping) else list(scores)
        seen: set[str] = set()
        for doc_id, _ in pairs:
            if doc_id in seen:
                raise SchemaError(f"duplicate doc id {doc_id!r} in scores for query {query_id!r}")
            seen.add(doc_id)
        pairs.sort(key=lambda p: (-p[1], p[0]))
        if k is not None:
            pairs = pairs[:k]
        return cls(query_id=query_id, entries=[(d, float(s)) for d, s in pairs])

    def truncated(self, depth: int) -> "RunList":
        """Return a copy keeping only the top `depth` entries."""
        return RunList(self.query_id, list(self.entries[:depth]))

    def doc_ids(self) -> list[str]:
        return [d for d, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[str, float]]:
        return iter(self.entries)


def write_run_file(runs: Iterable[RunList], path: str, tag: str = "repsearch") -> None:
    """Write runs in the six-column format, scores with six decimals."""
    with open(path, "w", encoding="utf-8") as fh:
        for run in runs:
            for rank, (doc_id, score) in enumerate(run.entries, start=1):
                fh.write(f"{run.query_id} Q0 {doc_id} {rank} {score:.6f} {tag}\n")


def read_run_file(path: str) -> list[RunList]:
    """Read a six-column run file back into RunLists.

    Entries are ordered by their rank column within each query; queries are
    returned in first-appearance order. Malformed lines raise ParseError with
    the line number.
    """
    per_query: dict[str, list[tuple[int, str, float]]] = {}
    order: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            parts = raw.split()
            if len(parts) != 6:
                raise ParseError(f"expected 6 columns, got {len(parts)}", path, lineno)
            qid, _q0, doc_id, rank_s, score_s, _tag = parts
            try:
                rank = int(rank_s)
                score = float(score_s)
            except ValueError:
                raise ParseError("rank must be an integer and score a number", path, lineno) from None
            if qid not in per_query:
                per_query[qid] = []
                order.append(qid)
            per_query[qid].append((rank, doc_id, score))
    runs: list[RunList] = []
    for qid in order:
        rows = sorted(per_query[qid], key=lambda r: r[0])
        seen: set[str] = set()
        for _, doc_id, _ in rows:
            if doc_id in seen:
                raise SchemaError(f"duplicate doc id {doc_id!r} for query {qid!r}", path)
            seen.add(doc_id)
        runs.append(RunList(qid, [(doc_id, score) for _, doc_id, score in rows]))
    return runs
