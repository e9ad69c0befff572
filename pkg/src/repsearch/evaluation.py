"""Ranking quality metrics and qrels file IO.

Conventions (matching the common evaluation tooling for graded judgments):

- nDCG@k uses exponential gain 2^grade - 1 and discount log2(rank + 1) with
  ranks starting at 1. A query whose ideal DCG is zero (no positively graded
  documents, or the query is absent from the qrels) scores 0 and still counts
  in the mean.
- MRR@k is the reciprocal rank of the first document with grade >= min_grade
  within the top k, else 0.
- Recall@k is the fraction of documents with grade >= min_grade that appear
  in the top k; queries with no such documents score 0 and count in the mean.
- Means are taken over every query in the qrels. A qrels query with no run
  scores 0 on all metrics; run queries absent from the qrels are ignored.

Qrels files are whitespace-separated `query_id 0 doc_id grade` lines.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

from .errors import ConfigError, ParseError
from .runs import RunList
from .validation import check_positive_int

__all__ = [
    "Qrels",
    "read_qrels",
    "write_qrels",
    "ndcg_at_k",
    "mrr_at_k",
    "recall_at_k",
    "mean_metric",
    "evaluate_runs",
    "format_metrics_table",
]

# query_id -> doc_id -> integer relevance grade
Qrels = dict[str, dict[str, int]]

_METRICS = ("ndcg", "mrr", "recall")


def read_qrels(path: str) -> Qrels:
    """Read a four-column qrels file."""
    qrels: Qrels = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            parts = raw.split()
            if len(parts) != 4:
                raise ParseError(f"expected 4 columns, got {len(parts)}", path, lineno)
            qid, _iteration, doc_id, grade_s = parts
            try:
                grade = int(grade_s)
            except ValueError:
                raise ParseError(f"grade must be an integer, got {grade_s!r}", path, lineno) from None
            qrels.setdefault(qid, {})[doc_id] = grade
    return qrels


def write_qrels(qrels: Qrels, path: str) -> None:
    """Write qrels in the four-column format, sorted for determinism."""
    with open(path, "w", encoding="utf-8") as fh:
        for qid in sorted(qrels):
            for doc_id in sorted(qrels[qid]):
                fh.write(f"{qid} 0 {doc_id} {qrels[qid][doc_id]}\n")


def _gain(grade: int) -> float:
    return float(2**grade - 1)


def _grades_for(run: RunList, qrels: Qrels) -> Mapping[str, int]:
    return qrels.get(run.query_id, {})


def ndcg_at_k(run: RunList, qrels: Qrels, k: int = 10) -> float:
    """Normalized discounted cumulative gain with exponential gain."""
    check_positive_int(k, "k")
    grades = _grades_for(run, qrels)
    dcg = 0.0
    for rank, (doc_id, _) in enumerate(run.entries[:k], start=1):
        grade = grades.get(doc_id, 0)
        if grade > 0:
            dcg += _gain(grade) / math.log2(rank + 1)
    ideal = sorted((g for g in grades.values() if g > 0), reverse=True)
    idcg = sum(_gain(g) / math.log2(rank + 1) for rank, g in enumerate(ideal[:k], start=1))
    if idcg == 0.0:
        return 0.0
    return dcg / idcg


def mrr_at_k(run: RunList, qrels: Qrels, k: int = 10, min_grade: int = 1) -> float:
    """Reciprocal rank of the first document with grade >= min_grade."""
    check_positive_int(k, "k")
    grades = _grades_for(run, qrels)
    for rank, (doc_id, _) in enumerate(run.entries[:k], start=1):
        if grades.get(doc_id, 0) >= min_grade:
            return 1.0 / rank
    return 0.0


def recall_at_k(run: RunList, qrels: Qrels, k: int = 1000, min_grade: int = 1) -> float:
    """Fraction of grade >= min_grade documents retrieved in the top k."""
    check_positive_int(k, "k")
    grades = _grades_for(run, qrels)
    relevant = {d for d, g in grades.items() if g >= min_grade}
    if not relevant:
        return 0.0
    hits = sum(1 for doc_id, _ in run.entries[:k] if doc_id in relevant)
    return hits / len(relevant)


def _one_metric(run: RunList, qrels: Qrels, metric: str, k: int, min_grade: int) -> float:
    if metric == "ndcg":
        return ndcg_at_k(run, qrels, k)
    if metric == "mrr":
        return mrr_at_k(run, qrels, k, min_grade)
    if metric == "recall":
        return recall_at_k(run, qrels, k, min_grade)
    raise ConfigError(f"unknown metric {metric!r}, expected one of {_METRICS}")


def mean_metric(
    runs: Sequence[RunList],
    qrels: Qrels,
    metric: str = "ndcg",
    k: int = 10,
    min_grade: int = 1,
) -> float:
    """Mean of one metric over every query in the qrels."""
    if not qrels:
        raise ConfigError("qrels contain no queries")
    by_qid = {run.query_id: run for run in runs}
    total = 0.0
    for qid in qrels:
        run = by_qid.get(qid, RunList(qid, []))
        total += _one_metric(run, qrels, metric, k, min_grade)
    return total / len(qrels)


def evaluate_runs(
    runs: Sequence[RunList],
    qrels: Qrels,
    ndcg_k: int = 10,
    mrr_k: int = 10,
    recall_k: int = 1000,
    min_grade: int = 1,
) -> tuple[dict[str, dict[str, float]], dict[str, float]]:
    """Per-query and mean values for the three standard metrics.

    Returns (per_query, means) where the metric keys are "ndcg@K", "mrr@K"
    and "recall@K" with the given cutoffs baked in.
    """
    keys = {
        f"ndcg@{ndcg_k}": ("ndcg", ndcg_k),
        f"mrr@{mrr_k}": ("mrr", mrr_k),
        f"recall@{recall_k}": ("recall", recall_k),
    }
    by_qid = {run.query_id: run for run in runs}
    per_query: dict[str, dict[str, float]] = {}
    for qid in sorted(qrels):
        run = by_qid.get(qid, RunList(qid, []))
        per_query[qid] = {
            name: _one_metric(run, qrels, metric, k, min_grade)
            for name, (metric, k) in keys.items()
        }
    count = len(per_query)
    means = {
        name: (sum(row[name] for row in per_query.values()) / count if count else 0.0)
        for name in keys
    }
    return per_query, means


def format_metrics_table(
    per_query: Mapping[str, Mapping[str, float]], means: Mapping[str, float]
) -> str:
    """Tab-separated table: one row per query plus a final mean row."""
    names = list(means)
    lines = ["query\t" + "\t".join(names)]
    for qid, row in per_query.items():
        lines.append(qid + "\t" + "\t".join(f"{row[n]:.6f}" for n in names))
    lines.append("mean\t" + "\t".join(f"{means[n]:.6f}" for n in names))
    return "\n".join(lines) + "\n"
