"""Score fusion across retrieval runs for the same query.

Each input run is truncated to a candidate depth, min-max normalized over its
own surviving candidates, and the normalized scores are combined as a
weighted sum. A document missing from a run contributes zero for that run.
The fused list is re-sorted descending with ties broken by ascending doc id.
"""

from __future__ import annotations

from typing import Sequence

from .errors import ConfigError
from .runs import RunList
from .validation import check_positive_int

__all__ = ["minmax_normalize", "fuse", "align_runs", "fuse_all", "weight_sweep"]


def minmax_normalize(run: RunList) -> RunList:
    """Rescale scores to [0, 1] over the run's own entries.

    With fewer than two distinct scores every entry gets 0.0. The entry order
    is preserved (the transform is monotone, so the ranking is unchanged).
    """
    if not run.entries:
        return RunList(run.query_id, [])
    values = [s for _, s in run.entries]
    lo, hi = min(values), max(values)
    if hi == lo:
        return RunList(run.query_id, [(d, 0.0) for d, _ in run.entries])
    span = hi - lo
    return RunList(run.query_id, [(d, (s - lo) / span) for d, s in run.entries])


def fuse(
    runs: Sequence[RunList],
    weights: Sequence[float] | None = None,
    candidate_depth: int = 1000,
) -> RunList:
    """Weighted min-max fusion of runs for one query.

    `weights` defaults to equal weights. All runs must share a query id.
    """
    if not runs:
        raise ConfigError("fuse needs at least one run")
    check_positive_int(candidate_depth, "candidate_depth")
    qid = runs[0].query_id
    for run in runs[1:]:
        if run.query_id != qid:
            raise ConfigError(
                f"cannot fuse runs for different queries: {qid!r} vs {run.query_id!r}"
            )
    if weights is None:
        weights = [1.0 / len(runs)] * len(runs)
    weights = [float(w) for w in weights]
    if len(weights) != len(runs):
        raise ConfigError(f"got {len(runs)} runs but {len(weights)} weights")
    if any(w < 0 for w in weights):
        raise ConfigError("fusion weights must be non-negative")
    if all(w == 0 for w in weights):
        raise ConfigError("at least one fusion weight must be positive")
    combined: dict[str, float] = {}
    for run, weight in zip(runs, weights):
        normalized = minmax_normalize(run.truncated(candidate_depth))
        for doc_id, score in normalized.entries:
            combined[doc_id] = combined.get(doc_id, 0.0) + weight * score
    return RunList.from_scores(qid, combined)


def align_runs(*run_lists: Sequence[RunList]) -> list[tuple[RunList, ...]]:
    """Group runs from several sources by query id.

    Query ids are ordered by first appearance across sources; a source with
    no run for a query contributes an empty run.
    """
    order: list[str] = []
    seen: set[str] = set()
    maps: list[dict[str, RunList]] = []
    for runs in run_lists:
        by_qid: dict[str, RunList] = {}
        for run in runs:
            if run.query_id in by_qid:
                raise ConfigError(f"duplicate run for query {run.query_id!r} in one source")
            by_qid[run.query_id] = run
            if run.query_id not in seen:
                seen.add(run.query_id)
                order.append(run.query_id)
        maps.append(by_qid)
    return [
        tuple(m.get(qid, RunList(qid, [])) for m in maps)
        for qid in order
    ]


def fuse_all(
    run_lists: Sequence[Sequence[RunList]],
    weights: Sequence[float] | None = None,
    candidate_depth: int = 1000,
) -> list[RunList]:
    """Fuse several whole run files, aligning queries by id."""
    return [
        fuse(list(group), weights=weights, candidate_depth=candidate_depth)
        for group in align_runs(*run_lists)
    ]


def weight_sweep(
    runs_a: Sequence[RunList],
    runs_b: Sequence[RunList],
    qrels: dict[str, dict[str, int]],
    grid: Sequence[float],
    metric: str = "ndcg",
    k: int = 10,
    candidate_depth: int = 1000,
    min_grade: int = 1,
) -> list[tuple[float, float]]:
    """Evaluate two-way fusion with weights (w, 1-w) for each w in `grid`.

    Returns (w, mean metric) pairs in grid order. Weight w applies to
    `runs_a`, 1-w to `runs_b`.
    """
    from .evaluation import mean_metric

    results: list[tuple[float, float]] = []
    for w in grid:
        if not 0.0 <= w <= 1.0:
            raise ConfigError(f"sweep weights must be in [0, 1], got {w}")
        fused = fuse_all([runs_a, runs_b], weights=[w, 1.0 - w], candidate_depth=candidate_depth)
        results.append((float(w), mean_metric(fused, qrels, metric, k, min_grade=min_grade)))
    return results
