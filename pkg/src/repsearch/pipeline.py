"""End-to-end orchestration: encode, index, search, fuse, evaluate.

The pipeline reads a corpus (JSONL with `_id`, optional `title`, `text`) and
queries (TSV `query_id<TAB>text`), obtains representation records either from
files or from the deterministic mock encoder, builds the requested indexes,
searches every query with each enabled leg (dense, sparse, optional BM25),
fuses the legs, and evaluates against qrels when provided. All outputs are
deterministic: re-running with the same inputs produces byte-identical
artifacts.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field, fields, replace
from typing import Sequence

from . import bm25 as bm25_mod
from .dense_index import build_dense_index, save_dense_index, search_dense
from .errors import ConfigError, ParseError, SchemaError
from .evaluation import evaluate_runs, format_metrics_table, read_qrels
from .fusion import fuse_all
from .mock_encoder import mock_encode
from .multirep import (
    MODES,
    MULTI_REP_MODES,
    multirep_from_record,
    pooled_record,
    search_multirep,
)
from .records import RepresentationRecord, load_records, write_records
from .runs import RunList, write_run_file
from .sparse_index import build_sparse_index, save_sparse_index, search_sparse
from .sparsifier import SparsifierConfig, VocabTokenizer, sparsify_record
from .validation import check_positive_int

__all__ = ["PipelineConfig", "read_corpus", "read_queries", "run_pipeline"]

log = logging.getLogger("repsearch.pipeline")


def read_corpus(path: str) -> list[tuple[str, str]]:
    """Read a JSONL corpus; the indexed text is `title + " " + text`."""
    docs: list[tuple[str, str]] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", path, lineno) from None
            if not isinstance(obj, dict):
                raise SchemaError("corpus line must be a JSON object", path, lineno)
            doc_id = obj.get("_id", obj.get("id"))
            if not isinstance(doc_id, str) or not doc_id:
                raise SchemaError("missing or empty '_id'", path, lineno)
            if doc_id in seen:
                raise SchemaError(f"duplicate doc id {doc_id!r}", path, lineno)
            seen.add(doc_id)
            text = obj.get("text", "")
            if not isinstance(text, str):
                raise SchemaError("'text' must be a string", path, lineno)
            title = obj.get("title", "")
            if title and not isinstance(title, str):
                raise SchemaError("'title' must be a string", path, lineno)
            docs.append((doc_id, f"{title} {text}" if title else text))
    return docs


def read_queries(path: str) -> list[tuple[str, str]]:
    """Read a TSV queries file: query_id<TAB>text."""
    queries: list[tuple[str, str]] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise ParseError("expected query_id<TAB>text", path, lineno)
            qid, text = line.split("\t", 1)
            if not qid:
                raise SchemaError("empty query id", path, lineno)
            if qid in seen:
                raise SchemaError(f"duplicate query id {qid!r}", path, lineno)
            seen.add(qid)
            queries.append((qid, text))
    return queries


@dataclass
class PipelineConfig:
    """Everything the end-to-end pipeline needs, JSON-loadable."""

    out_dir: str
    corpus: str | None = None
    queries: str | None = None
    qrels: str | None = None
    doc_records: str | None = None
    query_records: str | None = None
    vocab: str | None = None
    mode: str = "first-token"
    top_k: int = 128
    quant_scale: int = 100
    depth: int = 1000
    candidate_depth: int = 1000
    weights: list[float] | None = None
    bm25: bool = False
    k1: float = 0.9
    b: float = 0.4
    bm25_remove_stopwords: bool = False
    ndcg_k: int = 10
    mrr_k: int = 10
    recall_k: int = 1000
    min_grade: int = 1
    dim: int = 16
    seed: int = 0
    emit_tokens: bool = False
    token_words: int = 3
    tag: str = "repsearch"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        check_positive_int(self.depth, "depth")
        check_positive_int(self.candidate_depth, "candidate_depth")

    @classmethod
    def from_json(cls, path: str) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", path) from None
        if not isinstance(obj, dict):
            raise SchemaError("pipeline config must be a JSON object", path)
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown pipeline config keys: {sorted(unknown)}")
        if "out_dir" not in obj:
            raise ConfigError("pipeline config must set out_dir")
        return cls(**obj)

    def override(self, **kwargs) -> "PipelineConfig":
        """Copy with the non-None keyword values replacing config fields."""
        updates = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **updates) if updates else self


@dataclass
class _Prepared:
    """Everything loaded and encoded, ready for indexing and search."""

    doc_records: list[RepresentationRecord]
    query_records: list[RepresentationRecord]
    doc_texts: dict[str, str] = field(default_factory=dict)
    query_texts: dict[str, str] = field(default_factory=dict)
    query_order: list[str] = field(default_factory=list)


def _prepare(config: PipelineConfig) -> _Prepared:
    doc_texts: dict[str, str] = {}
    query_texts: dict[str, str] = {}
    corpus = read_corpus(config.corpus) if config.corpus else None
    queries = read_queries(config.queries) if config.queries else None
    if corpus:
        doc_texts = dict(corpus)
    if queries:
        query_texts = dict(queries)

    if config.doc_records:
        doc_records = load_records(config.doc_records)
    else:
        if corpus is None:
            raise ConfigError("need either doc_records or a corpus to mock-encode")
        doc_records = mock_encode(
            corpus,
            dim=config.dim,
            seed=config.seed,
            emit_tokens=config.emit_tokens or config.mode != "first-token",
            token_words=config.token_words,
        )
        path = os.path.join(config.out_dir, "doc_records.jsonl")
        write_records(doc_records, path)
        log.info("mock-encoded %d documents to %s", len(doc_records), path)

    if config.query_records:
        query_records = load_records(config.query_records)
    else:
        if queries is None:
            raise ConfigError("need either query_records or queries to mock-encode")
        query_records = mock_encode(
            queries,
            dim=config.dim,
            seed=config.seed,
            emit_tokens=config.emit_tokens or config.mode != "first-token",
            token_words=config.token_words,
        )
        path = os.path.join(config.out_dir, "query_records.jsonl")
        write_records(query_records, path)
        log.info("mock-encoded %d queries to %s", len(query_records), path)

    query_order = [r.id for r in query_records]
    return _Prepared(
        doc_records=doc_records,
        query_records=query_records,
        doc_texts=doc_texts,
        query_texts=query_texts,
        query_order=query_order,
    )


def _sparsify_all(
    records: Sequence[RepresentationRecord],
    texts: dict[str, str],
    config: PipelineConfig,
    sparsifier_config: SparsifierConfig,
) -> list[tuple[str, dict[str, int]]]:
    tokenizer = VocabTokenizer.from_json_file(config.vocab) if config.vocab else None
    out = []
    for rec in records:
        text = texts.get(rec.id)
        if rec.logit_vector is not None and text is None:
            raise ConfigError(
                f"record {rec.id!r} has full-vocabulary logits but no source text; "
                "provide the corpus/queries file it came from"
            )
        out.append((rec.id, sparsify_record(rec, sparsifier_config, tokenizer, text)))
    return out


def run_pipeline(config: PipelineConfig) -> dict[str, dict[str, float]]:
    """Execute the full flow; returns mean metrics per leg (empty without qrels)."""
    os.makedirs(config.out_dir, exist_ok=True)
    runs_dir = os.path.join(config.out_dir, "runs")
    os.makedirs(runs_dir, exist_ok=True)
    sparsifier_config = SparsifierConfig(top_k=config.top_k, quant_scale=config.quant_scale)
    prepared = _prepare(config)

    legs: dict[str, list[RunList]] = {}
    if config.mode in MULTI_REP_MODES:
        doc_reps = [
            (rec.id, multirep_from_record(rec, config.mode, sparsifier_config))
            for rec in prepared.doc_records
        ]
        query_reps = {
            rec.id: multirep_from_record(rec, config.mode, sparsifier_config)
            for rec in prepared.query_records
        }
        for kind in ("dense", "sparse"):
            runs = []
            for qid in prepared.query_order:
                run = search_multirep(doc_reps, query_reps[qid], kind, config.depth)
                runs.append(RunList(qid, run.entries))
            legs[kind] = runs
    else:
        pooled_docs = [pooled_record(rec, config.mode) for rec in prepared.doc_records]
        pooled_queries = {
            rec.id: pooled_record(rec, config.mode) for rec in prepared.query_records
        }
        dense_index = build_dense_index((r.id, r.dense) for r in pooled_docs)
        save_dense_index(dense_index, os.path.join(config.out_dir, "dense.idx"))
        sparse_index = build_sparse_index(
            _sparsify_all(pooled_docs, prepared.doc_texts, config, sparsifier_config)
        )
        save_sparse_index(sparse_index, os.path.join(config.out_dir, "sparse.idx"))
        query_sparse = dict(
            _sparsify_all(
                list(pooled_queries.values()), prepared.query_texts, config, sparsifier_config
            )
        )
        legs["dense"] = [
            RunList(qid, search_dense(dense_index, pooled_queries[qid].dense, config.depth).entries)
            for qid in prepared.query_order
        ]
        legs["sparse"] = [
            RunList(qid, search_sparse(sparse_index, query_sparse[qid], config.depth).entries)
            for qid in prepared.query_order
        ]

    if config.bm25:
        if not config.corpus or not config.queries:
            raise ConfigError("the BM25 leg needs both a corpus and a queries file")
        index = bm25_mod.build_bm25_index(
            prepared.doc_texts.items(),
            k1=config.k1,
            b=config.b,
            remove_stopwords=config.bm25_remove_stopwords,
        )
        bm25_mod.save_bm25_index(index, os.path.join(config.out_dir, "bm25.idx"))
        legs["bm25"] = [
            RunList(qid, bm25_mod.search_bm25(index, prepared.query_texts[qid], config.depth).entries)
            for qid in prepared.query_order
        ]

    leg_names = list(legs)
    for name in leg_names:
        write_run_file(legs[name], os.path.join(runs_dir, f"{name}.trec"), tag=f"{config.tag}-{name}")
    hybrid = fuse_all(
        [legs[name] for name in leg_names],
        weights=config.weights,
        candidate_depth=config.candidate_depth,
    )
    write_run_file(hybrid, os.path.join(runs_dir, "hybrid.trec"), tag=f"{config.tag}-hybrid")

    results: dict[str, dict[str, float]] = {}
    if config.qrels:
        qrels = read_qrels(config.qrels)
        for name, runs in list(legs.items()) + [("hybrid", hybrid)]:
            per_query, means = evaluate_runs(
                runs,
                qrels,
                ndcg_k=config.ndcg_k,
                mrr_k=config.mrr_k,
                recall_k=config.recall_k,
                min_grade=config.min_grade,
            )
            with open(
                os.path.join(runs_dir, f"{name}.metrics.tsv"), "w", encoding="utf-8"
            ) as fh:
                fh.write(format_metrics_table(per_query, means))
            results[name] = means
        summary = os.path.join(config.out_dir, "metrics.tsv")
        with open(summary, "w", encoding="utf-8") as fh:
            metric_names = list(next(iter(results.values())))
            fh.write("leg\t" + "\t".join(metric_names) + "\n")
            for name in results:
                fh.write(name + "\t" + "\t".join(f"{results[name][m]:.6f}" for m in metric_names) + "\n")
    return results
