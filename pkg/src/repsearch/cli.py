"""Command-line interface.

Subcommands cover each pipeline stage (encode-mock, index-dense,
index-sparse, index-bm25, search, fuse, evaluate, sweep, dump) plus a
`pipeline` command that runs the whole flow from a JSON config with flag
overrides. Exit codes: 0 success, 2 usage, 3 unreadable or malformed data,
4 bad configuration, 5 index build failure.

The only environment variable consulted is REPSEARCH_LOG, which sets the log
level (DEBUG, INFO, WARNING, ...).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Sequence

from .bm25 import build_bm25_index, load_bm25_index, save_bm25_index, search_bm25
from .dense_index import build_dense_index, load_dense_index, save_dense_index, search_dense
from .errors import BuildError, ConfigError, ParseError, RepSearchError, SchemaError
from .evaluation import evaluate_runs, format_metrics_table, read_qrels
from .fusion import fuse_all, weight_sweep
from .mock_encoder import mock_encode
from .multirep import (
    MODES,
    MULTI_REP_MODES,
    SINGLE_REP_MODES,
    multirep_from_record,
    pooled_record,
    search_multirep,
)
from .pipeline import PipelineConfig, read_corpus, read_queries, run_pipeline
from .records import load_records, write_records
from .runs import RunList, read_run_file, write_run_file
from .sparse_index import (
    build_sparse_index,
    dump_postings,
    load_sparse_index,
    save_sparse_index,
    search_sparse,
)
from .sparsifier import SparsifierConfig, VocabTokenizer, sparsify_record

EXIT_DATA = 3
EXIT_CONFIG = 4
EXIT_BUILD = 5


def _add_sparsifier_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--top-k", type=int, default=128, help="max sparse terms per text")
    parser.add_argument("--quant-scale", type=int, default=100, help="quantization scale")


def _sparsifier_config(args: argparse.Namespace) -> SparsifierConfig:
    return SparsifierConfig(top_k=args.top_k, quant_scale=args.quant_scale)


def _texts_map(path: str | None, fmt: str) -> dict[str, str]:
    if path is None:
        return {}
    rows = read_corpus(path) if fmt == "corpus" else read_queries(path)
    return dict(rows)


def _sparse_reps(args: argparse.Namespace, records, texts: dict[str, str]):
    config = _sparsifier_config(args)
    tokenizer = VocabTokenizer.from_json_file(args.vocab) if args.vocab else None
    reps = []
    for rec in records:
        text = texts.get(rec.id)
        if rec.logit_vector is not None and text is None:
            raise ConfigError(
                f"record {rec.id!r} has full-vocabulary logits; pass --texts (and --vocab) "
                "so its token keys can be computed"
            )
        reps.append((rec.id, sparsify_record(rec, config, tokenizer, text)))
    return reps


def _cmd_encode_mock(args: argparse.Namespace) -> int:
    if args.corpus:
        items = read_corpus(args.corpus)
    else:
        items = read_queries(args.queries)
    records = mock_encode(
        items,
        dim=args.dim,
        seed=args.seed,
        emit_tokens=args.emit_tokens,
        token_words=args.token_words,
    )
    write_records(records, args.out)
    print(f"encoded {len(records)} records to {args.out}")
    return 0


def _cmd_index_dense(args: argparse.Namespace) -> int:
    records = load_records(args.records)
    pooled = [pooled_record(r, args.mode) for r in records]
    index = build_dense_index((r.id, r.dense) for r in pooled)
    save_dense_index(index, args.out)
    print(f"indexed {index.doc_count} vectors of dimension {index.dim} to {args.out}")
    return 0


def _cmd_index_sparse(args: argparse.Namespace) -> int:
    records = load_records(args.records)
    pooled = [pooled_record(r, args.mode) for r in records]
    texts = _texts_map(args.texts, args.texts_format)
    index = build_sparse_index(_sparse_reps(args, pooled, texts))
    save_sparse_index(index, args.out)
    print(f"indexed {index.doc_count} documents, {index.token_count} tokens to {args.out}")
    return 0


def _cmd_index_bm25(args: argparse.Namespace) -> int:
    corpus = read_corpus(args.corpus)
    index = build_bm25_index(corpus, k1=args.k1, b=args.b, remove_stopwords=args.remove_stopwords)
    save_bm25_index(index, args.out)
    print(f"indexed {index.doc_count} documents, {len(index.postings)} tokens to {args.out}")
    return 0


def _cmd_search(args: argparse.Namespace) -> int:
    runs: list[RunList] = []
    if args.kind in ("late-dense", "late-sparse"):
        if not args.doc_records or not args.query_records:
            raise ConfigError(f"--kind {args.kind} needs --doc-records and --query-records")
        if args.mode not in MULTI_REP_MODES:
            raise ConfigError(f"--kind {args.kind} needs --mode per-token or per-word")
        config = _sparsifier_config(args)
        kind = args.kind.removeprefix("late-")
        doc_reps = [
            (rec.id, multirep_from_record(rec, args.mode, config))
            for rec in load_records(args.doc_records)
        ]
        for rec in load_records(args.query_records):
            query_rep = multirep_from_record(rec, args.mode, config)
            result = search_multirep(doc_reps, query_rep, kind, args.k)
            runs.append(RunList(rec.id, result.entries))
    elif args.kind == "bm25":
        if not args.index or not args.queries:
            raise ConfigError("--kind bm25 needs --index and --queries")
        index = load_bm25_index(args.index)
        for qid, text in read_queries(args.queries):
            result = search_bm25(index, text, args.k)
            runs.append(RunList(qid, result.entries))
    elif args.kind == "dense":
        if not args.index or not args.query_records:
            raise ConfigError("--kind dense needs --index and --query-records")
        if args.mode not in SINGLE_REP_MODES:
            raise ConfigError("--kind dense needs a pooled --mode")
        index = load_dense_index(args.index)
        for rec in load_records(args.query_records):
            pooled = pooled_record(rec, args.mode)
            result = search_dense(index, pooled.dense, args.k)
            runs.append(RunList(rec.id, result.entries))
    elif args.kind == "sparse":
        if not args.index or not args.query_records:
            raise ConfigError("--kind sparse needs --index and --query-records")
        if args.mode not in SINGLE_REP_MODES:
            raise ConfigError("--kind sparse needs a pooled --mode")
        index = load_sparse_index(args.index)
        pooled = [pooled_record(r, args.mode) for r in load_records(args.query_records)]
        texts = _texts_map(args.texts, args.texts_format)
        for qid, rep in _sparse_reps(args, pooled, texts):
            result = search_sparse(index, rep, args.k)
            runs.append(RunList(qid, result.entries))
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown search kind {args.kind!r}")
    write_run_file(runs, args.out, tag=args.tag)
    print(f"wrote {sum(len(r) for r in runs)} results for {len(runs)} queries to {args.out}")
    return 0


def _cmd_fuse(args: argparse.Namespace) -> int:
    run_lists = [read_run_file(path) for path in args.run]
    if args.weights is not None and len(args.weights) != len(run_lists):
        raise ConfigError(f"got {len(run_lists)} runs but {len(args.weights)} weights")
    fused = fuse_all(run_lists, weights=args.weights, candidate_depth=args.depth)
    write_run_file(fused, args.out, tag=args.tag)
    print(f"fused {len(run_lists)} runs over {len(fused)} queries to {args.out}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    runs = read_run_file(args.run)
    qrels = read_qrels(args.qrels)
    per_query, means = evaluate_runs(
        runs,
        qrels,
        ndcg_k=args.ndcg_k,
        mrr_k=args.mrr_k,
        recall_k=args.recall_k,
        min_grade=args.min_grade,
    )
    if args.per_query:
        print(format_metrics_table(per_query, means), end="")
    else:
        for name, value in means.items():
            print(f"{name}\t{value:.6f}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    runs_a = read_run_file(args.run_a)
    runs_b = read_run_file(args.run_b)
    qrels = read_qrels(args.qrels)
    if args.grid:
        try:
            grid = [float(x) for x in args.grid.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"--grid must be a comma-separated list of numbers: {args.grid!r}") from None
    else:
        steps = round(1.0 / args.step)
        grid = [i * args.step for i in range(steps + 1)]
        grid[-1] = 1.0
    results = weight_sweep(
        runs_a,
        runs_b,
        qrels,
        grid,
        metric=args.metric,
        k=args.k,
        candidate_depth=args.depth,
        min_grade=args.min_grade,
    )
    print(f"weight\t{args.metric}@{args.k}")
    for w, value in results:
        print(f"{w:.2f}\t{value:.6f}")
    best_w, best_v = max(results, key=lambda r: r[1])
    print(f"best\t{best_w:.2f}\t{best_v:.6f}")
    return 0


def _cmd_pipeline(args: argparse.Namespace) -> int:
    if args.config:
        config = PipelineConfig.from_json(args.config)
    else:
        if not args.out_dir:
            raise ConfigError("pipeline needs --out-dir (or a --config file that sets out_dir)")
        config = PipelineConfig(out_dir=args.out_dir)
    config = config.override(
        corpus=args.corpus,
        queries=args.queries,
        qrels=args.qrels,
        doc_records=args.doc_records,
        query_records=args.query_records,
        vocab=args.vocab,
        out_dir=args.out_dir,
        mode=args.mode,
        depth=args.depth,
        candidate_depth=args.candidate_depth,
        weights=args.weights,
        bm25=True if args.bm25 else None,
        dim=args.dim,
        seed=args.seed,
        tag=args.tag,
    )
    if config.mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {config.mode!r}")
    results = run_pipeline(config)
    if results:
        metric_names = list(next(iter(results.values())))
        print("leg\t" + "\t".join(metric_names))
        for leg, means in results.items():
            print(leg + "\t" + "\t".join(f"{means[m]:.6f}" for m in metric_names))
    else:
        print(f"pipeline artifacts written to {config.out_dir}")
    return 0


def _cmd_dump(args: argparse.Namespace) -> int:
    with open(args.index, "rb") as fh:
        magic = fh.read(4)
    if magic == b"RSIX":
        index = load_sparse_index(args.index)
        print(dump_postings(index, limit=args.limit), end="")
    elif magic == b"RDIX":
        dense = load_dense_index(args.index)
        print(f"documents: {dense.doc_count}")
        print(f"dimension: {dense.dim}")
        for doc_id in dense.doc_ids[: args.limit]:
            print(doc_id)
    elif magic == b"RBMX":
        bm25 = load_bm25_index(args.index)
        print(f"documents: {bm25.doc_count}")
        print(f"tokens: {len(bm25.postings)}")
        print(f"avgdl: {bm25.avgdl:.6f}")
        print(f"k1: {bm25.k1} b: {bm25.b} remove_stopwords: {bm25.remove_stopwords}")
        for token in sorted(bm25.postings)[: args.limit]:
            entries = " ".join(f"{bm25.doc_ids[o]}:{tf}" for o, tf in bm25.postings[token])
            print(f"{token}\t{entries}")
    else:
        raise ParseError("unrecognized index file (unknown magic)", args.index)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="repsearch",
        description="Hybrid dense/sparse retrieval over per-text model representations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode-mock", help="encode texts with the deterministic mock encoder")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus", help="JSONL corpus to encode")
    src.add_argument("--queries", help="TSV queries to encode")
    p.add_argument("--out", required=True, help="output records JSONL")
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--emit-tokens", action="store_true", help="emit per-token sub-records")
    p.add_argument("--token-words", type=int, default=3, help="words covered by token sub-records")
    p.set_defaults(func=_cmd_encode_mock)

    p = sub.add_parser("index-dense", help="build the flat cosine index")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=SINGLE_REP_MODES, default="first-token")
    p.set_defaults(func=_cmd_index_dense)

    p = sub.add_parser("index-sparse", help="build the impact-weighted inverted index")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=SINGLE_REP_MODES, default="first-token")
    _add_sparsifier_flags(p)
    p.add_argument("--vocab", help="token->id JSON, needed for full-vocabulary logit arrays")
    p.add_argument("--texts", help="source texts file for full-vocabulary logit arrays")
    p.add_argument("--texts-format", choices=("corpus", "queries"), default="corpus")
    p.set_defaults(func=_cmd_index_sparse)

    p = sub.add_parser("index-bm25", help="build the lexical BM25 index")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k1", type=float, default=0.9)
    p.add_argument("--b", type=float, default=0.4)
    p.add_argument("--remove-stopwords", action="store_true")
    p.set_defaults(func=_cmd_index_bm25)

    p = sub.add_parser("search", help="run queries against an index")
    p.add_argument(
        "--kind",
        required=True,
        choices=("dense", "sparse", "bm25", "late-dense", "late-sparse"),
    )
    p.add_argument("--index", help="index file (dense, sparse and bm25 kinds)")
    p.add_argument("--query-records", help="query records JSONL (dense, sparse, late kinds)")
    p.add_argument("--doc-records", help="document records JSONL (late kinds)")
    p.add_argument("--queries", help="TSV queries (bm25 kind)")
    p.add_argument("--mode", choices=MODES, default="first-token")
    _add_sparsifier_flags(p)
    p.add_argument("--vocab")
    p.add_argument("--texts")
    p.add_argument("--texts-format", choices=("corpus", "queries"), default="queries")
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.add_argument("--tag", default="repsearch")
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("fuse", help="min-max normalize and combine runs")
    p.add_argument("--run", action="append", required=True, help="run file (repeatable)")
    p.add_argument("--weights", type=float, nargs="+")
    p.add_argument("--depth", type=int, default=1000, help="candidate depth per run")
    p.add_argument("--out", required=True)
    p.add_argument("--tag", default="repsearch-fused")
    p.set_defaults(func=_cmd_fuse)

    p = sub.add_parser("evaluate", help="score a run against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--ndcg-k", type=int, default=10)
    p.add_argument("--mrr-k", type=int, default=10)
    p.add_argument("--recall-k", type=int, default=1000)
    p.add_argument("--min-grade", type=int, default=1, help="grade counted as relevant")
    p.add_argument("--per-query", action="store_true")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("sweep", help="sweep the two-way fusion weight")
    p.add_argument("--run-a", required=True)
    p.add_argument("--run-b", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--grid", help="comma-separated weights for run A")
    p.add_argument("--step", type=float, default=0.1, help="grid step when --grid is absent")
    p.add_argument("--metric", choices=("ndcg", "mrr", "recall"), default="ndcg")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--depth", type=int, default=1000)
    p.add_argument("--min-grade", type=int, default=1)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("pipeline", help="run the full encode/index/search/fuse/evaluate flow")
    p.add_argument("--config", help="JSON pipeline config; flags override it")
    p.add_argument("--corpus")
    p.add_argument("--queries")
    p.add_argument("--qrels")
    p.add_argument("--doc-records")
    p.add_argument("--query-records")
    p.add_argument("--vocab")
    p.add_argument("--out-dir")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--depth", type=int)
    p.add_argument("--candidate-depth", type=int)
    p.add_argument("--weights", type=float, nargs="+")
    p.add_argument("--bm25", action="store_true", help="add the BM25 leg")
    p.add_argument("--dim", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tag")
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("dump", help="print an index file in readable form")
    p.add_argument("--index", required=True)
    p.add_argument("--limit", type=int, default=None, help="max tokens or doc ids to print")
    p.set_defaults(func=_cmd_dump)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("REPSEARCH_LOG", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BuildError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUILD
    except RepSearchError as exc:  # pragma: no cover - safety net
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
