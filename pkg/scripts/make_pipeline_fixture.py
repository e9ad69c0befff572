#!/usr/bin/env python3
"""Build the end-to-end pipeline fixture and its golden outputs.

Constructs a 50-document / 10-query corpus for the mock encoder in which the
dense and sparse retrieval legs are deliberately complementary, so that their
fusion ranks strictly better than either leg alone:

- Each query is three invented words [qa, qb, qc] whose shared encoder base
  weights fall in controlled bands (qa high, qb low, qc middling).
- Per query bucket, five documents:
    L  all three query words + 12 unique fillers  (relevant; sparse winner,
       dense diluted by the fillers)
    S  qb and qc only                              (relevant; dense winner,
       mid sparse score)
    X  qa and qc + 18 fillers                      (not relevant; second in
       sparse because qa carries a high weight, buried in dense)
    D  the single word qb                          (not relevant; strong dense
       cosine ~ 1/sqrt(3), lowest positive sparse score, which keeps S off
       the min-max floor)
    F  5 fillers only                              (not relevant; absent from
       the sparse run entirely)
- Expected shape: sparse ranks L > X > S > D; dense puts S first with L
  diluted; min-max fusion puts the two relevant docs (L, S) on top.

The script probes encoder word weights for successive trial seeds until the
hybrid's mean nDCG@10 beats the best single leg by a clear margin and the
per-bucket orderings come out as designed, then freezes the corpus, queries,
qrels, golden run files, and the chosen parameters under
tests/fixtures/pipeline/.

Run from the repository root:  python3 scripts/make_pipeline_fixture.py
"""

import itertools
import json
import random
import shutil
import sys
import tempfile
from pathlib import Path

from repsearch.evaluation import read_qrels, write_qrels
from repsearch.mock_encoder import stable_seed
from repsearch.pipeline import PipelineConfig, run_pipeline
from repsearch.runs import read_run_file
from repsearch.text import english_stopwords

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "tests" / "fixtures" / "pipeline"

DIM = 64
DEPTH = 1000
MARGIN = 0.02
N_BUCKETS = 10

SYLLABLES = [
    "ba", "ce", "di", "fo", "gu", "ka", "le", "mi", "no", "pu",
    "ra", "se", "ti", "vo", "wa", "ze", "bra", "cle", "dro", "fin",
    "gle", "hor", "ket", "lun", "mar", "nel", "pol", "qua", "rin", "sol",
]


def word_base(word, seed):
    """The encoder's shared per-word weight before per-text jitter."""
    rng = np.random.default_rng(stable_seed("logitbase", seed, word))
    return -0.5 + 7.0 * float(rng.random())


def word_stream():
    """Deterministic endless supply of pronounceable non-stopword tokens."""
    rng = random.Random(13)
    stop = english_stopwords()
    seen = set()
    while True:
        n = rng.choice((2, 2, 3))
        word = "".join(rng.choice(SYLLABLES) for _ in range(n))
        if word in stop or word in seen:
            continue
        seen.add(word)
        yield word


def pick_word(stream, seed, lo, hi):
    for word in stream:
        if lo <= word_base(word, seed) <= hi:
            return word
    raise RuntimeError("unreachable")


def build_inputs(seed, target):
    """Write corpus/queries/qrels for one trial seed into `target`."""
    stream = word_stream()
    take = lambda n: list(itertools.islice(stream, n))
    corpus, queries, qrels = [], [], {}
    for i in range(1, N_BUCKETS + 1):
        qa = pick_word(stream, seed, 4.5, 5.5)
        qb = pick_word(stream, seed, 1.8, 2.4)
        qc = pick_word(stream, seed, 2.6, 3.2)
        qid = f"q{i:02d}"
        queries.append((qid, f"{qa} {qb} {qc}"))
        docs = {
            f"d{i:02d}L": [qa, qb, qc] + take(12),
            f"d{i:02d}S": [qb, qc],
            f"d{i:02d}X": [qa, qc] + take(18),
            f"d{i:02d}D": [qb],
            f"d{i:02d}F": take(5),
        }
        for doc_id, words in docs.items():
            corpus.append((doc_id, " ".join(words)))
        qrels[qid] = {
            f"d{i:02d}L": 2,
            f"d{i:02d}S": 2,
            f"d{i:02d}X": 0,
            f"d{i:02d}D": 0,
        }
    target.mkdir(parents=True, exist_ok=True)
    with open(target / "corpus.jsonl", "w", encoding="utf-8") as fh:
        for doc_id, text in corpus:
            fh.write(json.dumps({"_id": doc_id, "text": text}) + "\n")
    with open(target / "queries.tsv", "w", encoding="utf-8") as fh:
        for qid, text in queries:
            fh.write(f"{qid}\t{text}\n")
    write_qrels(qrels, target / "fixture.qrels")


def run_trial(seed, in_dir, out_dir):
    config = PipelineConfig(
        out_dir=str(out_dir),
        corpus=str(in_dir / "corpus.jsonl"),
        queries=str(in_dir / "queries.tsv"),
        qrels=str(in_dir / "fixture.qrels"),
        dim=DIM,
        seed=seed,
        depth=DEPTH,
        tag="golden",
    )
    return run_pipeline(config)


def sparse_shape_ok(out_dir):
    """Every bucket's sparse run must be exactly [L, X, S, D]."""
    for run in read_run_file(out_dir / "runs" / "sparse.trec"):
        i = run.query_id[1:]
        expected = [f"d{i}L", f"d{i}X", f"d{i}S", f"d{i}D"]
        if run.doc_ids() != expected:
            return False
    return True


def dense_shape_ok(out_dir):
    """S should win the dense leg in the large majority of buckets."""
    wins = sum(
        1
        for run in read_run_file(out_dir / "runs" / "dense.trec")
        if run.doc_ids()[0] == f"d{run.query_id[1:]}S"
    )
    return wins >= 8


def main():
    for seed in range(100):
        with tempfile.TemporaryDirectory() as tmp:
            in_dir, out_dir = Path(tmp) / "in", Path(tmp) / "out"
            build_inputs(seed, in_dir)
            means = run_trial(seed, in_dir, out_dir)
            hybrid = means["hybrid"]["ndcg@10"]
            best_leg = max(means["dense"]["ndcg@10"], means["sparse"]["ndcg@10"])
            ok = (
                hybrid >= best_leg + MARGIN
                and sparse_shape_ok(out_dir)
                and dense_shape_ok(out_dir)
            )
            print(
                f"seed {seed}: dense {means['dense']['ndcg@10']:.4f} "
                f"sparse {means['sparse']['ndcg@10']:.4f} hybrid {hybrid:.4f} "
                f"{'OK' if ok else 'reject'}"
            )
            if not ok:
                continue

            # Determinism check: a second run must be byte-identical.
            rerun = Path(tmp) / "rerun"
            run_trial(seed, in_dir, rerun)
            for name in ("dense", "sparse", "hybrid"):
                a = (out_dir / "runs" / f"{name}.trec").read_bytes()
                b = (rerun / "runs" / f"{name}.trec").read_bytes()
                if a != b:
                    raise RuntimeError(f"{name} run not reproducible at seed {seed}")

            if OUT.exists():
                shutil.rmtree(OUT)
            golden = OUT / "golden"
            golden.mkdir(parents=True)
            for name in ("corpus.jsonl", "queries.tsv", "fixture.qrels"):
                shutil.copy(in_dir / name, OUT / name)
            for name in ("dense", "sparse", "hybrid"):
                shutil.copy(out_dir / "runs" / f"{name}.trec", golden / f"{name}.trec")
            shutil.copy(out_dir / "metrics.tsv", golden / "metrics.tsv")
            with open(OUT / "params.json", "w", encoding="utf-8") as fh:
                json.dump({"seed": seed, "dim": DIM, "depth": DEPTH, "tag": "golden"}, fh)
                fh.write("\n")
            print(f"frozen fixture with seed={seed} dim={DIM} under {OUT}")
            return 0
    print("no acceptable seed found in 100 trials", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
