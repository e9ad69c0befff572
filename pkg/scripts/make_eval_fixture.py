#!/usr/bin/env python3
"""Generate the metrics cross-check fixture under tests/fixtures/eval/.

Self-contained on purpose: this script must not import the package it is
used to check. It writes a 10-query qrels file, a run file in the standard
six-column format, and an expected-values table computed with its own
implementation of the usual graded-relevance conventions:

- ndcg@10 with gain 2^grade - 1 and discount log2(rank + 1); queries whose
  ideal DCG is zero score 0 and still count in the mean
- mrr@10 over documents with grade >= 1
- recall@1000 over grade >= 1, and a second column over grade >= 2
- means over every query in the qrels (a query with no run rows scores 0)

Deliberate edge cases: q03 has only grade-0 judgments, q07 has judgments but
no run rows, and q09's relevant documents sit outside the top 10.
"""

import os
import random


def ndcg_at_k(ranked, grades, k):
    import math

    dcg = 0.0
    for rank, doc in enumerate(ranked[:k], start=1):
        g = grades.get(doc, 0)
        if g > 0:
            dcg += (2**g - 1) / math.log2(rank + 1)
    ideal = sorted((g for g in grades.values() if g > 0), reverse=True)
    idcg = 0.0
    for rank, g in enumerate(ideal[:k], start=1):
        idcg += (2**g - 1) / math.log2(rank + 1)
    return dcg / idcg if idcg > 0 else 0.0


def mrr_at_k(ranked, grades, k, min_grade):
    for rank, doc in enumerate(ranked[:k], start=1):
        if grades.get(doc, 0) >= min_grade:
            return 1.0 / rank
    return 0.0


def recall_at_k(ranked, grades, k, min_grade):
    relevant = {d for d, g in grades.items() if g >= min_grade}
    if not relevant:
        return 0.0
    return sum(1 for d in ranked[:k] if d in relevant) / len(relevant)


def main():
    out_dir = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures", "eval")
    os.makedirs(out_dir, exist_ok=True)
    rng = random.Random(7)
    pool = [f"D{i:03d}" for i in range(120)]
    qids = [f"q{i:02d}" for i in range(1, 11)]

    qrels = {}
    for qid in qids:
        judged = rng.sample(pool, 30)
        grades = {}
        for doc in judged:
            grades[doc] = rng.choices([0, 1, 2, 3], weights=[5, 3, 2, 1])[0]
        if qid == "q03":
            grades = {doc: 0 for doc in grades}
        qrels[qid] = grades

    runs = {}
    for qid in qids:
        if qid == "q07":
            continue
        candidates = rng.sample(pool, 50)
        if qid == "q09":
            # Push every relevant judged document out of the first ten ranks.
            relevant = [d for d, g in qrels[qid].items() if g >= 1]
            head = [d for d in candidates[:20] if d not in relevant]
            tail = [d for d in candidates if d not in head]
            candidates = head[:15] + tail
        scored = [(doc, round(rng.uniform(0.5, 10.0), 4)) for doc in candidates]
        scored.sort(key=lambda p: (-p[1], p[0]))
        runs[qid] = scored

    with open(os.path.join(out_dir, "fixture.qrels"), "w", encoding="utf-8") as fh:
        for qid in qids:
            for doc in sorted(qrels[qid]):
                fh.write(f"{qid} 0 {doc} {qrels[qid][doc]}\n")

    with open(os.path.join(out_dir, "fixture.trec"), "w", encoding="utf-8") as fh:
        for qid in qids:
            for rank, (doc, score) in enumerate(runs.get(qid, []), start=1):
                fh.write(f"{qid} Q0 {doc} {rank} {score:.6f} evalfix\n")

    header = ["query", "ndcg@10", "mrr@10", "recall@1000", "recall_min2@1000"]
    rows = []
    sums = [0.0, 0.0, 0.0, 0.0]
    for qid in qids:
        ranked = [doc for doc, _ in runs.get(qid, [])]
        grades = qrels[qid]
        values = [
            ndcg_at_k(ranked, grades, 10),
            mrr_at_k(ranked, grades, 10, 1),
            recall_at_k(ranked, grades, 1000, 1),
            recall_at_k(ranked, grades, 1000, 2),
        ]
        for i, v in enumerate(values):
            sums[i] += v
        rows.append([qid] + [f"{v:.6f}" for v in values])
    rows.append(["mean"] + [f"{s / len(qids):.6f}" for s in sums])

    with open(os.path.join(out_dir, "expected.tsv"), "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(row) + "\n")

    print(f"wrote fixture to {os.path.abspath(out_dir)}")
    for row in rows:
        print("  ", "\t".join(row))


if __name__ == "__main__":
    main()
