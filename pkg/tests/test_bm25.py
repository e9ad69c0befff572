"""BM25 leg: closed-form oracle agreement and index behavior."""

import math
from collections import Counter

import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from repsearch.bm25 import (
    Bm25Indexer,
    bm25_tokenize,
    build_bm25_index,
    idf,
    load_bm25_index,
    save_bm25_index,
    search_bm25,
)
from repsearch.errors import BuildError, ParseError

DOCS = [
    ("d1", "the quick brown fox jumps over the lazy dog"),
    ("d2", "a lazy dog sleeps all day in the sun"),
    ("d3", "quick thinking wins the day"),
    ("d4", "foxes and dogs are common animals"),
    ("d5", ""),
]


def oracle_scores(doc_texts, query_text, k1, b, remove_stopwords=False):
    """Closed-form BM25 computed from scratch over tokenized texts."""
    token_lists = {d: bm25_tokenize(t, remove_stopwords) for d, t in doc_texts}
    n = len(token_lists)
    lens = {d: len(toks) for d, toks in token_lists.items()}
    avgdl = sum(lens.values()) / n
    tfs = {d: Counter(toks) for d, toks in token_lists.items()}
    scores = {}
    for doc_id in token_lists:
        total = 0.0
        for term in bm25_tokenize(query_text, remove_stopwords):
            tf = tfs[doc_id][term]
            if tf == 0:
                continue
            df = sum(1 for d in tfs if tfs[d][term] > 0)
            term_idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
            denom = tf + k1 * (1.0 - b + b * lens[doc_id] / avgdl)
            total += term_idf * tf * (k1 + 1.0) / denom
        if total > 0:
            scores[doc_id] = total
    return scores


class TestScoring:
    def test_matches_oracle_on_fixed_corpus(self):
        index = build_bm25_index(DOCS)
        for query in ["lazy dog", "quick", "fox dog day", "the quick quick"]:
            run = search_bm25(index, query, k=10)
            expected = oracle_scores(DOCS, query, k1=0.9, b=0.4)
            assert set(run.doc_ids()) == set(expected)
            for doc_id, score in run.entries:
                assert abs(score - expected[doc_id]) < 1e-6

    def test_matches_oracle_on_random_corpus(self):
        rng = np.random.default_rng(42)
        vocab = [f"word{i}" for i in range(30)]
        docs = []
        for i in range(80):
            n_words = int(rng.integers(1, 30))
            words = rng.choice(vocab, size=n_words, replace=True)
            docs.append((f"d{i:03d}", " ".join(words)))
        index = build_bm25_index(docs)
        for _ in range(15):
            q_words = rng.choice(vocab, size=int(rng.integers(1, 5)), replace=True)
            query = " ".join(q_words)
            run = search_bm25(index, query, k=80)
            expected = oracle_scores(docs, query, k1=0.9, b=0.4)
            got = dict(run.entries)
            assert set(got) == set(expected)
            for doc_id in got:
                assert abs(got[doc_id] - expected[doc_id]) < 1e-6

    def test_idf_value(self):
        """N=5, df=2: ln(1 + 3.5/2.5) = ln(2.4)."""
        index = build_bm25_index(DOCS)
        assert abs(idf(index, "lazy") - math.log(2.4)) < 1e-12

    def test_repeated_query_terms_accumulate(self):
        index = build_bm25_index(DOCS)
        once = search_bm25(index, "fox", 10).entries
        twice = search_bm25(index, "fox fox", 10).entries
        assert [d for d, _ in once] == [d for d, _ in twice]
        for (_, s1), (_, s2) in zip(once, twice):
            assert abs(s2 - 2 * s1) < 1e-9

    def test_unrelated_doc_shifts_scores_only_through_stats(self):
        """Adding a non-matching document changes N and avgdl; the oracle
        recomputed with the new statistics still agrees."""
        extended = DOCS + [("d6", "completely unrelated text about pottery")]
        index = build_bm25_index(extended)
        run = search_bm25(index, "lazy dog", 10)
        expected = oracle_scores(extended, "lazy dog", k1=0.9, b=0.4)
        assert "d6" not in run.doc_ids()
        for doc_id, score in run.entries:
            assert abs(score - expected[doc_id]) < 1e-6

    def test_positive_scores_only_and_tie_break(self):
        index = build_bm25_index([("b", "apple"), ("a", "apple"), ("c", "pear")])
        run = search_bm25(index, "apple", 10)
        assert run.doc_ids() == ["a", "b"]

    def test_stopword_toggle(self):
        with_sw = build_bm25_index(DOCS, remove_stopwords=False)
        without_sw = build_bm25_index(DOCS, remove_stopwords=True)
        assert search_bm25(with_sw, "the", 10).entries  # "the" is indexed
        assert search_bm25(without_sw, "the", 10).entries == []

    def test_defaults(self):
        index = build_bm25_index(DOCS)
        assert index.k1 == 0.9
        assert index.b == 0.4
        assert index.remove_stopwords is False


class TestIndexShape:
    def test_empty_doc_has_zero_length(self):
        index = build_bm25_index(DOCS)
        assert index.doc_lens[4] == 0
        assert index.avgdl == pytest.approx(
            sum(len(bm25_tokenize(t)) for _, t in DOCS) / 5
        )

    def test_duplicate_ids_rejected(self):
        with pytest.raises(BuildError):
            build_bm25_index([("d1", "a"), ("d1", "b")])

    def test_bad_parameters_rejected(self):
        with pytest.raises(BuildError):
            build_bm25_index(DOCS, k1=-1.0)
        with pytest.raises(BuildError):
            build_bm25_index(DOCS, b=1.5)


class TestSerialization:
    def test_round_trip(self, tmp_path):
        index = build_bm25_index(DOCS, k1=1.2, b=0.75, remove_stopwords=True)
        path = str(tmp_path / "bm25.idx")
        save_bm25_index(index, path)
        loaded = load_bm25_index(path)
        assert loaded.k1 == 1.2
        assert loaded.b == 0.75
        assert loaded.remove_stopwords is True
        assert loaded.doc_ids == index.doc_ids
        assert loaded.doc_lens == index.doc_lens
        assert loaded.postings == index.postings
        q = "lazy dog"
        assert search_bm25(loaded, q, 10).entries == search_bm25(index, q, 10).entries

    def test_deterministic_bytes(self, tmp_path):
        p1, p2 = str(tmp_path / "a.idx"), str(tmp_path / "b.idx")
        save_bm25_index(build_bm25_index(DOCS), p1)
        save_bm25_index(load_bm25_index(p1), p2)
        assert open(p1, "rb").read() == open(p2, "rb").read()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "x.idx"
        path.write_bytes(b"ZZZZ" + b"\x00" * 30)
        with pytest.raises(ParseError):
            load_bm25_index(str(path))


class TestEstimator:
    def test_fit_search(self):
        est = Bm25Indexer().fit([t for _, t in DOCS], [d for d, _ in DOCS])
        assert est.search("lazy dog", 1).doc_ids() == [
            search_bm25(build_bm25_index(DOCS), "lazy dog", 1).doc_ids()[0]
        ]

    def test_params_flow_into_index(self):
        est = Bm25Indexer(k1=1.6, b=0.1).fit(["a b", "b c"])
        assert est.index_.k1 == 1.6
        assert est.index_.b == 0.1

    def test_search_before_fit(self):
        with pytest.raises(NotFittedError):
            Bm25Indexer().search("q")
