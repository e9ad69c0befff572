"""Inverted index: exact scoring, tie order, binary round-trip."""

import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from repsearch.errors import BuildError, ParseError
from repsearch.sparse_index import (
    SparseIndexer,
    build_sparse_index,
    dump_postings,
    load_sparse_index,
    save_sparse_index,
    search_sparse,
)


def brute_force(docs, query, k):
    """Reference scoring: plain dict dot products, positive only."""
    scored = []
    for doc_id, rep in docs:
        score = sum(w * rep.get(t, 0) for t, w in query.items())
        if score > 0:
            scored.append((doc_id, score))
    scored.sort(key=lambda p: (-p[1], p[0]))
    return [(d, float(s)) for d, s in scored[:k]]


def random_docs(rng, n_docs, vocab_size=50, max_terms=8, max_weight=300):
    vocab = [f"t{i}" for i in range(vocab_size)]
    docs = []
    for i in range(n_docs):
        n_terms = int(rng.integers(0, max_terms + 1))
        terms = rng.choice(vocab, size=n_terms, replace=False)
        rep = {t: int(rng.integers(1, max_weight)) for t in terms}
        docs.append((f"d{i:05d}", rep))
    return docs, vocab


class TestWorkedExample:
    def test_two_docs(self):
        index = build_sparse_index(
            [("d1", {"fox": 92, "dog": 80}), ("d2", {"cat": 70, "fox": 10})]
        )
        run = search_sparse(index, {"fox": 2}, k=10)
        assert run.entries == [("d1", 184.0), ("d2", 20.0)]

    def test_no_overlap_returns_nothing(self):
        index = build_sparse_index([("d1", {"fox": 92})])
        assert search_sparse(index, {"cat": 5}, k=10).entries == []


class TestExactness:
    def test_matches_brute_force_with_ties(self):
        """Exact agreement with reference scoring, tie order included.

        Weights are drawn from a tiny set so score ties are common."""
        rng = np.random.default_rng(42)
        docs = []
        for i in range(400):
            terms = rng.choice([f"t{j}" for j in range(12)], size=int(rng.integers(1, 5)), replace=False)
            docs.append((f"d{i:04d}", {t: int(rng.integers(1, 4)) for t in terms}))
        index = build_sparse_index(docs)
        for _ in range(30):
            q_terms = rng.choice([f"t{j}" for j in range(12)], size=int(rng.integers(1, 4)), replace=False)
            query = {t: int(rng.integers(1, 4)) for t in q_terms}
            k = int(rng.integers(1, 30))
            assert search_sparse(index, query, k).entries == brute_force(docs, query, k)

    def test_build_order_does_not_change_results(self):
        rng = np.random.default_rng(7)
        docs, vocab = random_docs(rng, 200)
        shuffled = list(docs)
        rng.shuffle(shuffled)
        a, b = build_sparse_index(docs), build_sparse_index(shuffled)
        query = {vocab[0]: 3, vocab[1]: 1, vocab[2]: 7}
        assert search_sparse(a, query, 50).entries == search_sparse(b, query, 50).entries

    def test_k_larger_than_hits(self):
        index = build_sparse_index([("d1", {"a": 1})])
        assert len(search_sparse(index, {"a": 1}, k=100)) == 1

    def test_empty_query(self):
        index = build_sparse_index([("d1", {"a": 1})])
        assert search_sparse(index, {}, k=5).entries == []


class TestBuildValidation:
    def test_duplicate_doc_id(self):
        with pytest.raises(BuildError):
            build_sparse_index([("d1", {"a": 1}), ("d1", {"b": 2})])

    @pytest.mark.parametrize("rep", [{"a": 0}, {"a": -3}, {"a": 1.5}, {"": 2}])
    def test_invalid_weights(self, rep):
        with pytest.raises(BuildError):
            build_sparse_index([("d1", rep)])

    def test_empty_rep_is_allowed(self):
        index = build_sparse_index([("d1", {})])
        assert index.doc_count == 1


class TestSerialization:
    def test_round_trip_preserves_search(self, tmp_path):
        rng = np.random.default_rng(3)
        docs, vocab = random_docs(rng, 150)
        index = build_sparse_index(docs)
        path = str(tmp_path / "sparse.idx")
        save_sparse_index(index, path)
        loaded = load_sparse_index(path)
        query = {vocab[5]: 2, vocab[6]: 9}
        assert search_sparse(loaded, query, 20).entries == search_sparse(index, query, 20).entries
        assert loaded.doc_ids == index.doc_ids

    def test_serialization_is_deterministic(self, tmp_path):
        index = build_sparse_index([("d1", {"b": 2, "a": 1}), ("d2", {"a": 5})])
        p1, p2 = str(tmp_path / "a.idx"), str(tmp_path / "b.idx")
        save_sparse_index(index, p1)
        save_sparse_index(load_sparse_index(p1), p2)
        assert open(p1, "rb").read() == open(p2, "rb").read()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.idx"
        path.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(ParseError):
            load_sparse_index(str(path))

    def test_truncated_file(self, tmp_path):
        index = build_sparse_index([("d1", {"a": 1})])
        path = str(tmp_path / "sparse.idx")
        save_sparse_index(index, path)
        raw = open(path, "rb").read()
        open(path, "wb").write(raw[:-3])
        with pytest.raises(ParseError):
            load_sparse_index(path)

    def test_unicode_doc_ids_and_tokens(self, tmp_path):
        index = build_sparse_index([("документ", {"naïve": 7})])
        path = str(tmp_path / "sparse.idx")
        save_sparse_index(index, path)
        loaded = load_sparse_index(path)
        assert search_sparse(loaded, {"naïve": 1}, 5).entries == [("документ", 7.0)]


class TestDump:
    def test_listing(self):
        index = build_sparse_index([("d1", {"fox": 92}), ("d2", {"fox": 10, "cat": 3})])
        text = dump_postings(index)
        assert "documents: 2" in text
        assert "fox\td1:92 d2:10" in text

    def test_limit(self):
        index = build_sparse_index([("d1", {"a": 1, "b": 2, "c": 3})])
        text = dump_postings(index, limit=1)
        assert "a\t" in text and "b\t" not in text


class TestEstimator:
    def test_fit_search(self):
        est = SparseIndexer().fit([{"fox": 92}, {"fox": 10}], ["d1", "d2"])
        assert est.search({"fox": 2}, k=1).entries == [("d1", 184.0)]

    def test_default_ids(self):
        est = SparseIndexer().fit([{"a": 1}])
        assert est.search({"a": 1}, k=1).entries == [("0", 1.0)]

    def test_length_mismatch(self):
        with pytest.raises(BuildError):
            SparseIndexer().fit([{"a": 1}], ["d1", "d2"])

    def test_search_before_fit(self):
        with pytest.raises(NotFittedError):
            SparseIndexer().search({"a": 1})
