"""The deterministic stand-in encoder used by fixtures and smoke tests."""

import numpy as np
import pytest

from repsearch.errors import ConfigError
from repsearch.mock_encoder import mock_encode, stable_seed, word_vector
from repsearch.records import serialize_record, parse_record
from repsearch.sparsifier import sparsify_record


class TestDeterminism:
    ITEMS = [("d1", "The quick brown fox"), ("d2", "a lazy dog sleeps")]

    def test_identical_calls_are_bit_identical(self):
        a = mock_encode(self.ITEMS, dim=8, seed=3)
        b = mock_encode(self.ITEMS, dim=8, seed=3)
        assert a == b

    def test_seed_changes_everything(self):
        a = mock_encode(self.ITEMS, dim=8, seed=3)
        b = mock_encode(self.ITEMS, dim=8, seed=4)
        assert not np.array_equal(a[0].dense, b[0].dense)
        assert a[0].logits != b[0].logits

    def test_stable_seed_is_order_sensitive(self):
        assert stable_seed("a", "b") != stable_seed("b", "a")
        assert stable_seed("ab") != stable_seed("a", "b")

    def test_word_vector_depends_on_word_and_seed(self):
        assert not np.array_equal(word_vector("fox", 8, 0), word_vector("dog", 8, 0))
        assert not np.array_equal(word_vector("fox", 8, 0), word_vector("fox", 8, 1))


class TestSchema:
    def test_records_round_trip_through_the_wire_format(self):
        records = mock_encode(
            [("d1", "quick brown fox"), ("d2", "")], dim=6, seed=1, emit_tokens=True
        )
        for rec in records:
            line = serialize_record(rec)
            assert parse_record(line, "mem", 1) == rec

    def test_records_sparsify_cleanly(self):
        records = mock_encode([("d1", "quick brown fox jumps high")], dim=6, seed=2)
        rep = sparsify_record(records[0])
        assert rep  # every kept word has a positive quantized weight
        assert set(rep) <= {"quick", "brown", "fox", "jumps", "high"}

    def test_dense_dim_and_dtype(self):
        rec = mock_encode([("d1", "fox")], dim=12, seed=0)[0]
        assert rec.dense.shape == (12,)
        assert rec.dense.dtype == np.float32


class TestCompositionality:
    def test_dense_is_the_sum_of_word_vectors(self):
        rec = mock_encode([("d1", "quick fox")], dim=8, seed=5)[0]
        expected = word_vector("quick", 8, 5) + word_vector("fox", 8, 5)
        np.testing.assert_allclose(rec.dense, expected.astype(np.float32), atol=1e-6)

    def test_repeated_words_count_each_occurrence(self):
        once = mock_encode([("d1", "fox")], dim=8, seed=5)[0]
        twice = mock_encode([("d1", "fox fox")], dim=8, seed=5)[0]
        np.testing.assert_allclose(twice.dense, once.dense * 2.0, atol=1e-5)

    def test_shared_vocabulary_raises_cosine(self):
        recs = mock_encode(
            [("a", "quick brown fox"), ("b", "quick brown fox jumps"), ("c", "purple sea urchin")],
            dim=32,
            seed=42,
        )
        def cos(x, y):
            x64, y64 = x.astype(np.float64), y.astype(np.float64)
            return float(x64 @ y64 / (np.linalg.norm(x64) * np.linalg.norm(y64)))
        assert cos(recs[0].dense, recs[1].dense) > cos(recs[0].dense, recs[2].dense)

    def test_stopwords_and_case_are_stripped(self):
        rec = mock_encode([("d1", "The FOX and the fox")], dim=8, seed=0)[0]
        assert set(rec.logits) == {"fox"}

    def test_empty_text_still_gets_a_dense_vector(self):
        rec = mock_encode([("d1", "the of and")], dim=8, seed=0)[0]
        assert rec.logits == {}
        assert rec.tokens is None
        assert float(np.linalg.norm(rec.dense)) > 0.0


class TestLogitShape:
    def test_base_value_is_shared_across_texts(self):
        recs = mock_encode([("a", "fox"), ("b", "fox")], dim=4, seed=9)
        # Same word, different texts: values differ only by jitter in [0, 1).
        assert abs(recs[0].logits["fox"] - recs[1].logits["fox"]) < 1.0

    def test_values_stay_in_the_designed_band(self):
        words = " ".join(f"w{i}x" for i in range(200))
        rec = mock_encode([("d", words)], dim=4, seed=0)[0]
        values = np.array(list(rec.logits.values()))
        assert values.min() >= -0.5
        assert values.max() <= 7.5


class TestTokenEmission:
    def test_tokens_follow_the_leading_space_convention(self):
        recs = mock_encode(
            [("d1", "quick brown fox")], dim=4, seed=0, emit_tokens=True, token_words=3
        )
        tokens = recs[0].tokens
        assert tokens is not None
        assert not tokens[0].token.startswith(" ")
        word_starts = [t.token for t in tokens if t.token.startswith(" ")]
        continuations = [t.token for t in tokens[1:] if not t.token.startswith(" ")]
        assert len(word_starts) + 1 + len(continuations) == len(tokens)
        # Three words must produce at least three groups' worth of heads.
        assert len(word_starts) == 2 or len(word_starts) + len(continuations) >= 2

    def test_token_words_caps_the_word_count(self):
        recs = mock_encode(
            [("d1", "alpha bravo cedar delta")], dim=4, seed=0, emit_tokens=True, token_words=2
        )
        covered = set()
        for t in recs[0].tokens:
            covered.update(t.logits)
        assert covered == {"alpha", "bravo"}

    def test_split_pieces_share_the_word_logit_scaled(self):
        # Find a word the splitter actually splits at this seed.
        seed = 0
        for i in range(200):
            word = f"long{i}word"
            recs = mock_encode([("d", word)], dim=4, seed=seed, emit_tokens=True)
            if len(recs[0].tokens) == 2:
                first, second = recs[0].tokens
                assert first.token + second.token == word
                value = recs[0].logits[word]
                assert first.logits[word] == pytest.approx(value)
                assert second.logits[word] == pytest.approx(value * 0.9)
                break
        else:
            pytest.fail("no split word found in 200 candidates")

    def test_no_tokens_without_the_flag(self):
        assert mock_encode([("d1", "fox")], dim=4, seed=0)[0].tokens is None


class TestValidation:
    def test_bad_dim(self):
        with pytest.raises(ConfigError):
            mock_encode([("d", "x")], dim=0)

    def test_bad_token_words(self):
        with pytest.raises(ConfigError):
            mock_encode([("d", "x")], token_words=0)
