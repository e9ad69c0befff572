"""Deterministic hash-seeded stand-in for a real model encoder.

Produces records in the same wire format a model-backed encoder would emit,
without any model: the dense vector of a text is the sum of per-word Gaussian
vectors drawn from hashes of the words, and the logit map assigns each word a
value derived from hashes of the word (shared across texts) plus a small
per-text jitter. Texts sharing vocabulary therefore land near each other in
both the dense and the sparse space, which is all the end-to-end fixtures
need. Everything is keyed by an explicit integer seed, so outputs are
reproducible across platforms and runs.
"""

from __future__ import annotations

import hashlib
import math
from typing import Sequence

import numpy as np

from .records import RepresentationRecord, TokenRecord
from .sparsifier import SparsifierConfig
from .text import extract_words
from .validation import check_positive_int

__all__ = ["stable_seed", "word_vector", "mock_encode"]


def stable_seed(*parts: object) -> int:
    """64-bit seed derived from hashing the string forms of `parts`."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def word_vector(word: str, dim: int, seed: int) -> np.ndarray:
    """Deterministic Gaussian vector for one word."""
    rng = np.random.default_rng(stable_seed("wordvec", seed, word))
    return rng.standard_normal(dim)


def _unit_in(lo: float, hi: float, *parts: object) -> float:
    rng = np.random.default_rng(stable_seed(*parts))
    return lo + (hi - lo) * float(rng.random())


def _word_logit(word: str, text_id: str, seed: int) -> float:
    # The base value is shared across texts so that the same word gets a
    # similar weight everywhere; the jitter keeps documents distinguishable.
    base = _unit_in(-0.5, 6.5, "logitbase", seed, word)
    jitter = _unit_in(0.0, 1.0, "logitjitter", seed, text_id, word)
    return base + jitter


def _split_word(word: str, seed: int) -> list[str]:
    if len(word) >= 6 and stable_seed("split", seed, word) % 3 == 0:
        cut = math.ceil(len(word) / 2)
        return [word[:cut], word[cut:]]
    return [word]


def _token_records(
    words: list[str], text_id: str, dim: int, seed: int, token_words: int
) -> list[TokenRecord] | None:
    tokens: list[TokenRecord] = []
    for i, word in enumerate(words[:token_words]):
        pieces = _split_word(word, seed)
        for j, piece in enumerate(pieces):
            surface = piece if (i == 0 or j > 0) else " " + piece
            value = _word_logit(word, text_id, seed) * (1.0 if j == 0 else 0.9)
            tokens.append(
                TokenRecord(
                    token=surface,
                    dense=word_vector(f"{word}#{j}", dim, seed).astype(np.float32),
                    logits={word: value},
                )
            )
    return tokens or None


def mock_encode(
    items: Sequence[tuple[str, str]],
    dim: int = 16,
    seed: int = 0,
    emit_tokens: bool = False,
    token_words: int = 3,
    config: SparsifierConfig = SparsifierConfig(),
) -> list[RepresentationRecord]:
    """Encode (id, text) pairs into deterministic representation records.

    Logit maps are keyed by the text's own extracted words (pair form, i.e.
    already restricted). A text with no surviving words gets an empty logit
    map and a dense vector hashed from the raw text, so every record stays
    schema-valid.
    """
    check_positive_int(dim, "dim")
    check_positive_int(token_words, "token_words")
    records: list[RepresentationRecord] = []
    for text_id, text in items:
        words = extract_words(
            text,
            stopwords=config.resolved_stopwords(),
            punctuation=config.punctuation,
            lowercase=config.lowercase,
        )
        if words:
            dense = np.sum([word_vector(w, dim, seed) for w in words], axis=0)
        else:
            dense = word_vector(f"TEXT:{text}", dim, seed)
        logits = {w: _word_logit(w, text_id, seed) for w in dict.fromkeys(words)}
        tokens = (
            _token_records(list(dict.fromkeys(words)), text_id, dim, seed, token_words)
            if emit_tokens and words
            else None
        )
        records.append(
            RepresentationRecord(
                id=text_id,
                dense=dense.astype(np.float32),
                logits=logits,
                tokens=tokens,
            )
        )
    return records
