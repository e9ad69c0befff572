"""Turning raw next-token logits into integer-weighted sparse representations.

The pipeline, applied identically to documents and queries:

1. Lowercase the text and split it into words, dropping stopwords and
   punctuation tokens.
2. Expand each surviving word into its sub-token strings with the model's
   tokenizer (no special tokens); the union of those strings is the key set.
3. Restrict the logit values to the key set. Records that arrive with
   pair-form logits are already restricted by their producer, so their keys
   are used as-is; full-vocabulary arrays are restricted here against a
   supplied vocabulary.
4. Clamp negatives to zero and compress with log(1 + value).
5. Keep the `top_k` largest strictly positive values (ties broken by token
   string ascending).
6. Quantize each kept value to round-half-even(value * quant_scale) and drop
   anything that lands at zero.

The output maps token string to a positive integer impact weight.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Protocol, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import ConfigError, SchemaError
from .records import RepresentationRecord
from .text import PUNCTUATION, english_stopwords, extract_words
from .validation import check_positive_int

__all__ = [
    "SparseRep",
    "SparsifierConfig",
    "WordPieceTokenizer",
    "WholeWordTokenizer",
    "VocabTokenizer",
    "quantize",
    "token_keys_for_words",
    "restrict_vector",
    "sparsify",
    "sparsify_text",
    "sparsify_record",
    "LogitSparsifier",
]

# Token string -> positive integer impact weight.
SparseRep = dict[str, int]


@dataclass(frozen=True)
class SparsifierConfig:
    """Knobs for the logit sparsification pipeline."""

    top_k: int = 128
    quant_scale: int = 100
    lowercase: bool = True
    stopwords: frozenset[str] | None = None
    punctuation: frozenset[str] = PUNCTUATION

    def __post_init__(self) -> None:
        check_positive_int(self.top_k, "top_k")
        check_positive_int(self.quant_scale, "quant_scale")

    def resolved_stopwords(self) -> frozenset[str]:
        return english_stopwords() if self.stopwords is None else self.stopwords


class WordPieceTokenizer(Protocol):
    """Anything that can split a word into the model's sub-token strings."""

    def tokenize_word(self, word: str) -> list[str]: ...


class WholeWordTokenizer:
    """Trivial tokenizer: every word is a single token. Used with mock logits."""

    def tokenize_word(self, word: str) -> list[str]:
        return [word]


class VocabTokenizer:
    """Greedy longest-prefix tokenizer over an explicit token->id vocabulary.

    Characters that match no vocabulary entry become single-character tokens
    with no id; they simply never match any logit entry downstream.
    """

    def __init__(self, vocab: Mapping[str, int]):
        if not vocab:
            raise ConfigError("vocabulary must not be empty")
        self._vocab = dict(vocab)
        self._max_len = max(len(t) for t in self._vocab)

    @classmethod
    def from_json_file(cls, path: str) -> "VocabTokenizer":
        """Load a {token: id} mapping from a JSON file."""
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        if not isinstance(obj, dict):
            raise SchemaError("vocabulary file must contain a JSON object", path)
        for token, idx in obj.items():
            if isinstance(idx, bool) or not isinstance(idx, int) or idx < 0:
                raise SchemaError(f"vocabulary id for {token!r} must be a non-negative integer", path)
        return cls(obj)

    def tokenize_word(self, word: str) -> list[str]:
        tokens: list[str] = []
        pos = 0
        while pos < len(word):
            best = None
            limit = min(len(word), pos + self._max_len)
            for end in range(limit, pos, -1):
                cand = word[pos:end]
                if cand in self._vocab:
                    best = cand
                    break
            if best is None:
                best = word[pos]
            tokens.append(best)
            pos += len(best)
        return tokens

    def token_id(self, token: str) -> int | None:
        return self._vocab.get(token)


def quantize(value: float, scale: int) -> int:
    """Round-half-to-even of value * scale, as an int."""
    return int(np.rint(value * scale))


def token_keys_for_words(words: Iterable[str], tokenizer: WordPieceTokenizer) -> set[str]:
    """Union of sub-token strings over all words."""
    keys: set[str] = set()
    for word in words:
        keys.update(tokenizer.tokenize_word(word))
    return keys


def restrict_vector(
    vector: np.ndarray, keys: Iterable[str], tokenizer: VocabTokenizer
) -> dict[str, float]:
    """Pick the logit values for `keys` out of a full-vocabulary array."""
    out: dict[str, float] = {}
    for key in sorted(keys):
        idx = tokenizer.token_id(key)
        if idx is None:
            continue
        if idx >= vector.shape[0]:
            raise SchemaError(
                f"vocabulary id {idx} for token {key!r} is outside the logit array "
                f"of length {vector.shape[0]}"
            )
        out[key] = float(vector[idx])
    return out


def sparsify(entries: Mapping[str, float], config: SparsifierConfig = SparsifierConfig()) -> SparseRep:
    """Apply steps 4-6 to already-restricted logit values."""
    saturated = [(token, math.log1p(value)) for token, value in entries.items() if value > 0]
    saturated.sort(key=lambda kv: (-kv[1], kv[0]))
    rep: SparseRep = {}
    for token, value in saturated[: config.top_k]:
        weight = quantize(value, config.quant_scale)
        if weight >= 1:
            rep[token] = weight
    return rep


def sparsify_text(
    text: str,
    logits: Mapping[str, float] | np.ndarray,
    config: SparsifierConfig = SparsifierConfig(),
    tokenizer: WordPieceTokenizer | None = None,
) -> SparseRep:
    """Run the full pipeline for one text.

    With mapping-form logits the mapping's own keys are the restriction (the
    producer already intersected them with the text's token keys). An array
    of full-vocabulary logits requires a VocabTokenizer to resolve token ids,
    and the restriction is computed here from `text`.
    """
    if isinstance(logits, np.ndarray):
        if not isinstance(tokenizer, VocabTokenizer):
            raise ConfigError("full-vocabulary logits require a VocabTokenizer")
        words = extract_words(
            text,
            stopwords=config.resolved_stopwords(),
            punctuation=config.punctuation,
            lowercase=config.lowercase,
        )
        keys = token_keys_for_words(words, tokenizer)
        entries = restrict_vector(logits, keys, tokenizer)
    else:
        entries = dict(logits)
    return sparsify(entries, config)


def sparsify_record(
    record: RepresentationRecord,
    config: SparsifierConfig = SparsifierConfig(),
    tokenizer: WordPieceTokenizer | None = None,
    text: str | None = None,
) -> SparseRep:
    """Sparsify one record, choosing the path its logits form requires."""
    if record.logit_vector is not None:
        if text is None:
            raise ConfigError(
                f"record {record.id!r} carries full-vocabulary logits; the source text "
                "is required to compute its token keys"
            )
        return sparsify_text(text, record.logit_vector, config, tokenizer)
    return sparsify(record.logits, config)


class LogitSparsifier(TransformerMixin, BaseEstimator):
    """Estimator wrapper around the sparsification pipeline.

    Stateless in the sklearn sense: `fit` only validates and freezes the
    configuration, `transform` maps records (or raw restricted logit
    mappings) to sparse representations.
    """

    def __init__(
        self,
        top_k: int = 128,
        quant_scale: int = 100,
        lowercase: bool = True,
        stopwords: frozenset[str] | None = None,
    ):
        self.top_k = top_k
        self.quant_scale = quant_scale
        self.lowercase = lowercase
        self.stopwords = stopwords

    def fit(self, X=None, y=None) -> "LogitSparsifier":
        self.config_ = SparsifierConfig(
            top_k=self.top_k,
            quant_scale=self.quant_scale,
            lowercase=self.lowercase,
            stopwords=self.stopwords,
        )
        return self

    def transform(self, X: Sequence[RepresentationRecord | Mapping[str, float]]) -> list[SparseRep]:
        check_is_fitted(self, "config_")
        out: list[SparseRep] = []
        for item in X:
            if isinstance(item, RepresentationRecord):
                out.append(sparsify_record(item, self.config_))
            else:
                out.append(sparsify(item, self.config_))
        return out
