"""Self-contained word tokenization and the English stopword list.

The tokenizer splits on whitespace and peels ASCII punctuation characters off
the edges of each chunk, emitting each peeled character as its own token.
Interior punctuation is kept, so contractions ("don't") and hyphenated words
("state-of-the-art") survive as single tokens. This matches the behaviour the
rest of the package assumes when it filters out stopword and punctuation
tokens before scoring.

The stopword list is a snapshot of the standard 179-word English list shipped
as package data, so no external corpus download is needed.
"""

from __future__ import annotations

import string
from functools import lru_cache
from importlib import resources

PUNCTUATION: frozenset[str] = frozenset(string.punctuation)


@lru_cache(maxsize=1)
def english_stopwords() -> frozenset[str]:
    """Return the built-in English stopword list as a frozenset."""
    data = resources.files("repsearch.data").joinpath("english_stopwords.txt")
    words = data.read_text(encoding="utf-8").split("\n")
    return frozenset(w for w in words if w)


def tokenize(text: str, punctuation: frozenset[str] = PUNCTUATION) -> list[str]:
    """Split text into word and punctuation tokens.

    Whitespace separates chunks. Leading and trailing characters of a chunk
    that belong to `punctuation` become single-character tokens in their
    original order; the remaining core is one token. A chunk made entirely of
    punctuation yields only single-character tokens.
    """
    tokens: list[str] = []
    for chunk in text.split():
        start = 0
        end = len(chunk)
        while start < end and chunk[start] in punctuation:
            start += 1
        while end > start and chunk[end - 1] in punctuation:
            end -= 1
        tokens.extend(chunk[:start])
        if end > start:
            tokens.append(chunk[start:end])
        tokens.extend(chunk[end:])
    return tokens


def extract_words(
    text: str,
    stopwords: frozenset[str] | None = None,
    punctuation: frozenset[str] = PUNCTUATION,
    lowercase: bool = True,
) -> list[str]:
    """Tokenize text and drop stopword and punctuation tokens.

    Order and duplicates are preserved: downstream consumers decide whether
    repeated words matter (term frequencies do, sparsification keys do not).
    Stopword matching happens after lowercasing when `lowercase` is set.
    """
    if stopwords is None:
        stopwords = english_stopwords()
    if lowercase:
        text = text.lower()
    words = []
    for token in tokenize(text, punctuation):
        if token in stopwords:
            continue
        if all(ch in punctuation for ch in token):
            continue
        words.append(token)
    return words
