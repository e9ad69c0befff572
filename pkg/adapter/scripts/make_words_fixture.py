"""Freeze the engine tokenizer's output on the shared fixture corpus.

The adapter ports the engine's word extraction to TypeScript; this script
records what the engine actually produces so tests/words.test.ts can assert
the two implementations agree byte for byte. Run from the adapter directory:

    python3 scripts/make_words_fixture.py
"""

import json
from pathlib import Path

from repsearch.text import extract_words

HERE = Path(__file__).resolve().parent
CORPUS = HERE.parent.parent / "tests" / "fixtures" / "pipeline" / "corpus.jsonl"
OUT = HERE.parent / "tests" / "fixtures" / "words.json"

# Hand-picked shapes the fixture corpus does not cover.
EXTRA = [
    "The quick brown fox jumps over the lazy dog.",
    "Don't split contractions; keep state-of-the-art hyphens!",
    "  (parenthesised)   [bracketed]  \"quoted\" 'apostrophes' ",
    "ALL CAPS and MiXeD case become lowercase",
    "ellipsis... trailing, commas, and--double dashes",
    "digits 42 and mixed a1b2 survive",
    "...",
    "",
    "naive café déjà-vu unicode words pass through",
    "a an the of (stopwords only)",
]


def main() -> None:
    texts = []
    with open(CORPUS, encoding="utf-8") as fh:
        for line in fh:
            obj = json.loads(line)
            title = obj.get("title", "")
            texts.append(f"{title} {obj['text']}" if title else obj["text"])
    texts.extend(EXTRA)
    cases = [{"text": t, "words": extract_words(t)} for t in texts]
    OUT.write_text(json.dumps(cases, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {OUT} ({len(cases)} cases)")


if __name__ == "__main__":
    main()
