"""Regenerate src/stopwords.ts from the engine's embedded stopword list.

Run from the adapter directory: python3 scripts/make_stopwords.py
"""

from pathlib import Path

HERE = Path(__file__).resolve().parent
ENGINE_LIST = HERE.parent.parent / "src" / "repsearch" / "data" / "english_stopwords.txt"
OUT = HERE.parent / "src" / "stopwords.ts"


def main() -> None:
    words = [w for w in ENGINE_LIST.read_text(encoding="utf-8").split("\n") if w]
    lines = [
        "/**",
        " * The standard 179-word English stopword list, embedded so the adapter",
        " * filters exactly the same words as the engine does. Regenerate with",
        " * scripts/make_stopwords.py if the engine's copy ever changes.",
        " */",
        "",
        "export const ENGLISH_STOPWORDS: ReadonlySet<string> = new Set([",
    ]
    row: list[str] = []
    for w in words:
        row.append(f'"{w}"')
        if len(row) == 6:
            lines.append("  " + ", ".join(row) + ",")
            row = []
    if row:
        lines.append("  " + ", ".join(row) + ",")
    lines.extend(["]);", ""])
    OUT.write_text("\n".join(lines), encoding="utf-8")
    print(f"wrote {OUT} ({len(words)} words)")


if __name__ == "__main__":
    main()
