/**
 * Word extraction, ported one-to-one from the engine's tokenizer.
 *
 * Chunks are whitespace-separated; ASCII punctuation is peeled off both
 * edges of a chunk, each peeled character becoming its own token, while
 * interior punctuation (contractions, hyphenated words) is kept. The
 * engine filters with the same rules, so the token-id restriction the
 * adapter performs matches what the engine would compute from the text.
 * tests/fixtures/words.json holds the engine's actual output on the shared
 * corpus; words.test.ts asserts this port agrees with it exactly.
 */

import { ENGLISH_STOPWORDS } from "./stopwords.js";

const ASCII_PUNCTUATION = new Set("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~");

export function tokenize(text: string): string[] {
  const tokens: string[] = [];
  for (const chunk of text.split(/\s+/)) {
    if (!chunk) continue;
    let start = 0;
    let end = chunk.length;
    while (start < end && ASCII_PUNCTUATION.has(chunk[start])) start += 1;
    while (end > start && ASCII_PUNCTUATION.has(chunk[end - 1])) end -= 1;
    for (let i = 0; i < start; i++) tokens.push(chunk[i]);
    if (end > start) tokens.push(chunk.slice(start, end));
    for (let i = end; i < chunk.length; i++) tokens.push(chunk[i]);
  }
  return tokens;
}

function isAllPunctuation(token: string): boolean {
  for (const ch of token) {
    if (!ASCII_PUNCTUATION.has(ch)) return false;
  }
  return true;
}

/** Lowercase, tokenize, and drop stopword and punctuation tokens. */
export function extractWords(text: string): string[] {
  const words: string[] = [];
  for (const token of tokenize(text.toLowerCase())) {
    if (ENGLISH_STOPWORDS.has(token)) continue;
    if (isAllPunctuation(token)) continue;
    words.push(token);
  }
  return words;
}
