/**
 * Deterministic stand-in for the model backend.
 *
 * Behaves like a model adapter from the outside — sub-token logit keys,
 * leading-space surface convention on generated tokens, raw (un-saturated)
 * logit values — but derives every number from SHA-256 hashes of the seed
 * and the input strings, so records are bit-identical across runs and
 * platforms and no weights are needed. Texts sharing vocabulary get nearby
 * dense vectors (sum of per-piece vectors), which gives downstream smoke
 * tests meaningful cosine structure.
 */

import { createHash } from "node:crypto";

import { RepresentationRecord, TokenRecord } from "./records.js";
import { extractWords } from "./words.js";

const SEP = "";

function digestOf(...parts: (string | number)[]): Buffer {
  return createHash("sha256").update(parts.join(SEP), "utf8").digest();
}

/** Uniform float in [0, 1) keyed purely by the hashed parts. */
export function unitHash(...parts: (string | number)[]): number {
  const d = digestOf(...parts);
  // 48 bits is plenty of resolution and stays exact in a double.
  return d.readUIntLE(0, 6) / 2 ** 48;
}

function rangeHash(lo: number, hi: number, ...parts: (string | number)[]): number {
  return lo + (hi - lo) * unitHash(...parts);
}

/** Split longer words into two sub-token pieces, hash-selected, else keep whole. */
export function stubPieces(word: string, seed: number): string[] {
  if (word.length >= 6 && digestOf("split", seed, word)[0] % 3 === 0) {
    const cut = Math.ceil(word.length / 2);
    return [word.slice(0, cut), word.slice(cut)];
  }
  return [word];
}

function pieceVector(piece: string, dim: number, seed: number): number[] {
  const vec = new Array<number>(dim);
  for (let i = 0; i < dim; i++) {
    vec[i] = rangeHash(-1, 1, "piecevec", seed, piece, i);
  }
  return vec;
}

function normalized(vec: number[]): number[] {
  let norm = 0;
  for (const v of vec) norm += v * v;
  norm = Math.sqrt(norm);
  if (norm === 0) return vec;
  return vec.map((v) => v / norm);
}

// Base value shared across texts keeps a word's weight stable corpus-wide;
// the per-text jitter keeps documents distinguishable. Both stay positive so
// the engine's saturation step never zeroes a stub token out.
function pieceLogit(piece: string, textId: string, seed: number): number {
  const base = rangeHash(0.25, 6.5, "stublogit", seed, piece);
  const jitter = rangeHash(0.0, 1.0, "stubjitter", seed, textId, piece);
  return base + jitter;
}

export interface StubOptions {
  dim?: number;
  seed?: number;
  /** Emit per-token sub-records for the multi-representation modes. */
  emitTokens?: boolean;
  /** How many leading words contribute generated-token sub-records. */
  tokenWords?: number;
}

function tokenRecords(
  words: string[],
  textId: string,
  dim: number,
  seed: number,
  tokenWords: number,
): TokenRecord[] {
  const tokens: TokenRecord[] = [];
  words.slice(0, tokenWords).forEach((word, i) => {
    stubPieces(word, seed).forEach((piece, j) => {
      const surface = i === 0 || j > 0 ? piece : " " + piece;
      const value = pieceLogit(piece, textId, seed) * (j === 0 ? 1.0 : 0.9);
      tokens.push({
        token: surface,
        dense: normalized(pieceVector(`${piece}@${j}`, dim, seed)),
        logits: { [piece]: value },
      });
    });
  });
  return tokens;
}

export function stubEncode(
  items: Iterable<[string, string]>,
  options: StubOptions = {},
): RepresentationRecord[] {
  const dim = options.dim ?? 32;
  const seed = options.seed ?? 0;
  const tokenWords = options.tokenWords ?? 3;
  const vectorCache = new Map<string, number[]>();
  const records: RepresentationRecord[] = [];
  for (const [id, text] of items) {
    const words = extractWords(text);
    const pieces: string[] = [];
    for (const word of words) pieces.push(...stubPieces(word, seed));

    const dense = new Array<number>(dim).fill(0);
    if (pieces.length === 0) {
      const fallback = pieceVector(`TEXT:${text}`, dim, seed);
      for (let i = 0; i < dim; i++) dense[i] = fallback[i];
    } else {
      for (const piece of pieces) {
        let vec = vectorCache.get(piece);
        if (vec === undefined) {
          vec = pieceVector(piece, dim, seed);
          vectorCache.set(piece, vec);
        }
        for (let i = 0; i < dim; i++) dense[i] += vec[i];
      }
    }

    const logits: Record<string, number> = {};
    for (const piece of pieces) {
      const value = pieceLogit(piece, id, seed);
      if (!(piece in logits) || value > logits[piece]) logits[piece] = value;
    }

    const record: RepresentationRecord = { id, dense: normalized(dense), logits };
    if (options.emitTokens && words.length > 0) {
      record.tokens = tokenRecords(dedupe(words), id, dim, seed, tokenWords);
    }
    records.push(record);
  }
  return records;
}

function dedupe(words: string[]): string[] {
  return [...new Set(words)];
}
