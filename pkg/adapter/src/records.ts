/**
 * The representation-record wire format the engine reads.
 *
 * One JSON object per line: {"id", "dense", "logits", "tokens"?}. `logits`
 * maps token surface strings to raw logit values, already restricted to the
 * tokens of the input text; `tokens` carries one sub-record per generated
 * token for the multi-representation modes. The engine ignores unknown
 * fields, which is what lets `sparsified` ride along as a marker when the
 * adapter is asked to quantize client-side.
 */

import * as fs from "node:fs";

export interface TokenRecord {
  token: string;
  dense: number[];
  logits: Record<string, number>;
}

export interface RepresentationRecord {
  id: string;
  dense: number[];
  logits: Record<string, number>;
  tokens?: TokenRecord[];
  /** Present (true) only when logit values were quantized adapter-side. */
  sparsified?: boolean;
}

function checkFinite(values: number[], what: string, id: string): void {
  for (const v of values) {
    if (!Number.isFinite(v)) {
      throw new DataError(`record '${id}': ${what} contains a non-finite value`);
    }
  }
}

export function serializeRecord(record: RepresentationRecord): string {
  if (!record.id) throw new DataError("record id must be non-empty");
  if (record.dense.length === 0) {
    throw new DataError(`record '${record.id}': dense vector is empty`);
  }
  checkFinite(record.dense, "dense", record.id);
  checkFinite(Object.values(record.logits), "logits", record.id);
  const obj: Record<string, unknown> = {
    id: record.id,
    dense: record.dense,
    logits: record.logits,
  };
  if (record.tokens !== undefined) {
    for (const t of record.tokens) {
      checkFinite(t.dense, `token '${t.token}' dense`, record.id);
      checkFinite(Object.values(t.logits), `token '${t.token}' logits`, record.id);
    }
    obj.tokens = record.tokens.map((t) => ({
      token: t.token,
      dense: t.dense,
      logits: t.logits,
    }));
  }
  if (record.sparsified) obj.sparsified = true;
  return JSON.stringify(obj);
}

export function writeRecords(records: Iterable<RepresentationRecord>, path: string): void {
  const fd = fs.openSync(path, "w");
  try {
    for (const record of records) {
      fs.writeSync(fd, serializeRecord(record) + "\n");
    }
  } finally {
    fs.closeSync(fd);
  }
}

/** Input-side problems: unreadable or malformed corpus/query files, bad values. */
export class DataError extends Error {}

/** Contradictory or out-of-range options. */
export class ConfigError extends Error {}

/** Model loading or inference failure. */
export class ModelError extends Error {}
