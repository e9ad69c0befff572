/**
 * File-level orchestration: corpus/query reading, backend dispatch, record
 * writing. Inputs mirror the engine's formats — BEIR-style corpus JSONL
 * ({"_id", "title", "text"}, document text = title + " " + text when a
 * title is present) and qid<TAB>text query TSV.
 */

import * as fs from "node:fs";

import { encodeWithSession, loadTransformersSession, TransformersOptions } from "./model.js";
import { PROMPT_IDS, Role } from "./prompts.js";
import { ConfigError, DataError, RepresentationRecord, writeRecords } from "./records.js";
import { sparsifyLogits } from "./sparsify.js";
import { stubEncode } from "./stub.js";

export type Mode = "first-token" | "first-word" | "multi-token" | "per-token" | "per-word";

export const MODES: readonly Mode[] = [
  "first-token",
  "first-word",
  "multi-token",
  "per-token",
  "per-word",
];

export interface EncodeJob {
  corpus?: string;
  queries?: string;
  out: string;
  backend: "stub" | "model";
  model?: string;
  promptId: number;
  role?: Role;
  duplicateQueryTask: boolean;
  mode: Mode;
  maxLength?: number;
  device?: string;
  dtype?: string;
  batchSize: number;
  dim: number;
  seed: number;
  sparsified: boolean;
}

function readLines(path: string): string[] {
  let raw: string;
  try {
    raw = fs.readFileSync(path, "utf8");
  } catch (err) {
    throw new DataError(`cannot read ${path}: ${(err as Error).message}`);
  }
  return raw.split("\n");
}

export function readCorpus(path: string): [string, string][] {
  const items: [string, string][] = [];
  readLines(path).forEach((line, idx) => {
    if (!line.trim()) return;
    let obj: any;
    try {
      obj = JSON.parse(line);
    } catch {
      throw new DataError(`${path}:${idx + 1}: invalid JSON`);
    }
    const id = obj._id ?? obj.id;
    if (typeof id !== "string" || !id) {
      throw new DataError(`${path}:${idx + 1}: missing document id ('_id' or 'id')`);
    }
    if (typeof obj.text !== "string") {
      throw new DataError(`${path}:${idx + 1}: missing 'text'`);
    }
    const title = typeof obj.title === "string" ? obj.title : "";
    items.push([id, title ? `${title} ${obj.text}` : obj.text]);
  });
  return items;
}

export function readQueries(path: string): [string, string][] {
  const items: [string, string][] = [];
  readLines(path).forEach((line, idx) => {
    if (!line.trim()) return;
    const tab = line.indexOf("\t");
    if (tab <= 0) {
      throw new DataError(`${path}:${idx + 1}: expected qid<TAB>text`);
    }
    items.push([line.slice(0, tab), line.slice(tab + 1)]);
  });
  return items;
}

function sparsifyRecord(record: RepresentationRecord): RepresentationRecord {
  const out: RepresentationRecord = {
    ...record,
    logits: sparsifyLogits(record.logits),
    sparsified: true,
  };
  if (record.tokens) {
    out.tokens = record.tokens.map((t) => ({ ...t, logits: sparsifyLogits(t.logits) }));
  }
  return out;
}

async function modelEncode(
  items: [string, string][],
  role: Role,
  job: EncodeJob,
): Promise<RepresentationRecord[]> {
  if (!job.model) {
    throw new ConfigError("--backend model needs --model pointing at a model directory or id");
  }
  const options: TransformersOptions = {
    device: job.device,
    dtype: job.dtype,
    batchSize: job.batchSize,
  };
  const session = await loadTransformersSession(job.model, options);
  const records: RepresentationRecord[] = [];
  for (const [id, text] of items) {
    records.push(
      await encodeWithSession(session, id, text, role, {
        promptId: job.promptId,
        duplicateQueryTask: job.duplicateQueryTask,
        maxLength: job.maxLength,
        generate: job.mode !== "first-token",
      }),
    );
    if (records.length % 50 === 0) {
      process.stderr.write(`encoded ${records.length}/${items.length}\n`);
    }
  }
  return records;
}

function checkJob(job: EncodeJob): void {
  if ((job.corpus === undefined) === (job.queries === undefined)) {
    throw new ConfigError("give exactly one of --corpus or --queries");
  }
  if (!PROMPT_IDS.includes(job.promptId)) {
    throw new ConfigError(`unknown prompt id ${job.promptId}; expected one of ${PROMPT_IDS.join(", ")}`);
  }
  for (const [name, value, min] of [
    ["--dim", job.dim, 1],
    ["--batch-size", job.batchSize, 1],
    ["--max-length", job.maxLength ?? 1, 1],
  ] as const) {
    if (!Number.isInteger(value) || value < min) {
      throw new ConfigError(`${name} must be an integer >= ${min}, got ${value}`);
    }
  }
}

export async function runEncode(job: EncodeJob): Promise<number> {
  checkJob(job);
  const items = job.corpus !== undefined ? readCorpus(job.corpus) : readQueries(job.queries!);
  const role: Role = job.role ?? (job.corpus !== undefined ? "passage" : "query");

  let records: RepresentationRecord[];
  if (job.backend === "stub") {
    records = stubEncode(items, {
      dim: job.dim,
      seed: job.seed,
      emitTokens: job.mode !== "first-token",
    });
  } else {
    records = await modelEncode(items, role, job);
  }
  if (job.sparsified) {
    records = records.map(sparsifyRecord);
  }
  writeRecords(records, job.out);
  return records.length;
}
