#!/usr/bin/env node
/**
 * Command-line entry point.
 *
 *   node dist/cli.js encode --backend stub  --corpus corpus.jsonl --out records.jsonl
 *   node dist/cli.js encode --backend model --model /models/llama3-8b-instruct \
 *       --queries queries.tsv --out query_records.jsonl
 *
 * Exit codes match the engine CLI: 2 usage, 3 bad input data, 4 bad
 * configuration, 5 model/build failure.
 */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { MODES, runEncode } from "./encode.js";
import { PROMPT_IDS } from "./prompts.js";
import { ConfigError, DataError, ModelError } from "./records.js";

const EXIT_USAGE = 2;
const EXIT_DATA = 3;
const EXIT_CONFIG = 4;
const EXIT_MODEL = 5;

function fail(code: number, message: string): never {
  process.stderr.write(`error: ${message}\n`);
  process.exit(code);
}

async function main(): Promise<void> {
  const parser = yargs(hideBin(process.argv))
    .scriptName("repsearch-adapter")
    .command(
      "encode",
      "encode texts into representation records",
      (cmd) =>
        cmd
          .option("corpus", { type: "string", describe: "BEIR-style corpus JSONL" })
          .option("queries", { type: "string", describe: "qid<TAB>text query TSV" })
          .option("out", { type: "string", demandOption: true, describe: "output records JSONL" })
          .option("backend", {
            choices: ["stub", "model"] as const,
            default: "stub" as const,
            describe: "deterministic stub or a real language model",
          })
          .option("model", { type: "string", describe: "model directory or hub id" })
          .option("prompt", {
            type: "number",
            default: 6,
            describe: `prompt variant (${PROMPT_IDS.join(", ")})`,
          })
          .option("role", {
            choices: ["passage", "query"] as const,
            describe: "prompt wording; defaults to passage for --corpus, query for --queries",
          })
          .option("duplicate-query-task", {
            type: "boolean",
            default: false,
            describe: "use the query wording for both sides (duplicate-query datasets)",
          })
          .option("mode", {
            choices: MODES,
            default: "first-token" as const,
            describe: "representation mode; anything beyond first-token emits token sub-records",
          })
          .option("max-length", {
            type: "number",
            describe: "input token budget (default: 32 for queries, 156 for passages)",
          })
          .option("device", { type: "string", describe: "inference device (model backend)" })
          .option("dtype", { type: "string", describe: "weight dtype (model backend)" })
          .option("batch-size", { type: "number", default: 8 })
          .option("dim", { type: "number", default: 32, describe: "dense size (stub backend)" })
          .option("seed", { type: "number", default: 0, describe: "stub backend seed" })
          .option("sparsified", {
            type: "boolean",
            default: false,
            describe: "quantize logits adapter-side and mark records",
          }),
      async (argv) => {
        const count = await runEncode({
          corpus: argv.corpus,
          queries: argv.queries,
          out: argv.out,
          backend: argv.backend,
          model: argv.model,
          promptId: argv.prompt,
          role: argv.role,
          duplicateQueryTask: argv["duplicate-query-task"],
          mode: argv.mode,
          maxLength: argv["max-length"],
          device: argv.device,
          dtype: argv.dtype,
          batchSize: argv["batch-size"],
          dim: argv.dim,
          seed: argv.seed,
          sparsified: argv.sparsified,
        });
        process.stdout.write(`wrote ${count} records to ${argv.out}\n`);
      },
    )
    .demandCommand(1, "pick a command")
    .strict()
    .fail((msg, err) => {
      if (err) throw err;
      fail(EXIT_USAGE, msg);
    });

  await parser.parse();
}

main().catch((err) => {
  if (err instanceof DataError) fail(EXIT_DATA, err.message);
  if (err instanceof ConfigError) fail(EXIT_CONFIG, err.message);
  if (err instanceof ModelError) fail(EXIT_MODEL, err.message);
  fail(EXIT_MODEL, err instanceof Error ? (err.stack ?? err.message) : String(err));
});
