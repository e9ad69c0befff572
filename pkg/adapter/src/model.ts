/**
 * Model-backed encoding: one forward pass per text through a chat-formatted
 * prompt, with the trailing assistant special token removed so the model
 * sits right after the opening quote. The last position's hidden state is
 * the dense representation; its raw next-token logits, restricted to the
 * sub-token ids of the text's own (stopword-filtered) words, are the sparse
 * side. Saturation and quantization stay engine-side.
 *
 * All model access goes through the ModelSession interface; the pure
 * per-text logic lives in encodeWithSession so it can be exercised with a
 * fake session, and the transformers-backed session is a thin wrapper
 * loaded only when a real model directory is given.
 */

import { buildMessages, PromptOptions, Role } from "./prompts.js";
import { ModelError, RepresentationRecord, TokenRecord } from "./records.js";
import { extractWords } from "./words.js";

export interface ForwardResult {
  /** Last-layer hidden state at the final position. */
  hidden: number[];
  /** Raw next-token logits over the full vocabulary at the final position. */
  logits: ArrayLike<number>;
}

export interface ModelSession {
  /** Token ids of the rendered chat, including the trailing special token. */
  chatTokenIds(messages: ReturnType<typeof buildMessages>): Promise<number[]>;
  /** Token ids of bare text, no special tokens. */
  textTokenIds(text: string): Promise<number[]>;
  decode(ids: number[]): string;
  forward(ids: number[]): Promise<ForwardResult>;
}

export interface EncodeTextOptions extends PromptOptions {
  /** Truncate the input to this many of its own tokens before prompting. */
  maxLength?: number;
  /** Generate per-token sub-records (any mode other than first-token). */
  generate?: boolean;
  /** Hard cap on generated tokens. */
  generationCap?: number;
}

export const GENERATION_CAP = 16;

function argmax(values: ArrayLike<number>): number {
  let best = 0;
  for (let i = 1; i < values.length; i++) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

/**
 * Map each restricted token id to its decoded surface, then pick the logit
 * values for those ids, merging ids that decode to the same surface by max
 * (deterministic regardless of id order).
 */
export function restrictLogits(
  logits: ArrayLike<number>,
  surfaces: Map<number, string>,
): Record<string, number> {
  const out: Record<string, number> = {};
  for (const [id, surface] of surfaces) {
    if (id < 0 || id >= logits.length) {
      throw new ModelError(`token id ${id} is outside the logit vector (length ${logits.length})`);
    }
    const value = logits[id];
    if (!(surface in out) || value > out[surface]) out[surface] = value;
  }
  return out;
}

/** Sub-token ids of the text's surviving words, with their decoded surfaces. */
export async function restrictionSurfaces(
  session: ModelSession,
  text: string,
): Promise<Map<number, string>> {
  const surfaces = new Map<number, string>();
  for (const word of new Set(extractWords(text))) {
    for (const id of await session.textTokenIds(word)) {
      if (!surfaces.has(id)) surfaces.set(id, session.decode([id]));
    }
  }
  return surfaces;
}

export async function encodeWithSession(
  session: ModelSession,
  id: string,
  text: string,
  role: Role,
  options: EncodeTextOptions = {},
): Promise<RepresentationRecord> {
  const maxLength = options.maxLength ?? (role === "query" ? 32 : 156);
  const ownIds = await session.textTokenIds(text);
  if (ownIds.length > maxLength) {
    text = session.decode(ownIds.slice(0, maxLength));
  }

  const messages = buildMessages(text, role, options);
  const chatIds = await session.chatTokenIds(messages);
  // The template closes the assistant turn with a special token; drop it so
  // the prompt ends at the opening quote (or at the assistant header for the
  // no-prefill prompt) and the next-token distribution is the word itself.
  const promptIds = chatIds.slice(0, -1);

  const surfaces = await restrictionSurfaces(session, text);
  let out = await session.forward(promptIds);
  const record: RepresentationRecord = {
    id,
    dense: [...out.hidden],
    logits: restrictLogits(out.logits, surfaces),
  };

  if (options.generate) {
    const cap = options.generationCap ?? GENERATION_CAP;
    const tokens: TokenRecord[] = [];
    const ids = [...promptIds];
    while (tokens.length < cap) {
      const nextId = argmax(out.logits);
      const piece = session.decode([nextId]);
      if (piece.includes('"')) break;
      ids.push(nextId);
      out = await session.forward(ids);
      tokens.push({
        token: piece,
        dense: [...out.hidden],
        logits: restrictLogits(out.logits, surfaces),
      });
    }
    if (tokens.length > 0) record.tokens = tokens;
  }
  return record;
}

export interface TransformersOptions {
  device?: string;
  dtype?: string;
  batchSize?: number;
}

interface TensorLike {
  data: ArrayLike<number> | ArrayLike<bigint>;
  dims: number[];
}

function toNumbers(data: ArrayLike<number> | ArrayLike<bigint>): number[] {
  const out = new Array<number>(data.length);
  for (let i = 0; i < data.length; i++) out[i] = Number(data[i]);
  return out;
}

/** Last-position slice of a [1, seq, width] tensor. */
function lastPosition(tensor: TensorLike, what: string): number[] {
  const dims = tensor.dims;
  if (dims.length !== 3 || dims[0] !== 1) {
    throw new ModelError(`unexpected ${what} shape [${dims.join(", ")}]`);
  }
  const width = dims[2];
  const start = (dims[1] - 1) * width;
  const out = new Array<number>(width);
  for (let i = 0; i < width; i++) out[i] = Number(tensor.data[start + i]);
  return out;
}

function describeFailure(err: unknown, batchSize: number): ModelError {
  const message = err instanceof Error ? err.message : String(err);
  if (/out of memory|oom|alloc/i.test(message)) {
    return new ModelError(
      `inference ran out of memory (${message}); retry with a smaller --batch-size (now ${batchSize}) or a shorter --max-length`,
    );
  }
  return new ModelError(`inference failed: ${message}`);
}

/**
 * Load a transformers-backed session from a model directory or hub id.
 * Imported dynamically so the stub backend never touches the model runtime.
 */
export async function loadTransformersSession(
  model: string,
  options: TransformersOptions = {},
): Promise<ModelSession> {
  const batchSize = options.batchSize ?? 1;
  let transformers: any;
  try {
    transformers = await import("@huggingface/transformers");
  } catch (err) {
    throw new ModelError(
      `the @huggingface/transformers runtime is not installed: ${(err as Error).message}`,
    );
  }
  let tokenizer: any;
  let lm: any;
  try {
    tokenizer = await transformers.AutoTokenizer.from_pretrained(model);
    lm = await transformers.AutoModelForCausalLM.from_pretrained(model, {
      device: options.device,
      dtype: options.dtype,
      output_hidden_states: true,
    });
  } catch (err) {
    throw new ModelError(`failed to load model '${model}': ${(err as Error).message}`);
  }

  async function forward(ids: number[]): Promise<ForwardResult> {
    const input_ids = new transformers.Tensor(
      "int64",
      BigInt64Array.from(ids.map(BigInt)),
      [1, ids.length],
    );
    const attention_mask = new transformers.Tensor(
      "int64",
      BigInt64Array.from(ids.map(() => 1n)),
      [1, ids.length],
    );
    let outputs: any;
    try {
      outputs = await lm({ input_ids, attention_mask });
    } catch (err) {
      throw describeFailure(err, batchSize);
    }
    const hiddenTensor =
      outputs.hidden_states?.at?.(-1) ?? outputs.last_hidden_state ?? outputs.hidden_states;
    if (!hiddenTensor || !hiddenTensor.dims) {
      throw new ModelError(
        `model '${model}' does not expose hidden states; export it with output_hidden_states enabled`,
      );
    }
    return {
      hidden: lastPosition(hiddenTensor, "hidden state"),
      logits: lastPosition(outputs.logits, "logits"),
    };
  }

  return {
    async chatTokenIds(messages) {
      const rendered = tokenizer.apply_chat_template(messages, {
        add_generation_prompt: false,
        tokenize: true,
      });
      if (Array.isArray(rendered)) return toNumbers(rendered.flat());
      return toNumbers((rendered as TensorLike).data);
    },
    async textTokenIds(text) {
      return toNumbers(tokenizer.encode(text, { add_special_tokens: false }));
    },
    decode(ids) {
      return tokenizer.decode(ids, { skip_special_tokens: false });
    },
    forward,
  };
}
