/**
 * Chat prompt construction for representation extraction.
 *
 * Every prompt shares one system line and frames the input as
 * `Passage: "<text>". <instruction>`, then pre-fills the assistant turn
 * with an opening quote so the model's next token is the single word the
 * instruction asks for. Six instruction variants are supported; #6 is the
 * default and the one the reference sparse map was produced with. For
 * queries, "passage" becomes "query" throughout — except on duplicate-query
 * tasks, where both sides use the query wording.
 */

import { ConfigError } from "./records.js";

export const SYSTEM_LINE = "You are an AI assistant that can understand human language.";

export type Role = "passage" | "query";

export interface ChatMessage {
  role: "system" | "user" | "assistant";
  content: string;
}

/** Assistant-turn prefix; the model continues it with the word itself. */
const ANSWER_PREFIX = 'The word is "';

// Instruction text per prompt id; {NOUN} is "passage" or "query". #4 is the
// no-prefill variant: the assistant turn stays empty.
const INSTRUCTIONS: Record<number, { text: string; prefill: boolean }> = {
  1: { text: "Use one word to represent the {NOUN} in a retrieval task.", prefill: true },
  2: { text: "Use one word to represent the {NOUN}.", prefill: true },
  3: {
    text:
      "Use one most important word to represent the {NOUN} in a retrieval task. " +
      "Make sure your word is in lowercase.",
    prefill: true,
  },
  4: { text: "Use one word to represent the {NOUN} in a retrieval task.", prefill: false },
  5: { text: "Use one most important word to represent the {NOUN} in a retrieval task.", prefill: true },
  6: {
    text:
      "Use one word to represent the {NOUN} in a retrieval task. " +
      "Make sure your word is in lowercase.",
    prefill: true,
  },
};

export const PROMPT_IDS: readonly number[] = Object.keys(INSTRUCTIONS).map(Number);

export interface PromptOptions {
  promptId?: number;
  /** Duplicate-query tasks use the query wording for both sides. */
  duplicateQueryTask?: boolean;
}

export function buildMessages(text: string, role: Role, options: PromptOptions = {}): ChatMessage[] {
  const promptId = options.promptId ?? 6;
  const instruction = INSTRUCTIONS[promptId];
  if (instruction === undefined) {
    throw new ConfigError(`unknown prompt id ${promptId}; expected one of ${PROMPT_IDS.join(", ")}`);
  }
  const noun = options.duplicateQueryTask ? "query" : role === "query" ? "query" : "passage";
  const cap = noun.charAt(0).toUpperCase() + noun.slice(1);
  const messages: ChatMessage[] = [
    { role: "system", content: SYSTEM_LINE },
    {
      role: "user",
      content: `${cap}: "${text}". ${instruction.text.replaceAll("{NOUN}", noun)}`,
    },
  ];
  if (instruction.prefill) {
    messages.push({ role: "assistant", content: ANSWER_PREFIX });
  } else {
    messages.push({ role: "assistant", content: "" });
  }
  return messages;
}
