/**
 * Client-side logit sparsification, value-identical to the engine's.
 *
 * The adapter normally ships raw restricted logits and lets the engine own
 * saturation, top-k and quantization; this port exists for the opt-in flag
 * that emits quantized integer weights directly (smaller record files),
 * with the record marked `sparsified` so consumers know the values are no
 * longer raw.
 */

export interface SparsifyOptions {
  topK?: number;
  quantScale?: number;
}

/** Round half to even, matching numpy's rint. */
export function rint(value: number): number {
  const floor = Math.floor(value);
  const diff = value - floor;
  if (diff > 0.5) return floor + 1;
  if (diff < 0.5) return floor;
  return floor % 2 === 0 ? floor : floor + 1;
}

export function quantize(value: number, scale: number): number {
  return rint(value * scale);
}

export function sparsifyLogits(
  entries: Record<string, number>,
  options: SparsifyOptions = {},
): Record<string, number> {
  const topK = options.topK ?? 128;
  const quantScale = options.quantScale ?? 100;
  const saturated: [string, number][] = [];
  for (const [token, value] of Object.entries(entries)) {
    if (value > 0) saturated.push([token, Math.log1p(value)]);
  }
  saturated.sort(([ta, va], [tb, vb]) => {
    if (va !== vb) return vb - va;
    return ta < tb ? -1 : ta > tb ? 1 : 0;
  });
  const out: Record<string, number> = {};
  for (const [token, value] of saturated.slice(0, topK)) {
    const weight = quantize(value, quantScale);
    if (weight >= 1) out[token] = weight;
  }
  return out;
}
