/** Client-side score mixing and summary selection.
 *
 * Mirrors the backend formula exactly: the service returns the per-intent
 * shot-score matrix and the intent probabilities; the overall per-shot score
 * and the summary are computed here so slider edits never need a model
 * round-trip.
 */

export class ShapeMismatchError extends Error {
  override name = "ShapeMismatchError";
}

/** score_t = sum_i max(g_i * H[i][t] - delta, 0). */
export function clientMix(
  intentProbs: number[],
  intentShotScores: number[][],
  delta: number,
): number[] {
  const k = intentProbs.length;
  if (intentShotScores.length !== k) {
    throw new ShapeMismatchError(
      `got ${k} intent probabilities but ${intentShotScores.length} score rows`,
    );
  }
  const t = k > 0 ? intentShotScores[0].length : 0;
  for (const row of intentShotScores) {
    if (row.length !== t) {
      throw new ShapeMismatchError(`ragged score rows (${row.length} vs ${t})`);
    }
  }
  const scores = new Array<number>(t).fill(0);
  for (let i = 0; i < k; i++) {
    const g = intentProbs[i];
    const row = intentShotScores[i];
    for (let j = 0; j < t; j++) {
      const v = g * row[j] - delta;
      if (v > 0) scores[j] += v;
    }
  }
  return scores;
}

export type SelectionMode = "threshold" | "budget";

/** All shots above the threshold, or the top-B by score (ties to the lower index). */
export function selectSummary(
  scores: number[],
  mode: SelectionMode,
  opts: { threshold?: number; budget?: number } = {},
): number[] {
  if (mode === "threshold") {
    const threshold = opts.threshold ?? 0.5;
    const out: number[] = [];
    for (let t = 0; t < scores.length; t++) if (scores[t] > threshold) out.push(t);
    return out;
  }
  const budget = opts.budget;
  if (budget === undefined || budget < 1 || budget > scores.length) {
    throw new RangeError(`budget must be in [1, ${scores.length}], got ${budget}`);
  }
  const order = scores.map((_, i) => i);
  // stable sort by descending score keeps ties at the lower index
  order.sort((a, b) => scores[b] - scores[a] || a - b);
  return order.slice(0, budget).sort((a, b) => a - b);
}

export function defaultBudget(t: number): number {
  return Math.max(1, Math.ceil((t * 2) / 100));
}

/** Top-m shot indices of one intent row, descending, ties to the lower index. */
export function representativeShots(row: number[], m: number): number[] {
  const order = row.map((_, i) => i);
  order.sort((a, b) => row[b] - row[a] || a - b);
  return order.slice(0, Math.min(m, row.length));
}

/**
 * Set one intent probability and renormalize proportionally across the
 * untouched intents, so the result is always a probability vector.
 */
export function renormalize(
  probs: number[],
  edited: number,
  value: number,
): number[] {
  const k = probs.length;
  if (edited < 0 || edited >= k) throw new RangeError(`index ${edited} out of [0, ${k})`);
  const v = Math.min(1, Math.max(0, value));
  if (k === 1) return [1];
  const rest = 1 - v;
  let restSum = 0;
  for (let i = 0; i < k; i++) if (i !== edited) restSum += probs[i];
  const out = new Array<number>(k);
  for (let i = 0; i < k; i++) {
    if (i === edited) out[i] = v;
    else if (restSum > 0) out[i] = (probs[i] / restSum) * rest;
    else out[i] = rest / (k - 1); // all other mass was zero: spread evenly
  }
  return out;
}
