/** Central client state: intent editing, mixing, and debounced evaluation.
 *
 * Every state edit re-mixes scores and re-selects the summary synchronously,
 * then schedules exactly one evaluation POST per burst of edits (250 ms
 * debounce). A newer edit aborts any in-flight evaluation so the displayed
 * metrics always describe the displayed summary.
 */

import { ApiClient, EvalResult, InferResponse } from "./api";
import { clientMix, defaultBudget, renormalize, selectSummary, SelectionMode } from "./mixing";

export const DEBOUNCE_MS = 250;

export interface BrushRange {
  t0: number;
  t1: number; // half-open [t0, t1)
}

export interface ClientState {
  video: string | null;
  checkpoint: string | null;
  queryLabel: string | null;
  intentProbs: number[];
  intentShotScores: number[][];
  delta: number;
  brush: BrushRange;
  mode: SelectionMode;
  threshold: number;
  budget: number;
  scores: number[];
  summary: number[];
  evalResult: EvalResult | null;
  error: string | null;
}

type Listener = (state: ClientState) => void;

export class Store {
  state: ClientState = {
    video: null,
    checkpoint: null,
    queryLabel: null,
    intentProbs: [],
    intentShotScores: [],
    delta: 0,
    brush: { t0: 0, t1: 0 },
    mode: "budget",
    threshold: 0.5,
    budget: 1,
    scores: [],
    summary: [],
    evalResult: null,
    error: null,
  };

  private listeners: Listener[] = [];
  private debounceTimer: ReturnType<typeof setTimeout> | null = null;
  private inflight: AbortController | null = null;
  private generation = 0;

  constructor(public api: ApiClient) {}

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private emit(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  /** Load a fresh inference response (new query / video / checkpoint). */
  setInference(video: string, queryLabel: string, res: InferResponse): void {
    const t = res.intent_shot_scores[0]?.length ?? 0;
    this.state = {
      ...this.state,
      video,
      checkpoint: res.checkpoint,
      queryLabel,
      intentProbs: res.intent_probs.slice(),
      intentShotScores: res.intent_shot_scores,
      delta: res.delta,
      brush: { t0: 0, t1: t },
      budget: defaultBudget(t),
      evalResult: null,
      error: null,
    };
    this.remixNow();
    this.scheduleEvaluation();
  }

  /** Slider edit: set one intent probability, renormalize, remix, debounce-evaluate. */
  setIntentProb(index: number, value: number): void {
    this.state = {
      ...this.state,
      intentProbs: renormalize(this.state.intentProbs, index, value),
    };
    this.remixNow();
    this.scheduleEvaluation();
  }

  setBrush(t0: number, t1: number): void {
    const t = this.state.scores.length;
    this.state = {
      ...this.state,
      brush: { t0: Math.max(0, Math.min(t0, t)), t1: Math.max(0, Math.min(t1, t)) },
    };
    this.emit(); // brushing is purely client-side: no mixing, no request
  }

  setSelection(mode: SelectionMode, value: number): void {
    this.state = {
      ...this.state,
      mode,
      threshold: mode === "threshold" ? value : this.state.threshold,
      budget: mode === "budget" ? value : this.state.budget,
    };
    this.remixNow();
    this.scheduleEvaluation();
  }

  private remixNow(): void {
    try {
      const scores = clientMix(
        this.state.intentProbs,
        this.state.intentShotScores,
        this.state.delta,
      );
      const summary = selectSummary(scores, this.state.mode, {
        threshold: this.state.threshold,
        budget: Math.min(this.state.budget, Math.max(1, scores.length)),
      });
      this.state = { ...this.state, scores, summary, error: null };
    } catch (err) {
      this.state = { ...this.state, error: String(err) };
    }
    this.emit();
  }

  /** One evaluation request per burst of edits; newer bursts supersede older ones. */
  private scheduleEvaluation(): void {
    if (this.debounceTimer !== null) clearTimeout(this.debounceTimer);
    this.debounceTimer = setTimeout(() => {
      this.debounceTimer = null;
      void this.evaluateNow();
    }, DEBOUNCE_MS);
  }

  private async evaluateNow(): Promise<void> {
    const { video, summary } = this.state;
    if (video === null) return;
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    const gen = ++this.generation;
    try {
      const result = await this.api.evaluate(video, summary, controller.signal);
      if (gen !== this.generation) return; // superseded
      this.state = { ...this.state, evalResult: result };
      this.emit();
    } catch (err) {
      if (controller.signal.aborted || gen !== this.generation) return;
      this.state = { ...this.state, error: String(err) };
      this.emit();
    }
  }
}
