/** Typed client for the summarization service's HTTP interface. */

export interface PrepareResponse {
  videos: string[];
  checkpoints: string[];
  concepts: string[];
}

export interface InferResponse {
  checkpoint: string;
  video: string;
  delta: number;
  intent_probs: number[];
  intent_shot_scores: number[][];
}

export interface EvalResult {
  precision: number;
  recall: number;
  f1: number;
  [key: string]: unknown;
}

async function asJson<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail = res.statusText;
    try {
      detail = ((await res.json()) as { detail?: string }).detail ?? detail;
    } catch {
      /* non-JSON error body */
    }
    throw new Error(`${res.status}: ${detail}`);
  }
  return (await res.json()) as T;
}

export class ApiClient {
  constructor(private base = "") {}

  prepare(): Promise<PrepareResponse> {
    return fetch(`${this.base}/api/prepare`).then((r) => asJson<PrepareResponse>(r));
  }

  inferText(ckpt: string, video: string, c1: string, c2: string): Promise<InferResponse> {
    const q = new URLSearchParams({ c1, c2, video, ckpt });
    return fetch(`${this.base}/api/infer?${q}`).then((r) => asJson<InferResponse>(r));
  }

  inferVisual(ckpt: string, video: string, shots: number[]): Promise<InferResponse> {
    return fetch(`${this.base}/api/infer/visual`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ video, ckpt, shots }),
    }).then((r) => asJson<InferResponse>(r));
  }

  evaluate(video: string, summary: number[], signal?: AbortSignal): Promise<EvalResult> {
    return fetch(`${this.base}/api/evaluate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ video, summary }),
      signal,
    }).then((r) => asJson<EvalResult>(r));
  }

  frameUrl(video: string, shot: number): string {
    return `${this.base}/api/shot/frame?video=${encodeURIComponent(video)}&shot=${shot}`;
  }

  gifUrl(video: string, shot: number): string {
    return `${this.base}/api/shot/gif?video=${encodeURIComponent(video)}&shot=${shot}`;
  }
}
