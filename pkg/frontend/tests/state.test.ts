// @vitest-environment jsdom
import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { ApiClient, InferResponse } from "../src/api";
import { DEBOUNCE_MS, Store } from "../src/state";

const inference: InferResponse = {
  checkpoint: "ck",
  video: "video-0",
  delta: 0.05,
  intent_probs: [0.4, 0.35, 0.25],
  intent_shot_scores: [
    [0.9, 0.1, 0.2, 0.8, 0.3, 0.1, 0.6, 0.4],
    [0.1, 0.8, 0.7, 0.2, 0.4, 0.9, 0.1, 0.3],
    [0.3, 0.3, 0.1, 0.1, 0.9, 0.2, 0.2, 0.8],
  ],
};

interface Call {
  url: string;
  body: { video: string; summary: number[] };
  signal: AbortSignal | undefined;
}

let calls: Call[];
// eslint-disable-next-line @typescript-eslint/no-explicit-any
let fetchMock: any;

beforeEach(() => {
  vi.useFakeTimers();
  calls = [];
  fetchMock = vi.fn((url: string, init?: RequestInit) => {
    calls.push({
      url: String(url),
      body: JSON.parse(String(init?.body ?? "{}")),
      signal: init?.signal ?? undefined,
    });
    return Promise.resolve(
      new Response(JSON.stringify({ precision: 0.5, recall: 0.5, f1: 0.5 }), {
        status: 200,
        headers: { "Content-Type": "application/json" },
      }),
    );
  });
  vi.stubGlobal("fetch", fetchMock);
});

afterEach(() => {
  vi.useRealTimers();
  vi.unstubAllGlobals();
});

function freshStore(): Store {
  const store = new Store(new ApiClient());
  store.setInference("video-0", "a + b", inference);
  return store;
}

async function flush(): Promise<void> {
  await vi.advanceTimersByTimeAsync(DEBOUNCE_MS + 10);
}

describe("debounced evaluation", () => {
  it("a burst of slider edits produces exactly one evaluation request", async () => {
    const store = freshStore();
    await flush(); // initial inference evaluation
    const before = calls.length;
    expect(before).toBe(1);

    store.setIntentProb(0, 0.8);
    await vi.advanceTimersByTimeAsync(100);
    store.setIntentProb(1, 0.1);
    await vi.advanceTimersByTimeAsync(100);
    store.setIntentProb(2, 0.3);
    expect(calls.length).toBe(before); // nothing fired inside the window
    await flush();
    expect(calls.length).toBe(before + 1);
    expect(calls[calls.length - 1].url).toContain("/api/evaluate");
  });

  it("separate edits 250 ms apart each produce one request", async () => {
    const store = freshStore();
    await flush();
    const before = calls.length;
    store.setIntentProb(0, 0.9);
    await flush();
    store.setIntentProb(0, 0.2);
    await flush();
    expect(calls.length).toBe(before + 2);
  });

  it("the evaluated summary is the currently displayed one", async () => {
    const store = freshStore();
    store.setIntentProb(0, 1.0);
    await flush();
    const last = calls[calls.length - 1];
    expect(last.body.video).toBe("video-0");
    expect(last.body.summary).toEqual(store.state.summary);
    expect(store.state.evalResult?.f1).toBe(0.5);
  });

  it("brushing triggers no server round-trip", async () => {
    const store = freshStore();
    await flush();
    const before = calls.length;
    store.setBrush(2, 6);
    await flush();
    expect(calls.length).toBe(before);
    expect(store.state.brush).toEqual({ t0: 2, t1: 6 });
  });

  it("a newer edit supersedes the in-flight evaluation", async () => {
    let resolveFirst: ((r: Response) => void) | null = null;
    fetchMock.mockImplementationOnce((url: string, init?: RequestInit) => {
      calls.push({
        url: String(url),
        body: JSON.parse(String(init?.body ?? "{}")),
        signal: init?.signal ?? undefined,
      });
      return new Promise<Response>((resolve) => {
        resolveFirst = resolve;
      });
    });
    const store = freshStore();
    await flush(); // first evaluation hangs in flight
    expect(calls.length).toBe(1);
    const firstSignal = calls[0].signal!;

    store.setIntentProb(0, 0.9);
    await flush(); // second evaluation fires and resolves
    expect(calls.length).toBe(2);
    expect(firstSignal.aborted).toBe(true);
    const secondResult = store.state.evalResult;

    // the stale response, arriving late, must not overwrite the newer one
    resolveFirst!(
      new Response(JSON.stringify({ precision: 0.1, recall: 0.1, f1: 0.1 }), { status: 200 }),
    );
    await vi.advanceTimersByTimeAsync(10);
    expect(store.state.evalResult).toEqual(secondResult);
  });
});

describe("state invariants", () => {
  it("intent probabilities stay a probability vector through edits", () => {
    const store = freshStore();
    for (const [i, v] of [
      [0, 0.7],
      [2, 0.9],
      [1, 0],
    ] as [number, number][]) {
      store.setIntentProb(i, v);
      const sum = store.state.intentProbs.reduce((a, b) => a + b, 0);
      expect(Math.abs(sum - 1)).toBeLessThan(1e-12);
    }
  });

  it("summary re-selection happens synchronously on slider edits", () => {
    const store = freshStore();
    const before = store.state.summary.slice();
    store.setIntentProb(2, 1.0); // all mass on intent 2: shots 4 and 7 dominate
    expect(store.state.summary).not.toEqual(before);
    expect(store.state.summary).toContain(4);
  });

  it("shape errors surface as the UI error state", () => {
    const store = freshStore();
    store.setInference("video-0", "bad", {
      ...inference,
      intent_probs: [0.5, 0.5],
    });
    expect(store.state.error).toContain("ShapeMismatchError");
  });
});
