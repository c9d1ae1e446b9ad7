// @vitest-environment jsdom
import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { renderQueryView, QuerySubmit } from "../src/views/queryView";
import { ApiClient } from "../src/api";

const prepare = {
  videos: ["video-0", "video-1"],
  checkpoints: ["trained"],
  concepts: ["tag00", "tag01", "tag02"],
};

function setup(onSubmit: (q: QuerySubmit) => void): HTMLElement {
  const root = document.createElement("div");
  renderQueryView(root, prepare, onSubmit);
  return root;
}

describe("query view", () => {
  it("submits a text query with the selected concepts", () => {
    const got: QuerySubmit[] = [];
    const root = setup((q) => got.push(q));
    (root.querySelector(".pick-c1") as HTMLSelectElement).value = "tag01";
    (root.querySelector(".pick-c2") as HTMLSelectElement).value = "tag02";
    (root.querySelector(".submit-text") as HTMLButtonElement).dispatchEvent(
      new MouseEvent("click"),
    );
    expect(got).toEqual([
      { kind: "text", video: "video-0", ckpt: "trained", c1: "tag01", c2: "tag02" },
    ]);
  });

  it("submits a visual query with the half-open shot range", () => {
    const got: QuerySubmit[] = [];
    const root = setup((q) => got.push(q));
    (root.querySelector(".pick-shot-lo") as HTMLInputElement).value = "3";
    (root.querySelector(".pick-shot-hi") as HTMLInputElement).value = "7";
    (root.querySelector(".submit-visual") as HTMLButtonElement).dispatchEvent(
      new MouseEvent("click"),
    );
    expect(got).toEqual([
      { kind: "visual", video: "video-0", ckpt: "trained", shots: [3, 4, 5, 6] },
    ]);
  });

  it("rejects an empty or inverted shot range", () => {
    const got: QuerySubmit[] = [];
    const root = setup((q) => got.push(q));
    (root.querySelector(".pick-shot-lo") as HTMLInputElement).value = "7";
    (root.querySelector(".pick-shot-hi") as HTMLInputElement).value = "7";
    (root.querySelector(".submit-visual") as HTMLButtonElement).dispatchEvent(
      new MouseEvent("click"),
    );
    expect(got).toEqual([]);
  });
});

describe("visual query request wiring", () => {
  beforeEach(() => {
    vi.stubGlobal("fetch", vi.fn());
  });
  afterEach(() => {
    vi.unstubAllGlobals();
  });

  it("posts the shot range to /api/infer/visual", async () => {
    const fetchMock = fetch as unknown as ReturnType<typeof vi.fn>;
    fetchMock.mockResolvedValue(
      new Response(
        JSON.stringify({
          checkpoint: "trained",
          video: "video-0",
          delta: 0.05,
          intent_probs: [1],
          intent_shot_scores: [[0.5, 0.5]],
        }),
        { status: 200 },
      ),
    );
    const api = new ApiClient();
    await api.inferVisual("trained", "video-0", [3, 4, 5, 6]);
    expect(fetchMock).toHaveBeenCalledTimes(1);
    const [url, init] = fetchMock.mock.calls[0];
    expect(String(url)).toBe("/api/infer/visual");
    expect(init.method).toBe("POST");
    expect(JSON.parse(init.body)).toEqual({
      video: "video-0",
      ckpt: "trained",
      shots: [3, 4, 5, 6],
    });
  });
});
