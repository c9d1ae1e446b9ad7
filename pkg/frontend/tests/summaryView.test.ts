// @vitest-environment jsdom
import { describe, expect, it } from "vitest";
import { renderSummaryView } from "../src/views/summaryView";

function render(scores: number[], summary: number[], t0: number, t1: number) {
  const root = document.createElement("div");
  renderSummaryView(root, { scores, summary, brush: { t0, t1 } }, () => {});
  return root;
}

const T = 40;
const scores = Array.from({ length: T }, (_, i) => (i % 7) / 7 + 0.01);

describe("summary view", () => {
  it("brush [10,20) renders exactly 10 focus bars", () => {
    const root = render(scores, [], 10, 20);
    expect(root.querySelectorAll(".focus-chart rect.focus-bar").length).toBe(10);
    const shots = [...root.querySelectorAll(".focus-chart rect.focus-bar")].map((r) =>
      Number(r.getAttribute("data-shot")),
    );
    expect(shots).toEqual([10, 11, 12, 13, 14, 15, 16, 17, 18, 19]);
  });

  it("overview always shows all T bars", () => {
    const root = render(scores, [], 10, 20);
    expect(root.querySelectorAll(".overview-chart rect.overview-bar").length).toBe(T);
  });

  it("brush [0,T) makes focus equal the overview", () => {
    const root = render(scores, [], 0, T);
    expect(root.querySelectorAll(".focus-chart rect.focus-bar").length).toBe(T);
  });

  it("summary shots are highlighted in both charts", () => {
    const root = render(scores, [3, 12], 10, 20);
    expect(root.querySelectorAll(".overview-chart rect.selected").length).toBe(2);
    const focusSel = [...root.querySelectorAll(".focus-chart rect.selected")];
    expect(focusSel.map((r) => Number(r.getAttribute("data-shot")))).toEqual([12]);
  });

  it("empty summary highlights nothing", () => {
    const root = render(scores, [], 0, T);
    expect(root.querySelectorAll("rect.selected").length).toBe(0);
  });
});
