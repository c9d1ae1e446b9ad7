/** Per-intent rows: probability slider, score sparkline, top-m frames.
 *
 * Hovering a representative frame opens the preview panel with the shot's
 * animation; a failed frame fetch falls back to a placeholder tile.
 */

import * as d3 from "d3";
import { ApiClient } from "../api";
import { representativeShots } from "../mixing";

export const REPRESENTATIVE_M = 5;

export interface IntentViewModel {
  video: string | null;
  intentProbs: number[];
  intentShotScores: number[][];
}

export interface IntentViewHandlers {
  onSlider: (index: number, value: number) => void;
  onHoverShot: (shot: number | null) => void;
}

export function renderIntentView(
  root: HTMLElement,
  api: ApiClient,
  model: IntentViewModel,
  handlers: IntentViewHandlers,
): void {
  const sel = d3.select(root);
  sel.selectAll("*").remove();
  sel.append("h3").text("Intents");
  const rows = sel
    .selectAll("div.intent-row")
    .data(model.intentProbs)
    .join("div")
    .attr("class", "intent-row")
    .attr("data-intent", (_, i) => i);

  rows.append("span").attr("class", "intent-label").text((_, i) => `intent ${i}`);

  rows
    .append("input")
    .attr("class", "intent-slider")
    .attr("type", "range")
    .attr("min", 0)
    .attr("max", 1)
    .attr("step", 0.01)
    .property("value", (d) => d)
    .on("input", function () {
      const i = Number(d3.select(this.parentElement).attr("data-intent"));
      handlers.onSlider(i, Number((this as HTMLInputElement).value));
    });

  rows
    .append("span")
    .attr("class", "intent-prob")
    .text((d) => d.toFixed(3));

  rows.each(function (_prob, i) {
    const row = d3.select(this);
    const scores = model.intentShotScores[i] ?? [];
    // sparkline of the intent's shot scores
    const w = 180;
    const h = 24;
    const svg = row.append("svg").attr("class", "intent-spark").attr("width", w).attr("height", h);
    if (scores.length > 1) {
      const x = d3.scaleLinear().domain([0, scores.length - 1]).range([0, w]);
      const y = d3
        .scaleLinear()
        .domain([0, Math.max(1e-9, d3.max(scores) ?? 0)])
        .range([h, 0]);
      const line = d3
        .line<number>()
        .x((_, j) => x(j))
        .y((d) => y(d));
      svg.append("path").attr("d", line(scores)).attr("fill", "none").attr("stroke", "#4f7cba");
    }
    // top-m representative frames by the row's own scores
    const frames = row.append("span").attr("class", "intent-frames");
    if (model.video !== null && scores.length > 0) {
      for (const shot of representativeShots(scores, REPRESENTATIVE_M)) {
        const img = frames
          .append("img")
          .attr("class", "frame-tile")
          .attr("data-shot", shot)
          .attr("width", 40)
          .attr("height", 30)
          .attr("alt", `shot ${shot}`)
          .attr("src", api.frameUrl(model.video, shot));
        img.on("error", function () {
          d3.select(this).attr("src", PLACEHOLDER_PNG).classed("frame-placeholder", true);
        });
        img.on("mouseenter", () => handlers.onHoverShot(shot));
        img.on("mouseleave", () => handlers.onHoverShot(null));
      }
    }
  });
}

/** 1x1 gray PNG used when a frame fetch fails. */
export const PLACEHOLDER_PNG =
  "data:image/png;base64,iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR42mNsaGj4DwAFhAJ/l4T2JwAAAABJRU5ErkJggg==";

/** Preview panel: plays the GIF of the hovered shot. */
export function renderPreview(root: HTMLElement, api: ApiClient, video: string | null, shot: number | null): void {
  const sel = d3.select(root);
  sel.selectAll("*").remove();
  sel.append("h3").text("Preview");
  if (video === null || shot === null) {
    sel.append("div").attr("class", "preview-empty").text("hover a frame to preview");
    return;
  }
  sel
    .append("img")
    .attr("class", "preview-gif")
    .attr("alt", `shot ${shot} animation`)
    .attr("src", api.gifUrl(video, shot));
  sel.append("div").text(`shot ${shot}`);
}
