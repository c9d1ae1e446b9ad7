/** Initial/Query view: pick a video, checkpoint, and either a two-concept
 * text query or a shot-range visual query.
 */

import * as d3 from "d3";
import { PrepareResponse } from "../api";

export interface QuerySubmitText {
  kind: "text";
  video: string;
  ckpt: string;
  c1: string;
  c2: string;
}

export interface QuerySubmitVisual {
  kind: "visual";
  video: string;
  ckpt: string;
  shots: number[];
}

export type QuerySubmit = QuerySubmitText | QuerySubmitVisual;

function option(sel: d3.Selection<HTMLSelectElement, unknown, null, undefined>, values: string[]): void {
  sel
    .selectAll("option")
    .data(values)
    .join("option")
    .attr("value", (d) => d)
    .text((d) => d);
}

export function renderQueryView(
  root: HTMLElement,
  prepare: PrepareResponse,
  onSubmit: (q: QuerySubmit) => void,
): void {
  const sel = d3.select(root);
  sel.selectAll("*").remove();
  sel.append("h3").text("Query");

  const form = sel.append("div").attr("class", "query-form");
  const video = form.append("select").attr("class", "pick-video");
  option(video, prepare.videos);
  const ckpt = form.append("select").attr("class", "pick-ckpt");
  option(ckpt, prepare.checkpoints);

  // text query: two concepts
  const textRow = form.append("div").attr("class", "text-query");
  const c1 = textRow.append("select").attr("class", "pick-c1");
  option(c1, prepare.concepts);
  const c2 = textRow.append("select").attr("class", "pick-c2");
  option(c2, prepare.concepts);
  textRow
    .append("button")
    .attr("class", "submit-text")
    .text("Summarize (text query)")
    .on("click", () => {
      onSubmit({
        kind: "text",
        video: video.property("value"),
        ckpt: ckpt.property("value"),
        c1: c1.property("value"),
        c2: c2.property("value"),
      });
    });

  // visual query: a shot range of the selected video, sent to /api/infer/visual
  const visRow = form.append("div").attr("class", "visual-query");
  visRow.append("label").text("shots [");
  const lo = visRow
    .append("input")
    .attr("class", "pick-shot-lo")
    .attr("type", "number")
    .attr("min", 0)
    .property("value", 0);
  visRow.append("label").text(", ");
  const hi = visRow
    .append("input")
    .attr("class", "pick-shot-hi")
    .attr("type", "number")
    .attr("min", 1)
    .property("value", 8);
  visRow.append("label").text(")");
  visRow
    .append("button")
    .attr("class", "submit-visual")
    .text("Summarize (visual query)")
    .on("click", () => {
      const a = Number(lo.property("value"));
      const b = Number(hi.property("value"));
      if (!(Number.isInteger(a) && Number.isInteger(b) && 0 <= a && a < b)) return;
      const shots: number[] = [];
      for (let s = a; s < b; s++) shots.push(s);
      onSubmit({
        kind: "visual",
        video: video.property("value"),
        ckpt: ckpt.property("value"),
        shots,
      });
    });
}
