/** Overview + focus temporal bar charts with a brush linking them.
 *
 * The overview always shows all T shots with summary shots highlighted;
 * the focus chart shows only the brushed half-open range [t0, t1).
 * Brushing is purely client-side.
 */

import * as d3 from "d3";
import { BrushRange } from "../state";

export interface SummaryViewModel {
  scores: number[];
  summary: number[];
  brush: BrushRange;
}

const WIDTH = 760;
const OVERVIEW_H = 90;
const FOCUS_H = 160;
const MARGIN = { top: 8, right: 8, bottom: 18, left: 30 };

function barChart(
  svg: d3.Selection<SVGSVGElement, unknown, null, undefined>,
  cls: string,
  height: number,
  scores: number[],
  offset: number,
  highlighted: Set<number>,
): void {
  const innerW = WIDTH - MARGIN.left - MARGIN.right;
  const innerH = height - MARGIN.top - MARGIN.bottom;
  const x = d3.scaleBand<number>().domain(d3.range(scores.length)).range([0, innerW]);
  const yMax = Math.max(1e-9, d3.max(scores) ?? 0);
  const y = d3.scaleLinear().domain([0, yMax]).range([innerH, 0]);
  const g = svg.append("g").attr("transform", `translate(${MARGIN.left},${MARGIN.top})`);
  g.selectAll(`rect.${cls}`)
    .data(scores)
    .join("rect")
    .attr("class", (_, i) => `${cls}${highlighted.has(offset + i) ? " selected" : ""}`)
    .attr("data-shot", (_, i) => offset + i)
    .attr("x", (_, i) => x(i) ?? 0)
    .attr("width", Math.max(1, x.bandwidth() - 0.5))
    .attr("y", (d) => y(d))
    .attr("height", (d) => innerH - y(d))
    .attr("fill", (_, i) => (highlighted.has(offset + i) ? "#d97706" : "#4f7cba"));
  g.append("g").attr("class", "axis").call(d3.axisLeft(y).ticks(3));
}

export function renderSummaryView(
  root: HTMLElement,
  model: SummaryViewModel,
  onBrush: (t0: number, t1: number) => void,
): void {
  const sel = d3.select(root);
  sel.selectAll("*").remove();
  sel.append("h3").text("Summary");
  const t = model.scores.length;
  const highlighted = new Set(model.summary);

  const overview = sel
    .append("svg")
    .attr("class", "overview-chart")
    .attr("width", WIDTH)
    .attr("height", OVERVIEW_H);
  barChart(overview, "overview-bar", OVERVIEW_H, model.scores, 0, highlighted);

  const innerW = WIDTH - MARGIN.left - MARGIN.right;
  const shotAt = (px: number) => Math.round((px / innerW) * t);
  const brush = d3
    .brushX<unknown>()
    .extent([
      [MARGIN.left, MARGIN.top],
      [WIDTH - MARGIN.right, OVERVIEW_H - MARGIN.bottom],
    ])
    .on("end", (event: d3.D3BrushEvent<unknown>) => {
      if (!event.sourceEvent) return; // ignore programmatic moves
      if (!event.selection) {
        onBrush(0, t);
        return;
      }
      const [a, b] = event.selection as [number, number];
      onBrush(shotAt(a - MARGIN.left), shotAt(b - MARGIN.left));
    });
  overview.append("g").attr("class", "brush").call(brush);

  const { t0, t1 } = model.brush;
  const focusScores = model.scores.slice(t0, t1);
  sel
    .append("div")
    .attr("class", "focus-caption")
    .text(`focus [${t0}, ${t1}) — ${focusScores.length} shots`);
  const focus = sel
    .append("svg")
    .attr("class", "focus-chart")
    .attr("width", WIDTH)
    .attr("height", FOCUS_H);
  barChart(focus, "focus-bar", FOCUS_H, focusScores, t0, highlighted);
}
