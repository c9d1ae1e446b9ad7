/** Three arc gauges for precision / recall / F1. */

import * as d3 from "d3";
import { EvalResult } from "../api";

export const GREEN_THRESHOLD = 0.4;
export const YELLOW_THRESHOLD = 0.2;

/** Green above 0.40, yellow above 0.20, red otherwise. */
export function gaugeColor(value: number): "green" | "yellow" | "red" {
  if (value > GREEN_THRESHOLD) return "green";
  if (value > YELLOW_THRESHOLD) return "yellow";
  return "red";
}

const COLORS = { green: "#2e9e4f", yellow: "#e0b62b", red: "#d14b3a" } as const;
const METRICS: (keyof EvalResult & string)[] = ["precision", "recall", "f1"];
const SIZE = 110;
const START = -Math.PI * 0.75;
const SWEEP = Math.PI * 1.5;

export function renderEvaluationView(root: HTMLElement, result: EvalResult | null): void {
  const sel = d3.select(root);
  sel.selectAll("*").remove();
  sel.append("h3").text("Evaluation");
  const row = sel.append("div").attr("class", "gauge-row");
  for (const metric of METRICS) {
    const value = result ? Math.max(0, Math.min(1, Number(result[metric]))) : null;
    const cell = row.append("div").attr("class", "gauge");
    const svg = cell
      .append("svg")
      .attr("width", SIZE)
      .attr("height", SIZE)
      .attr("data-metric", metric);
    const g = svg.append("g").attr("transform", `translate(${SIZE / 2},${SIZE / 2})`);
    const arc = d3
      .arc<{ end: number }>()
      .innerRadius(SIZE * 0.32)
      .outerRadius(SIZE * 0.45)
      .startAngle(START)
      .endAngle((d) => d.end);
    g.append("path")
      .attr("class", "gauge-track")
      .attr("d", arc({ end: START + SWEEP })!)
      .attr("fill", "#e8e8e8");
    if (value !== null) {
      // arc angle proportional to the value
      g.append("path")
        .attr("class", "gauge-arc")
        .attr("data-color", gaugeColor(value))
        .attr("d", arc({ end: START + SWEEP * value })!)
        .attr("fill", COLORS[gaugeColor(value)]);
      g.append("text")
        .attr("class", "gauge-value")
        .attr("text-anchor", "middle")
        .attr("dy", "0.35em")
        .text(`${(value * 100).toFixed(1)}%`);
    } else {
      g.append("text").attr("text-anchor", "middle").attr("dy", "0.35em").text("—");
    }
    cell.append("div").attr("class", "gauge-label").text(metric);
  }
}
