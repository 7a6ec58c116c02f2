// Hand-rolled SVG renderers: a line chart with event markers, bars for
// category proportions, a salary histogram and a size-weighted term grid.

import type { EventMarker, SalaryBucket, TermEntry } from "./types";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 800;
const HEIGHT = 260;
const PAD = { left: 48, right: 12, top: 14, bottom: 28 };

function svgElement(tag: string, attrs: Record<string, string | number>): SVGElement {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, String(value));
  }
  return el;
}

export interface ChartPoint {
  date: string;
  value: number;
}

export function lineChart(points: ChartPoint[], events: EventMarker[], yLabel: string): SVGElement {
  const svg = svgElement("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    class: "line-chart",
    role: "img",
  });
  const innerW = WIDTH - PAD.left - PAD.right;
  const innerH = HEIGHT - PAD.top - PAD.bottom;
  const maxY = Math.max(1e-12, ...points.map((p) => p.value));
  const n = points.length;

  const x = (i: number) => PAD.left + (n <= 1 ? innerW / 2 : (i / (n - 1)) * innerW);
  const y = (v: number) => PAD.top + innerH - (v / maxY) * innerH;

  svg.appendChild(
    svgElement("line", {
      x1: PAD.left, y1: PAD.top + innerH, x2: PAD.left + innerW, y2: PAD.top + innerH,
      class: "axis",
    }),
  );
  svg.appendChild(
    svgElement("line", { x1: PAD.left, y1: PAD.top, x2: PAD.left, y2: PAD.top + innerH, class: "axis" }),
  );

  if (n > 0) {
    const coords = points.map((p, i) => `${x(i).toFixed(1)},${y(p.value).toFixed(1)}`).join(" ");
    svg.appendChild(svgElement("polyline", { points: coords, class: "series-line", fill: "none" }));
  }

  const byDate = new Map(points.map((p, i) => [p.date, i]));
  for (const event of events) {
    const idx = byDate.get(event.date);
    if (idx === undefined) continue;
    const marker = svgElement("line", {
      x1: x(idx), y1: PAD.top, x2: x(idx), y2: PAD.top + innerH,
      class: "event-marker",
      "data-caption": event.caption,
    });
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `${event.date}: ${event.caption}`;
    marker.appendChild(title);
    svg.appendChild(marker);
  }

  const maxText = svgElement("text", { x: 4, y: PAD.top + 10, class: "y-max" });
  maxText.textContent = maxY >= 1 ? String(Math.round(maxY)) : maxY.toExponential(2);
  svg.appendChild(maxText);
  const axisName = svgElement("text", { x: 4, y: HEIGHT - 6, class: "y-label" });
  axisName.textContent = yLabel;
  svg.appendChild(axisName);
  if (n > 0) {
    const first = svgElement("text", { x: PAD.left, y: HEIGHT - 6, class: "x-first" });
    first.textContent = points[0].date;
    svg.appendChild(first);
    const last = svgElement("text", {
      x: PAD.left + innerW, y: HEIGHT - 6, "text-anchor": "end", class: "x-last",
    });
    last.textContent = points[n - 1].date;
    svg.appendChild(last);
  }
  return svg;
}

export function proportionBars(proportions: Record<string, number>): SVGElement {
  const entries = Object.entries(proportions);
  const rowH = 28;
  const height = entries.length * rowH + 8;
  const svg = svgElement("svg", { viewBox: `0 0 ${WIDTH} ${height}`, class: "bar-chart" });
  entries.forEach(([name, fraction], i) => {
    const yTop = 4 + i * rowH;
    const barW = Math.max(0, fraction) * (WIDTH - 220);
    svg.appendChild(
      svgElement("rect", {
        x: 150, y: yTop, width: barW.toFixed(1), height: rowH - 8,
        class: "bar", "data-category": name,
      }),
    );
    const label = svgElement("text", { x: 4, y: yTop + 14, class: "bar-label" });
    label.textContent = name;
    svg.appendChild(label);
    const value = svgElement("text", { x: 156 + barW, y: yTop + 14, class: "bar-value" });
    value.textContent = `${(fraction * 100).toFixed(1)}%`;
    svg.appendChild(value);
  });
  return svg;
}

export function salaryHistogram(buckets: SalaryBucket[]): SVGElement {
  const svg = svgElement("svg", { viewBox: `0 0 ${WIDTH} ${HEIGHT}`, class: "histogram" });
  if (!buckets.length) return svg;
  const innerW = WIDTH - PAD.left - PAD.right;
  const innerH = HEIGHT - PAD.top - PAD.bottom;
  const maxCount = Math.max(...buckets.map((b) => b.count));
  const barW = innerW / buckets.length;
  buckets.forEach((bucket, i) => {
    const h = (bucket.count / maxCount) * innerH;
    svg.appendChild(
      svgElement("rect", {
        x: (PAD.left + i * barW + 1).toFixed(1),
        y: (PAD.top + innerH - h).toFixed(1),
        width: Math.max(1, barW - 2).toFixed(1),
        height: h.toFixed(1),
        class: "hist-bar",
        "data-lo": bucket.lo,
        "data-count": bucket.count,
      }),
    );
  });
  const lo = svgElement("text", { x: PAD.left, y: HEIGHT - 6, class: "x-first" });
  lo.textContent = String(buckets[0].lo);
  svg.appendChild(lo);
  const hi = svgElement("text", {
    x: PAD.left + innerW, y: HEIGHT - 6, "text-anchor": "end", class: "x-last",
  });
  hi.textContent = String(buckets[buckets.length - 1].hi);
  svg.appendChild(hi);
  return svg;
}

export function termGrid(terms: TermEntry[]): HTMLElement {
  const grid = document.createElement("div");
  grid.className = "term-grid";
  const sorted = [...terms].sort((a, b) => b.count - a.count || a.term.localeCompare(b.term));
  const max = sorted.length ? sorted[0].count : 1;
  for (const { term, count } of sorted) {
    const tag = document.createElement("span");
    tag.className = "term-tag";
    tag.textContent = term;
    tag.title = `${count}`;
    tag.style.fontSize = `${(11 + 17 * (count / max)).toFixed(1)}px`;
    grid.appendChild(tag);
  }
  return grid;
}
