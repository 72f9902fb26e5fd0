// SVG grouped-bar overlay panel: for each top-k feature, the cohort mean
// bar and the instance bar side by side around a shared zero axis.

import { overlapCount, panelGeometry } from "./logic.js";
import type { OverlayPlot } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const ROW_H = 22;
const LABEL_W = 150;
const CHART_W = 320;
const PAD_TOP = 8;

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, String(value));
  }
  return el;
}

export function renderOverlayPanel(plot: OverlayPlot): HTMLElement {
  const panel = document.createElement("section");
  panel.className = "overlay-panel";
  panel.dataset.group = plot.group;

  const heading = document.createElement("h3");
  heading.textContent = `${plot.group} cohort`;
  const score = document.createElement("span");
  score.className = "plot-sim";
  score.dataset.plotSim = String(plot.plot_sim);
  score.textContent = ` overlap ${plot.plot_sim}/${plot.bars.length}`;
  heading.appendChild(score);
  panel.appendChild(heading);

  if (overlapCount(plot) !== plot.plot_sim) {
    // A disagreement here means the payload is internally inconsistent;
    // surface it rather than silently rendering.
    const warn = document.createElement("p");
    warn.className = "inconsistent";
    warn.textContent = "overlap count does not match server score";
    panel.appendChild(warn);
  }

  const geometry = panelGeometry(plot);
  const height = PAD_TOP * 2 + geometry.length * ROW_H;
  const svg = svgEl("svg", {
    width: LABEL_W + CHART_W,
    height,
    role: "img",
    "aria-label": `${plot.group} cohort overlay`,
  });
  const zeroX = LABEL_W + CHART_W / 2;
  const half = CHART_W / 2 - 4;

  svg.appendChild(
    svgEl("line", {
      x1: zeroX,
      y1: PAD_TOP,
      x2: zeroX,
      y2: height - PAD_TOP,
      class: "axis",
    }),
  );

  geometry.forEach((bar, i) => {
    const y = PAD_TOP + i * ROW_H;
    const label = svgEl("text", { x: LABEL_W - 6, y: y + 14, "text-anchor": "end" });
    label.textContent = bar.feature;
    svg.appendChild(label);

    for (const [frac, cls, offset] of [
      [bar.groupFrac, "bar-group", 2],
      [bar.instanceFrac, "bar-instance", 11],
    ] as const) {
      const width = Math.abs(frac) * half;
      const x = frac >= 0 ? zeroX : zeroX - width;
      svg.appendChild(
        svgEl("rect", {
          x,
          y: y + offset,
          width: Math.max(width, 0.5),
          height: 8,
          class: cls + (bar.overlap ? " overlap" : ""),
        }),
      );
    }
  });

  panel.appendChild(svg);
  return panel;
}
