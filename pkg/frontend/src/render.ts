/** SVG layer rendering: flow polylines, cell markers, risk rasters.
 *
 * Stroke width is monotone in flow for single-source trees; the
 * blue-to-red ramp is monotone in flow for multi-source bundles; hovering
 * an edge shows the exact flow count reported by the API.
 */

import { CellsResponse, FeatureCollection, FlowFeature, RiskResponse } from "./types.js";

export const BBOX = {
  lonMin: -167.276413,
  lonMax: -56.347517,
  latMin: 5.49955,
  latMax: 82.296478,
};
export const VIEW_W = 1040;
export const VIEW_H = 720;

const SVG_NS = "http://www.w3.org/2000/svg";

export function project(lon: number, lat: number): [number, number] {
  const x = ((lon - BBOX.lonMin) / (BBOX.lonMax - BBOX.lonMin)) * VIEW_W;
  const y = ((BBOX.latMax - lat) / (BBOX.latMax - BBOX.latMin)) * VIEW_H;
  return [x, y];
}

/** Stroke width strictly increasing in flow (px at base zoom). */
export function widthForFlow(flow: number, maxFlow: number): number {
  if (maxFlow <= 0) return 1.2;
  return 1.2 + 6.0 * (flow / maxFlow);
}

/** Blue (low) to red (high), strictly monotone in flow. */
export function colorForFlow(flow: number, maxFlow: number): string {
  const t = maxFlow > 0 ? Math.min(1, flow / maxFlow) : 0;
  const r = Math.round(40 + (225 - 40) * t);
  const g = Math.round(90 - 40 * t);
  const b = Math.round(225 - (225 - 45) * t);
  return `rgb(${r},${g},${b})`;
}

/** Green (low risk) to red (high risk). */
export function colorForRisk(density: number, maxDensity: number): string {
  const t = maxDensity > 0 ? Math.min(1, density / maxDensity) : 0;
  const r = Math.round(30 + (220 - 30) * t);
  const g = Math.round(170 - (170 - 40) * t);
  return `rgba(${r},${g},40,0.55)`;
}

function clear(el: Element): void {
  while (el.firstChild) el.removeChild(el.firstChild);
}

export interface TooltipHost {
  show(text: string, x: number, y: number): void;
  hide(): void;
}

export function emptyMessage(layer: SVGGElement, text: string): void {
  const label = document.createElementNS(SVG_NS, "text");
  label.setAttribute("x", String(VIEW_W / 2));
  label.setAttribute("y", String(VIEW_H / 2));
  label.setAttribute("text-anchor", "middle");
  label.setAttribute("class", "empty-message");
  label.textContent = text;
  layer.appendChild(label);
}

export function renderFlowLayer(
  layer: SVGGElement,
  layout: FeatureCollection,
  mode: "single-source" | "multi-source",
  tooltip: TooltipHost,
): void {
  clear(layer);
  const features = layout.features;
  if (!features.length) {
    emptyMessage(layer, "no flows in this window");
    return;
  }
  const maxFlow = Math.max(...features.map((f) => f.properties.flow));
  for (const feature of features) {
    layer.appendChild(edgeElement(feature, maxFlow, mode, tooltip));
    if (mode === "multi-source" && feature.properties.label) {
      layer.appendChild(edgeLabel(feature));
    }
  }
}

function edgeElement(
  feature: FlowFeature,
  maxFlow: number,
  mode: "single-source" | "multi-source",
  tooltip: TooltipHost,
): SVGPathElement {
  const path = document.createElementNS(SVG_NS, "path");
  const d = feature.geometry.coordinates
    .map((pt, i) => {
      const [x, y] = project(pt[0], pt[1]);
      return `${i === 0 ? "M" : "L"}${x.toFixed(2)},${y.toFixed(2)}`;
    })
    .join(" ");
  path.setAttribute("d", d);
  path.setAttribute("fill", "none");
  path.setAttribute("class", "flow-edge");
  path.setAttribute("data-flow", String(feature.properties.flow));
  path.setAttribute("data-origin", feature.properties.origin);
  path.setAttribute("data-dest", feature.properties.dest);
  if (mode === "single-source") {
    path.setAttribute("stroke", "#1d6fb8");
    path.setAttribute("stroke-width", widthForFlow(feature.properties.flow, maxFlow).toFixed(2));
  } else {
    path.setAttribute("stroke", colorForFlow(feature.properties.flow, maxFlow));
    path.setAttribute("stroke-width", "2.2");
  }
  path.addEventListener("mouseenter", (ev) => {
    const mouse = ev as MouseEvent;
    // the tooltip shows the exact count reported by the API
    tooltip.show(String(feature.properties.flow), mouse.clientX, mouse.clientY);
    path.classList.add("hover");
  });
  path.addEventListener("mouseleave", () => {
    tooltip.hide();
    path.classList.remove("hover");
  });
  return path;
}

function edgeLabel(feature: FlowFeature): SVGTextElement {
  const coords = feature.geometry.coordinates;
  const mid = coords[Math.floor(coords.length / 2)];
  const [x, y] = project(mid[0], mid[1]);
  const text = document.createElementNS(SVG_NS, "text");
  text.setAttribute("x", x.toFixed(2));
  text.setAttribute("y", (y - 4).toFixed(2));
  text.setAttribute("class", "flow-label");
  text.textContent = feature.properties.label ?? "";
  return text;
}

export function renderCellLayer(
  layer: SVGGElement,
  cells: CellsResponse,
  onSelect: (cell: string) => void,
  tooltip: TooltipHost,
): void {
  clear(layer);
  if (!cells.cells.length) {
    emptyMessage(layer, "no activity in this window");
    return;
  }
  const maxA = Math.max(...cells.cells.map((c) => c.A));
  for (const cell of cells.cells) {
    const dot = document.createElementNS(SVG_NS, "circle");
    const lon = cell.S_lon ?? 0;
    const lat = cell.S_lat ?? 0;
    const [x, y] = project(lon, lat);
    dot.setAttribute("cx", x.toFixed(2));
    dot.setAttribute("cy", y.toFixed(2));
    dot.setAttribute("r", (2 + 6 * Math.sqrt(cell.A / maxA)).toFixed(2));
    dot.setAttribute("class", "cell-dot");
    dot.setAttribute("data-cell", cell.cell);
    dot.addEventListener("click", () => onSelect(cell.cell));
    dot.addEventListener("mouseenter", (ev) => {
      const mouse = ev as MouseEvent;
      tooltip.show(`${cell.cell}  A=${cell.A} V=${cell.V}`, mouse.clientX, mouse.clientY);
    });
    dot.addEventListener("mouseleave", () => tooltip.hide());
    layer.appendChild(dot);
  }
}

export function renderRiskLayer(layer: SVGGElement, risk: RiskResponse): void {
  clear(layer);
  if (!risk.cells.length) {
    emptyMessage(layer, "no flu-flagged activity in this window");
    return;
  }
  const size = 0.008333 * 2 ** (risk.level - 1);
  const maxD = Math.max(...risk.cells.map((c) => c[2]));
  for (const [col, row, density] of risk.cells) {
    const lon = BBOX.lonMin + col * size;
    const lat = BBOX.latMin + (row + 1) * size;
    const [x, y] = project(lon, lat);
    const [x1, y1] = project(lon + size, lat - size);
    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", x.toFixed(2));
    rect.setAttribute("y", y.toFixed(2));
    rect.setAttribute("width", (x1 - x).toFixed(2));
    rect.setAttribute("height", (y1 - y).toFixed(2));
    rect.setAttribute("fill", colorForRisk(density, maxD));
    rect.setAttribute("class", "risk-cell");
    layer.appendChild(rect);
  }
}

/** Static lon/lat graticule standing in for a base map while offline. */
export function renderGraticule(layer: SVGGElement): void {
  clear(layer);
  const frame = document.createElementNS(SVG_NS, "rect");
  frame.setAttribute("x", "0");
  frame.setAttribute("y", "0");
  frame.setAttribute("width", String(VIEW_W));
  frame.setAttribute("height", String(VIEW_H));
  frame.setAttribute("class", "map-frame");
  layer.appendChild(frame);
  for (let lon = -160; lon < -50; lon += 10) {
    const [x] = project(lon, 0);
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", x.toFixed(1));
    line.setAttribute("x2", x.toFixed(1));
    line.setAttribute("y1", "0");
    line.setAttribute("y2", String(VIEW_H));
    line.setAttribute("class", "graticule");
    layer.appendChild(line);
  }
  for (let lat = 10; lat < 83; lat += 10) {
    const [, y] = project(0, lat);
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", "0");
    line.setAttribute("x2", String(VIEW_W));
    line.setAttribute("y1", y.toFixed(1));
    line.setAttribute("y2", y.toFixed(1));
    line.setAttribute("class", "graticule");
    layer.appendChild(line);
  }
}
