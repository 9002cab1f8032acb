/** Application wiring: controls, URL sync, request dispatch and layers. */

import { ApiClient } from "./api.js";
import {
  Action,
  DEFAULT_STATE,
  decodeState,
  encodeState,
  reduce,
  requestFor,
} from "./state.js";
import {
  renderCellLayer,
  renderFlowLayer,
  renderGraticule,
  renderRiskLayer,
  TooltipHost,
  VIEW_H,
  VIEW_W,
} from "./render.js";
import {
  CellsResponse,
  MultiResponse,
  RiskResponse,
  TreeResponse,
  ViewState,
} from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

class Tooltip implements TooltipHost {
  private node = el<HTMLDivElement>("tooltip");

  show(text: string, x: number, y: number): void {
    this.node.textContent = text;
    this.node.style.display = "block";
    this.node.style.left = `${x + 12}px`;
    this.node.style.top = `${y + 12}px`;
  }

  hide(): void {
    this.node.style.display = "none";
  }
}

const api = new ApiClient("", (url) => fetch(url));
let state: ViewState = { ...DEFAULT_STATE };

const tooltip = new Tooltip();
const svg = el<HTMLElement>("map") as unknown as SVGSVGElement;
const baseLayer = svg.querySelector<SVGGElement>("#base-layer")!;
const dataLayer = svg.querySelector<SVGGElement>("#data-layer")!;
const status = el<HTMLSpanElement>("status");

function syncControls(): void {
  el<HTMLSelectElement>("level").value = String(state.level);
  el<HTMLInputElement>("t0").value = state.t0;
  el<HTMLInputElement>("t1").value = state.t1;
  el<HTMLButtonElement>("group").textContent = `group: ${state.group}`;
  for (const mode of ["single-source", "multi-source", "risk-overlay"]) {
    el<HTMLButtonElement>(`mode-${mode}`).classList.toggle("active", state.mode === mode);
  }
  el<HTMLSpanElement>("selected-cell").textContent = state.cell ?? "none";
  window.location.hash = encodeState(state);
}

async function refresh(): Promise<void> {
  const req = requestFor(state);
  status.textContent = "loading...";
  const snapshot = state;
  const result = await api.request<unknown>(req);
  if (result.stale) return; // a newer request superseded this one
  if (result.error) {
    status.textContent = `error: ${result.error}`;
    return;
  }
  status.textContent = `ok (#${result.seq})`;
  if (snapshot.mode === "risk-overlay") {
    renderRiskLayer(dataLayer, result.data as RiskResponse);
  } else if (snapshot.mode === "multi-source") {
    renderFlowLayer(dataLayer, (result.data as MultiResponse).layout, "multi-source", tooltip);
  } else if (snapshot.cell) {
    const tree = result.data as TreeResponse;
    renderFlowLayer(dataLayer, tree.tree, "single-source", tooltip);
    status.textContent = `ok (#${result.seq}) total flow ${tree.total_flow}`;
  } else {
    renderCellLayer(
      dataLayer,
      result.data as CellsResponse,
      (cell) => dispatch({ type: "select-cell", cell }),
      tooltip,
    );
  }
}

export function dispatch(action: Action): Promise<void> {
  state = reduce(state, action);
  syncControls();
  return refresh();
}

function wireControls(): void {
  el<HTMLSelectElement>("level").addEventListener("change", (ev) => {
    dispatch({ type: "set-level", level: Number((ev.target as HTMLSelectElement).value) });
  });
  el<HTMLButtonElement>("apply-window").addEventListener("click", () => {
    dispatch({
      type: "set-window",
      t0: el<HTMLInputElement>("t0").value,
      t1: el<HTMLInputElement>("t1").value,
    });
  });
  for (const [id, hoursSpan] of [["preset-1h", 1], ["preset-1d", 24], ["preset-7d", 168]] as const) {
    el<HTMLButtonElement>(id).addEventListener("click", () =>
      dispatch({ type: "preset-window", hoursSpan }),
    );
  }
  el<HTMLButtonElement>("group").addEventListener("click", () => dispatch({ type: "toggle-group" }));
  for (const mode of ["single-source", "multi-source", "risk-overlay"] as const) {
    el<HTMLButtonElement>(`mode-${mode}`).addEventListener("click", () =>
      dispatch({ type: "set-mode", mode }),
    );
  }
  el<HTMLButtonElement>("clear-cell").addEventListener("click", () =>
    dispatch({ type: "select-cell", cell: null }),
  );

  // pan/zoom over the fixed-extent vector map
  let viewBox = { x: 0, y: 0, w: VIEW_W, h: VIEW_H };
  const apply = () =>
    svg.setAttribute("viewBox", `${viewBox.x} ${viewBox.y} ${viewBox.w} ${viewBox.h}`);
  svg.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    const scale = ev.deltaY > 0 ? 1.15 : 1 / 1.15;
    const rect = svg.getBoundingClientRect();
    const fx = (ev.clientX - rect.left) / rect.width;
    const fy = (ev.clientY - rect.top) / rect.height;
    const nw = Math.min(VIEW_W * 2, Math.max(VIEW_W / 64, viewBox.w * scale));
    const nh = (nw / VIEW_W) * VIEW_H;
    viewBox = {
      x: viewBox.x + (viewBox.w - nw) * fx,
      y: viewBox.y + (viewBox.h - nh) * fy,
      w: nw,
      h: nh,
    };
    apply();
  });
  let drag: { x: number; y: number } | null = null;
  svg.addEventListener("mousedown", (ev) => {
    drag = { x: ev.clientX, y: ev.clientY };
  });
  window.addEventListener("mouseup", () => {
    drag = null;
  });
  window.addEventListener("mousemove", (ev) => {
    if (!drag) return;
    const rect = svg.getBoundingClientRect();
    viewBox = {
      ...viewBox,
      x: viewBox.x - ((ev.clientX - drag.x) / rect.width) * viewBox.w,
      y: viewBox.y - ((ev.clientY - drag.y) / rect.height) * viewBox.h,
    };
    drag = { x: ev.clientX, y: ev.clientY };
    apply();
  });
}

export function boot(): void {
  state = window.location.hash.length > 1 ? decodeState(window.location.hash) : { ...DEFAULT_STATE };
  renderGraticule(baseLayer);
  wireControls();
  syncControls();
  void refresh();
}

boot();
