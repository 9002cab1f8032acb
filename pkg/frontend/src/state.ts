/** View state: reducers, URL sync, and the one-request-per-state mapping.
 *
 * The rendered view is a pure function of (ViewState, last fresh response);
 * every state change maps to exactly one API request via requestFor.
 */

import { ApiRequest, Group, Mode, ViewState } from "./types.js";

export const DEFAULT_STATE: ViewState = {
  level: 9,
  t0: "2014-01-01T00:00:00Z",
  t1: "2014-01-08T00:00:00Z",
  group: "all",
  mode: "multi-source",
  cell: null,
  bandwidthKm: 60,
};

export type Action =
  | { type: "set-level"; level: number }
  | { type: "set-window"; t0: string; t1: string }
  | { type: "preset-window"; hoursSpan: number }
  | { type: "toggle-group" }
  | { type: "set-mode"; mode: Mode }
  | { type: "select-cell"; cell: string | null }
  | { type: "set-bandwidth"; bandwidthKm: number };

export function parseCellAddress(cell: string): { level: number; col: number; row: number } {
  const m = /^L(\d+):(\d+):(\d+)$/.exec(cell);
  if (!m) throw new Error(`bad cell address ${cell}`);
  return { level: Number(m[1]), col: Number(m[2]), row: Number(m[3]) };
}

/** Re-address a cell to another pyramid level: coarsening takes the
 * containing cell, refining takes the center child. */
export function readdressCell(cell: string, newLevel: number): string {
  const { level, col, row } = parseCellAddress(cell);
  if (newLevel === level) return cell;
  if (newLevel > level) {
    const shift = newLevel - level;
    return `L${newLevel}:${col >> shift}:${row >> shift}`;
  }
  const shift = level - newLevel;
  const half = (1 << shift) >> 1;
  return `L${newLevel}:${(col << shift) + half}:${(row << shift) + half}`;
}

export function reduce(state: ViewState, action: Action): ViewState {
  switch (action.type) {
    case "set-level": {
      const level = Math.min(10, Math.max(1, Math.round(action.level)));
      return {
        ...state,
        level,
        cell: state.cell ? readdressCell(state.cell, level) : null,
      };
    }
    case "set-window":
      return { ...state, t0: action.t0, t1: action.t1 };
    case "preset-window": {
      const end = Date.parse(state.t1);
      const start = end - action.hoursSpan * 3600_000;
      return { ...state, t0: isoUtc(start), t1: state.t1 };
    }
    case "toggle-group":
      return { ...state, group: state.group === "all" ? "ili" : "all" };
    case "set-mode":
      return { ...state, mode: action.mode };
    case "select-cell":
      return { ...state, cell: action.cell ? readdressCell(action.cell, state.level) : null };
    case "set-bandwidth":
      return { ...state, bandwidthKm: Math.max(1, action.bandwidthKm) };
  }
}

export function isoUtc(epochMs: number): string {
  return new Date(epochMs).toISOString().replace(/\.\d{3}Z$/, "Z");
}

/** The single API request the state needs. Single-source mode without a
 * selected cell falls back to the cell layer so the user can pick one. */
export function requestFor(state: ViewState): ApiRequest {
  const base = { t0: state.t0, t1: state.t1, group: state.group };
  switch (state.mode) {
    case "single-source":
      if (state.cell) {
        return { path: "/flows/single-source", params: { ...base, cell: state.cell } };
      }
      return { path: "/cube/cells", params: { ...base, level: String(state.level) } };
    case "multi-source":
      return {
        path: "/flows/multi",
        params: { ...base, level: String(state.level), global_fraction: "0.3", local_k: "1" },
      };
    case "risk-overlay":
      return {
        path: "/risk",
        params: {
          t0: state.t0,
          t1: state.t1,
          level: String(Math.max(3, state.level)),
          bandwidth_km: String(state.bandwidthKm),
        },
      };
  }
}

export function encodeState(state: ViewState): string {
  const p = new URLSearchParams();
  p.set("level", String(state.level));
  p.set("t0", state.t0);
  p.set("t1", state.t1);
  p.set("group", state.group);
  p.set("mode", state.mode);
  if (state.cell) p.set("cell", state.cell);
  p.set("bw", String(state.bandwidthKm));
  return p.toString();
}

export function decodeState(encoded: string): ViewState {
  const p = new URLSearchParams(encoded.replace(/^#/, ""));
  const state: ViewState = { ...DEFAULT_STATE };
  const level = Number(p.get("level"));
  if (Number.isInteger(level) && level >= 1 && level <= 10) state.level = level;
  if (p.get("t0")) state.t0 = p.get("t0")!;
  if (p.get("t1")) state.t1 = p.get("t1")!;
  const group = p.get("group");
  if (group === "all" || group === "ili") state.group = group as Group;
  const mode = p.get("mode");
  if (mode === "single-source" || mode === "multi-source" || mode === "risk-overlay") {
    state.mode = mode as Mode;
  }
  const cell = p.get("cell");
  if (cell && /^L\d+:\d+:\d+$/.test(cell)) state.cell = readdressCell(cell, state.level);
  const bw = Number(p.get("bw"));
  if (Number.isFinite(bw) && bw > 0) state.bandwidthKm = bw;
  return state;
}
