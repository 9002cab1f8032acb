/** Shared UI types mirroring the service wire formats. */

export type Group = "all" | "ili";
export type Mode = "single-source" | "multi-source" | "risk-overlay";

export interface ViewState {
  level: number; // 1..10
  t0: string; // ISO-8601 UTC
  t1: string;
  group: Group;
  mode: Mode;
  cell: string | null; // "L{level}:{col}:{row}", required in single-source
  bandwidthKm: number; // risk overlay kernel width
}

export interface FlowFeature {
  type: "Feature";
  geometry: { type: "LineString"; coordinates: [number, number][] };
  properties: {
    flow: number;
    flow_flu: number;
    bundle_id?: number;
    origin: string;
    dest: string;
    label?: string;
  };
}

export interface FeatureCollection {
  type: "FeatureCollection";
  features: FlowFeature[];
}

export interface CellFact {
  cell: string;
  col: number;
  row: number;
  A: number;
  V: number;
  V_flu: number;
  R: number;
  O: number;
  I: number;
  S_lon: number | null;
  S_lat: number | null;
}

export interface CellsResponse {
  version: number;
  level: number;
  group: Group;
  cells: CellFact[];
}

export interface TreeResponse {
  version: number;
  total_flow: number;
  tree: FeatureCollection;
}

export interface MultiResponse {
  version: number;
  layout: FeatureCollection;
}

export interface RiskResponse {
  version: number;
  level: number;
  cols: number;
  rows: number;
  n_points: number;
  cells: [number, number, number][]; // [col, row, density]
}

export interface ApiRequest {
  path: string;
  params: Record<string, string>;
}
