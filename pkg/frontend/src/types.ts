/** Shapes of the documents and payloads served by the local HTTP API.
 *
 * These mirror the server's JSON exactly; the studio never derives geometry
 * or process numbers on its own, it only renders what arrives here.
 */

export interface ProjectDoc {
  version: number;
  region: { width: number; depth: number; origin: [number, number] };
  stack: string;
  patterns: string[];
  parts: string[];
  marker: {
    center: [number, number];
    arm_length: number;
    arm_width: number;
    height: number;
  };
  outputs: { seal: string; export: string; merged: string };
  profile?: string;
}

export interface PreviewCurve {
  points: [number, number][];
  closed: boolean;
  length: number;
  z: number;
  speed_mm_s: number;
}

export interface OffsetInfo {
  dx: number;
  dy: number;
  distance: number;
  aligned: boolean;
}

export interface PreviewPayload {
  sealing_only: boolean;
  region: { width: number; depth: number; origin: [number, number] };
  stack: {
    name: string;
    nozzle_temp: number;
    bed_temp: number;
    seal_z: number;
    seal_speed: number;
  };
  marker: {
    center: [number, number];
    arm_length: number;
    arm_width: number;
    outline: [number, number][];
  };
  sealing: {
    lift_z: number;
    contact_length: number;
    travel_length: number;
    estimated_seconds: number;
    curves: PreviewCurve[];
  };
  phases: string[];
  phase_spans: { name: string; start: number; stop: number }[];
  print_first_layer: [[number, number], [number, number]][] | null;
  offset: OffsetInfo | null;
  warnings: string[];
  diagnostics: string[];
}

export interface ProgressInfo {
  project_version: number;
  last_merge: {
    offset: { dx: number; dy: number };
    aligned: boolean;
    stripped_moves: number;
    bed_rewrites: number;
    commands: number;
  } | null;
}

/** A successful merge download: the job bytes plus the summary headers. */
export interface MergeOutcome {
  bytes: Uint8Array;
  offsetDx: number;
  offsetDy: number;
  strippedMoves: number;
  bedRewrites: number;
}

/** Structured API failure: HTTP status plus the server's error content. */
export interface ApiFailure {
  ok: false;
  status: number;
  /** 409 error code (e.g. "version_conflict", "marker_not_found"). */
  code?: string;
  /** Human-readable detail, joined from 422 detail entries or 409 text. */
  message: string;
}

export type ApiResult<T> = ({ ok: true } & T) | ApiFailure;
