/** Pure view/session state and the small predicates the UI hangs off.
 *
 * Nothing in here touches the network or computes geometry; it tracks what
 * the user is looking at and whether the things on screen are current.
 */

import type { MergeOutcome, PreviewPayload, ProjectDoc } from "./types.js";

export type LayerName = "sealing" | "print" | "marker" | "region";

export interface ViewState {
  panX: number;
  panY: number;
  /** Canvas pixels per millimeter. */
  scale: number;
  layers: Record<LayerName, boolean>;
}

export function initialView(): ViewState {
  return {
    panX: 20,
    panY: 20,
    scale: 2.5,
    layers: { sealing: true, print: true, marker: true, region: true },
  };
}

/** Toggle a layer; returns a new view and never touches project data. */
export function toggleLayer(view: ViewState, layer: LayerName): ViewState {
  return {
    ...view,
    layers: { ...view.layers, [layer]: !view.layers[layer] },
  };
}

export interface SessionState {
  project: ProjectDoc | null;
  preview: PreviewPayload | null;
  /** Project version the preview was computed for. */
  previewVersion: number | null;
  /** True when form fields differ from the last loaded/saved project. */
  dirtyEdits: boolean;
  gcodeName: string | null;
  gcodeText: string | null;
  merge: MergeOutcome | null;
}

export function initialSession(): SessionState {
  return {
    project: null,
    preview: null,
    previewVersion: null,
    dirtyEdits: false,
    gcodeName: null,
    gcodeText: null,
    merge: null,
  };
}

/** The preview on screen no longer reflects the project: edited fields are
 * unapplied, or the project version moved past the one previewed.
 */
export function previewOutdated(s: SessionState): boolean {
  if (!s.preview || !s.project) return false;
  return s.dirtyEdits || s.previewVersion !== s.project.version;
}

/** Download only makes sense once a sliced file was uploaded and merged. */
export function canMerge(s: SessionState): boolean {
  return s.gcodeText !== null;
}

export function canDownload(s: SessionState): boolean {
  return s.merge !== null;
}

/** Inline validation for the region editor; null means acceptable.
 * The server is the real validator -- this only catches the obvious
 * states that should never turn into a PUT.
 */
export function regionProblem(width: number, depth: number): string | null {
  if (!Number.isFinite(width) || !Number.isFinite(depth)) {
    return "region size must be a number";
  }
  if (width <= 0 || depth <= 0) {
    return "region width and depth must be positive";
  }
  return null;
}

/** Inline validation for the marker center fields. */
export function markerProblem(x: number, y: number): string | null {
  if (!Number.isFinite(x) || !Number.isFinite(y)) {
    return "marker center must be numeric";
  }
  return null;
}
