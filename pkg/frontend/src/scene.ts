/** Build a drawable scene from a preview payload.
 *
 * A scene is plain data (polylines with a kind tag) so tests can assert on
 * it without a real canvas; painting happens in canvas.ts.  All coordinates
 * stay in build-plate millimeters exactly as the server sent them.
 */

import type { ViewState } from "./state.js";
import type { PreviewPayload } from "./types.js";

export type SceneKind = "region" | "sealing" | "print" | "marker";

export interface ScenePolyline {
  kind: SceneKind;
  points: [number, number][];
  closed: boolean;
  /** Index into payload.sealing.curves for sealing polylines. */
  curveIndex?: number;
}

export interface Scene {
  polylines: ScenePolyline[];
}

export function buildScene(payload: PreviewPayload, view: ViewState): Scene {
  const polylines: ScenePolyline[] = [];

  if (view.layers.region) {
    const [ox, oy] = payload.region.origin;
    const w = payload.region.width;
    const d = payload.region.depth;
    polylines.push({
      kind: "region",
      closed: true,
      points: [
        [ox, oy],
        [ox + w, oy],
        [ox + w, oy + d],
        [ox, oy + d],
      ],
    });
  }

  if (view.layers.marker) {
    polylines.push({
      kind: "marker",
      closed: true,
      points: payload.marker.outline.map(([x, y]) => [x, y]),
    });
  }

  if (view.layers.sealing) {
    payload.sealing.curves.forEach((curve, curveIndex) => {
      polylines.push({
        kind: "sealing",
        closed: curve.closed,
        curveIndex,
        points: curve.points.map(([x, y]) => [x, y]),
      });
    });
  }

  if (view.layers.print && payload.print_first_layer) {
    for (const [a, b] of payload.print_first_layer) {
      polylines.push({ kind: "print", closed: false, points: [a, b] });
    }
  }

  return { polylines };
}

export interface Hit {
  kind: SceneKind;
  curveIndex?: number;
  distance: number;
}

function segmentDistance(
  px: number,
  py: number,
  ax: number,
  ay: number,
  bx: number,
  by: number,
): number {
  const dx = bx - ax;
  const dy = by - ay;
  const lenSq = dx * dx + dy * dy;
  let t = 0;
  if (lenSq > 0) {
    t = ((px - ax) * dx + (py - ay) * dy) / lenSq;
    t = Math.max(0, Math.min(1, t));
  }
  const cx = ax + t * dx;
  const cy = ay + t * dy;
  return Math.hypot(px - cx, py - cy);
}

/** Nearest polyline within `tolerance` mm of a world point, or null.
 * Sealing and print polylines win over overlays (marker, region) at equal
 * distance, since those are what hover inspection is for.
 */
export function hitTest(
  scene: Scene,
  x: number,
  y: number,
  tolerance: number,
): Hit | null {
  const priority: Record<SceneKind, number> = {
    sealing: 0,
    print: 1,
    marker: 2,
    region: 3,
  };
  let best: Hit | null = null;
  for (const poly of scene.polylines) {
    const pts = poly.closed
      ? [...poly.points, poly.points[0]!]
      : poly.points;
    for (let i = 0; i + 1 < pts.length; i++) {
      const [ax, ay] = pts[i]!;
      const [bx, by] = pts[i + 1]!;
      const d = segmentDistance(x, y, ax, ay, bx, by);
      if (d > tolerance) continue;
      if (
        !best ||
        d < best.distance - 1e-9 ||
        (Math.abs(d - best.distance) <= 1e-9 &&
          priority[poly.kind] < priority[best.kind])
      ) {
        best = { kind: poly.kind, curveIndex: poly.curveIndex, distance: d };
      }
    }
  }
  return best;
}
