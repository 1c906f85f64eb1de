/** Shared fixtures and a scripted fetch mock for the unit suites.
 *
 * The fixtures mirror the documented API payload shapes; unit tests pin UI
 * behavior against them without a live server (the e2e suite covers the
 * real one).
 */

import { vi } from "vitest";
import type { PreviewPayload, ProjectDoc } from "../../src/types.js";

export function sampleProject(version = 0): ProjectDoc {
  return {
    version,
    region: { width: 220, depth: 220, origin: [0, 0] },
    stack: "tpu_film_on_tpu_film",
    patterns: ["pouch_seams.svg"],
    parts: ["corner_patch.stl"],
    marker: { center: [10, 10], arm_length: 10, arm_width: 1.2, height: 0.2 },
    outputs: {
      seal: "seal.gcode",
      export: "parts_with_marker.stl",
      merged: "hybrid.gcode",
    },
  };
}

export function samplePreview(
  overrides: Partial<PreviewPayload> = {},
): PreviewPayload {
  return {
    sealing_only: true,
    region: { width: 220, depth: 220, origin: [0, 0] },
    stack: {
      name: "tpu_film_on_tpu_film",
      nozzle_temp: 250,
      bed_temp: 50,
      seal_z: 0.5,
      seal_speed: 5,
    },
    marker: {
      center: [10, 10],
      arm_length: 10,
      arm_width: 1.2,
      outline: [
        [9.4, 5],
        [10.6, 5],
        [10.6, 9.4],
        [15, 9.4],
        [15, 10.6],
        [10.6, 10.6],
        [10.6, 15],
        [9.4, 15],
        [9.4, 10.6],
        [5, 10.6],
        [5, 9.4],
        [9.4, 9.4],
      ],
    },
    sealing: {
      lift_z: 2.5,
      contact_length: 448.2,
      travel_length: 143.2,
      estimated_seconds: 93.3,
      curves: [
        {
          points: [
            [70, 60],
            [150, 60],
            [150, 100],
            [70, 100],
          ],
          closed: true,
          length: 240,
          z: 0.5,
          speed_mm_s: 5,
        },
        {
          points: [
            [80, 110],
            [140, 110],
          ],
          closed: false,
          length: 60,
          z: 0.5,
          speed_mm_s: 5,
        },
      ],
    },
    phases: ["preamble", "sealing"],
    phase_spans: [
      { name: "preamble", start: 0, stop: 6 },
      { name: "sealing", start: 6, stop: 40 },
    ],
    print_first_layer: null,
    offset: null,
    warnings: [],
    diagnostics: [],
    ...overrides,
  };
}

export function previewWithPrint(): PreviewPayload {
  return samplePreview({
    sealing_only: false,
    phases: ["preamble", "sealing", "pause", "printing", "postamble"],
    print_first_layer: [
      [
        [100, 100],
        [110, 100],
      ],
      [
        [110, 100],
        [110, 110],
      ],
    ],
    offset: { dx: 0.42, dy: -0.31, distance: 0.522, aligned: false },
  });
}

export type Route = (
  url: string,
  init: RequestInit | undefined,
) => Response | null;

export interface FetchLog {
  calls: { method: string; url: string; body: string | null }[];
}

/** Install a scripted global fetch; returns a log of every request made. */
export function mockFetch(routes: Route[]): FetchLog {
  const log: FetchLog = { calls: [] };
  vi.stubGlobal(
    "fetch",
    async (input: RequestInfo | URL, init?: RequestInit) => {
      const url = String(input);
      const method = (init?.method ?? "GET").toUpperCase();
      const body = typeof init?.body === "string" ? init.body : null;
      log.calls.push({ method, url, body });
      for (const route of routes) {
        const hit = route(url, init);
        if (hit) return hit;
      }
      return new Response("not found", { status: 404 });
    },
  );
  return log;
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
