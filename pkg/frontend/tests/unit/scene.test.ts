import { describe, expect, it } from "vitest";
import { buildScene, hitTest } from "../../src/scene.js";
import { initialView, toggleLayer } from "../../src/state.js";
import { previewWithPrint, samplePreview } from "./helpers.js";

describe("buildScene", () => {
  it("draws the region rectangle with the payload's dimensions", () => {
    const scene = buildScene(samplePreview(), initialView());
    const region = scene.polylines.find((p) => p.kind === "region");
    expect(region).toBeDefined();
    expect(region!.closed).toBe(true);
    const xs = region!.points.map(([x]) => x);
    const ys = region!.points.map(([, y]) => y);
    expect(Math.max(...xs) - Math.min(...xs)).toBe(220);
    expect(Math.max(...ys) - Math.min(...ys)).toBe(220);
  });

  it("carries every sealing curve with its index", () => {
    const scene = buildScene(samplePreview(), initialView());
    const sealing = scene.polylines.filter((p) => p.kind === "sealing");
    expect(sealing.map((p) => p.curveIndex)).toEqual([0, 1]);
    expect(sealing[0]!.closed).toBe(true);
    expect(sealing[1]!.closed).toBe(false);
  });

  it("has no print polylines for a sealing-only payload", () => {
    const scene = buildScene(samplePreview(), initialView());
    expect(scene.polylines.some((p) => p.kind === "print")).toBe(false);
  });

  it("adds first-layer print segments when uploaded", () => {
    const scene = buildScene(previewWithPrint(), initialView());
    const print = scene.polylines.filter((p) => p.kind === "print");
    expect(print).toHaveLength(2);
    expect(print[0]!.points).toEqual([
      [100, 100],
      [110, 100],
    ]);
  });

  it("honors layer visibility without touching the payload", () => {
    const payload = previewWithPrint();
    const before = JSON.stringify(payload);
    let view = initialView();
    view = toggleLayer(view, "sealing");
    view = toggleLayer(view, "region");
    const scene = buildScene(payload, view);
    expect(scene.polylines.some((p) => p.kind === "sealing")).toBe(false);
    expect(scene.polylines.some((p) => p.kind === "region")).toBe(false);
    expect(scene.polylines.some((p) => p.kind === "print")).toBe(true);
    expect(scene.polylines.some((p) => p.kind === "marker")).toBe(true);
    expect(JSON.stringify(payload)).toBe(before);
  });

  it("includes the marker outline exactly as sent", () => {
    const payload = samplePreview();
    const scene = buildScene(payload, initialView());
    const marker = scene.polylines.find((p) => p.kind === "marker");
    expect(marker!.points).toEqual(payload.marker.outline);
  });
});

describe("hitTest", () => {
  const scene = buildScene(previewWithPrint(), initialView());

  it("finds the sealing segment under the cursor", () => {
    // On the first curve's bottom edge (y = 60, x in 70..150).
    const hit = hitTest(scene, 100, 60.4, 1.0);
    expect(hit).not.toBeNull();
    expect(hit!.kind).toBe("sealing");
    expect(hit!.curveIndex).toBe(0);
    expect(hit!.distance).toBeCloseTo(0.4, 6);
  });

  it("finds the closing segment of a closed curve", () => {
    // The closing edge runs from (70, 100) back to (70, 60).
    const hit = hitTest(scene, 70.3, 80, 1.0);
    expect(hit!.kind).toBe("sealing");
    expect(hit!.curveIndex).toBe(0);
  });

  it("returns null when nothing is within tolerance", () => {
    expect(hitTest(scene, 30, 30, 1.0)).toBeNull();
  });

  it("prefers toolpaths over overlay geometry at a tie", () => {
    // The second print segment lies on x = 110; nothing else is near.
    const hit = hitTest(scene, 110.2, 105, 1.0);
    expect(hit!.kind).toBe("print");
  });

  it("reports the nearest of several candidates", () => {
    // Open curve at y = 110 vs closed curve top edge at y = 100.
    const hit = hitTest(scene, 100, 108, 5.0);
    expect(hit!.kind).toBe("sealing");
    expect(hit!.curveIndex).toBe(1);
  });
});
