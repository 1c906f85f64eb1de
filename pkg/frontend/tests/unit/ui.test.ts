import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { StudioApi } from "../../src/api.js";
import { createStudio, type Studio } from "../../src/ui.js";
import {
  jsonResponse,
  mockFetch,
  previewWithPrint,
  sampleProject,
  samplePreview,
  type FetchLog,
} from "./helpers.js";

let root: HTMLElement;

beforeEach(() => {
  root = document.createElement("div");
  document.body.append(root);
});

afterEach(() => {
  root.remove();
  vi.unstubAllGlobals();
});

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

/** Standard happy-path routes: stateful project version, canned preview. */
function standardRoutes(): { log: FetchLog; state: { version: number } } {
  const state = { version: 0 };
  const log = mockFetch([
    (url, init) => {
      if (!url.endsWith("/api/project")) return null;
      if ((init?.method ?? "GET") === "GET") {
        return jsonResponse(sampleProject(state.version));
      }
      const doc = JSON.parse(String(init?.body));
      if (doc.version !== state.version) {
        return jsonResponse(
          {
            error: "version_conflict",
            detail: `project is at version ${state.version}, request carries ${doc.version}`,
          },
          409,
        );
      }
      state.version += 1;
      return jsonResponse({ ...doc, version: state.version });
    },
    (url, init) => {
      if (!url.endsWith("/api/preview")) return null;
      const body = JSON.parse(String(init?.body ?? "{}"));
      return jsonResponse(
        typeof body.gcode === "string" ? previewWithPrint() : samplePreview(),
      );
    },
    (url) =>
      url.endsWith("/api/progress")
        ? jsonResponse({ project_version: state.version, last_merge: null })
        : null,
  ]);
  return { log, state };
}

async function boot(): Promise<Studio> {
  const app = createStudio(root, new StudioApi(""), { toastTtlMs: 0 });
  await app.whenReady;
  return app;
}

describe("boot", () => {
  it("loads the project into the form", async () => {
    standardRoutes();
    await boot();
    expect(byId<HTMLInputElement>("region-width").value).toBe("220");
    expect(byId<HTMLInputElement>("stack-input").value).toBe(
      "tpu_film_on_tpu_film",
    );
    expect(byId<HTMLInputElement>("marker-x").value).toBe("10");
    expect(byId("version-badge").textContent).toBe("project v0");
  });
});

describe("inline validation", () => {
  it("refuses to PUT a zero-width region and says why inline", async () => {
    const { log } = standardRoutes();
    const app = await boot();
    byId<HTMLInputElement>("region-width").value = "0";
    const putsBefore = log.calls.filter((c) => c.method === "PUT").length;
    const ok = await app.applyEdits();
    expect(ok).toBe(false);
    expect(log.calls.filter((c) => c.method === "PUT")).toHaveLength(
      putsBefore,
    );
    expect(byId("region-problem").textContent).toMatch(/positive/);
  });

  it("clears the message once the region is valid again", async () => {
    standardRoutes();
    const app = await boot();
    byId<HTMLInputElement>("region-width").value = "0";
    await app.applyEdits();
    byId<HTMLInputElement>("region-width").value = "220";
    await app.applyEdits();
    expect(byId("region-problem").textContent).toBe("");
  });
});

describe("preview staleness", () => {
  it("flags the preview after an applied edit until re-previewed", async () => {
    standardRoutes();
    const app = await boot();
    await app.runPreview();
    const badge = byId("outdated-badge");
    expect(badge.hidden).toBe(true);

    byId<HTMLInputElement>("marker-x").value = "12";
    byId<HTMLInputElement>("marker-x").dispatchEvent(new Event("input"));
    expect(badge.hidden).toBe(false); // pending edits alone mark it stale

    await app.applyEdits(); // version bump keeps it stale
    expect(badge.hidden).toBe(false);

    await app.runPreview();
    expect(badge.hidden).toBe(true);
  });
});

describe("sealing-only preview", () => {
  it("disables the print layer toggle and shows payload temperatures", async () => {
    standardRoutes();
    const app = await boot();
    await app.runPreview();
    expect(byId<HTMLInputElement>("layer-print").disabled).toBe(true);
    expect(byId("stack-summary").textContent).toContain("250");
    expect(byId("stack-summary").textContent).toContain("50");
    expect(byId("plan-summary").textContent).toContain("448.2");
  });

  it("re-enables the print toggle once G-code is uploaded", async () => {
    standardRoutes();
    const app = await boot();
    app.loadGcode("print.gcode", "G28\n;LAYER_CHANGE\nG1 X1 Y1 E0.1\n");
    await app.runPreview();
    expect(byId<HTMLInputElement>("layer-print").disabled).toBe(false);
    expect(byId("plan-summary").textContent).toContain("0.42");
  });
});

describe("version conflicts", () => {
  it("shows a toast with a reload action on a stale PUT", async () => {
    const { state } = standardRoutes();
    const app = await boot();
    state.version = 5; // someone else edited the project
    const ok = await app.applyEdits();
    expect(ok).toBe(false);
    const toast = byId("toasts").querySelector(".toast");
    expect(toast).not.toBeNull();
    expect(toast!.textContent).toContain("version conflict");
    expect(toast!.textContent).toContain("version 5");

    const reload = [...toast!.querySelectorAll("button")].find(
      (b) => b.textContent === "Reload",
    );
    expect(reload).toBeDefined();
    reload!.click();
    await vi.waitFor(() =>
      expect(byId("version-badge").textContent).toBe("project v5"),
    );
  });
});

describe("merge flow", () => {
  it("gates merge on upload and download on merge", async () => {
    standardRoutes();
    const app = await boot();
    const mergeBtn = byId<HTMLButtonElement>("merge-btn");
    const downloadBtn = byId<HTMLButtonElement>("download-btn");
    expect(mergeBtn.disabled).toBe(true);
    expect(downloadBtn.disabled).toBe(true);
    expect(app.getDownload()).toBeNull();

    app.loadGcode("print.gcode", "G28\n");
    expect(mergeBtn.disabled).toBe(false);
    expect(downloadBtn.disabled).toBe(true);
  });

  it("stores merged bytes and names the download from project outputs", async () => {
    const merged = "; header\nG28\nM400 U1\n";
    const state = { version: 0 };
    mockFetch([
      (url, init) =>
        url.endsWith("/api/project") && (init?.method ?? "GET") === "GET"
          ? jsonResponse(sampleProject(state.version))
          : null,
      (url) =>
        url.endsWith("/api/merge")
          ? new Response(merged, {
              status: 200,
              headers: {
                "Content-Type": "text/plain",
                "X-Offset-Dx": "0.420000",
                "X-Offset-Dy": "-0.310000",
                "X-Stripped-Moves": "25",
                "X-Bed-Rewrites": "2",
              },
            })
          : null,
      (url) =>
        url.endsWith("/api/progress")
          ? jsonResponse({
              project_version: 0,
              last_merge: {
                offset: { dx: 0.42, dy: -0.31 },
                aligned: false,
                stripped_moves: 25,
                bed_rewrites: 2,
                commands: 3180,
              },
            })
          : null,
    ]);
    const app = await boot();
    app.loadGcode("print.gcode", "G28\n");
    const ok = await app.runMerge();
    expect(ok).toBe(true);
    expect(byId<HTMLButtonElement>("download-btn").disabled).toBe(false);
    expect(byId("merge-summary").textContent).toContain("0.42");
    expect(byId("merge-summary").textContent).toContain("25");
    expect(byId("progress-line").textContent).toContain("3180");

    const dl = app.getDownload();
    expect(dl).not.toBeNull();
    expect(dl!.filename).toBe("hybrid.gcode");
    expect(new TextDecoder().decode(dl!.bytes)).toBe(merged);
  });

  it("invalidates a stale download when a new file is uploaded", async () => {
    standardRoutes();
    const app = await boot();
    app.loadGcode("a.gcode", "G28\n");
    app.session.merge = {
      bytes: new Uint8Array([1]),
      offsetDx: 0,
      offsetDy: 0,
      strippedMoves: 0,
      bedRewrites: 0,
    };
    app.loadGcode("b.gcode", "G1 X1\n");
    expect(app.getDownload()).toBeNull();
    expect(byId<HTMLButtonElement>("download-btn").disabled).toBe(true);
  });

  it("toasts the merge error code with a working diagnostics link", async () => {
    const state = { version: 0 };
    mockFetch([
      (url, init) =>
        url.endsWith("/api/project") && (init?.method ?? "GET") === "GET"
          ? jsonResponse(sampleProject(state.version))
          : null,
      (url) =>
        url.endsWith("/api/merge")
          ? jsonResponse(
              {
                error: "marker_not_found",
                detail: "no first-layer cluster matches the marker",
              },
              409,
            )
          : null,
    ]);
    const app = await boot();
    app.loadGcode("print.gcode", "G28\n");
    const ok = await app.runMerge();
    expect(ok).toBe(false);

    const toast = byId("toasts").querySelector(".toast");
    expect(toast!.textContent).toContain("marker_not_found");
    const panel = byId("diagnostics-panel");
    expect(panel.hidden).toBe(true);
    const link = [...toast!.querySelectorAll("button")].find(
      (b) => b.textContent === "diagnostics",
    );
    link!.click();
    expect(panel.hidden).toBe(false);
    expect(byId("diagnostics-list").textContent).toContain(
      "no first-layer cluster",
    );
  });
});

describe("canvas interaction", () => {
  it("shows payload speed and z when hovering a sealing segment", async () => {
    standardRoutes();
    const app = await boot();
    await app.runPreview();
    const canvas = byId<HTMLCanvasElement>("plate-canvas");
    // World (100, 60) lies on the first curve; view maps it to (270, 430).
    canvas.dispatchEvent(
      new MouseEvent("mousemove", { clientX: 270, clientY: 430 }),
    );
    const text = byId("hover-info").textContent;
    expect(text).toContain("5 mm/s");
    expect(text).toContain("z 0.5 mm");
  });

  it("clears the hover line away from any toolpath", async () => {
    standardRoutes();
    const app = await boot();
    await app.runPreview();
    const canvas = byId<HTMLCanvasElement>("plate-canvas");
    canvas.dispatchEvent(
      new MouseEvent("mousemove", { clientX: 270, clientY: 430 }),
    );
    canvas.dispatchEvent(
      new MouseEvent("mousemove", { clientX: 5, clientY: 5 }),
    );
    expect(byId("hover-info").textContent).toBe("");
  });

  it("dragging the marker updates the pending center fields", async () => {
    standardRoutes();
    const app = await boot();
    await app.runPreview();
    const canvas = byId<HTMLCanvasElement>("plate-canvas");
    // Marker center (10, 10) sits at screen (45, 555); drag to (12, 12).
    canvas.dispatchEvent(
      new MouseEvent("mousedown", { clientX: 45, clientY: 555 }),
    );
    canvas.dispatchEvent(
      new MouseEvent("mousemove", { clientX: 50, clientY: 550 }),
    );
    canvas.dispatchEvent(new MouseEvent("mouseup"));
    expect(byId<HTMLInputElement>("marker-x").value).toBe("12.0");
    expect(byId<HTMLInputElement>("marker-y").value).toBe("12.0");
    expect(byId("outdated-badge").hidden).toBe(false);
  });

  it("toggling a layer leaves the project document untouched", async () => {
    standardRoutes();
    const app = await boot();
    await app.runPreview();
    const before = JSON.stringify(app.session.project);
    Object.freeze(app.session.project);
    const box = byId<HTMLInputElement>("layer-marker");
    box.checked = false;
    box.dispatchEvent(new Event("change"));
    expect(app.view.layers.marker).toBe(false);
    expect(JSON.stringify(app.session.project)).toBe(before);
  });
});
