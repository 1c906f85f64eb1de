/** The studio itself: project form, preview canvas, merge/download flow.
 *
 * Server data is the only source of displayed quantities -- everything
 * numeric on screen is a payload value passed through `fmt`.  Form fields
 * hold user input; they become project data only via PUT /api/project.
 */

import type { StudioApi } from "./api.js";
import { CanvasView } from "./canvas.js";
import { fmt } from "./format.js";
import { buildScene, type Hit } from "./scene.js";
import {
  canDownload,
  canMerge,
  initialSession,
  initialView,
  markerProblem,
  previewOutdated,
  regionProblem,
  toggleLayer,
  type LayerName,
  type SessionState,
  type ViewState,
} from "./state.js";
import type { ProjectDoc } from "./types.js";

/** Builtin stack names offered as suggestions; the server validates the
 * actual choice against the active profile and lists what it knows on
 * rejection, so a custom profile's stacks are still reachable by typing.
 */
const STACK_SUGGESTIONS = [
  "tpu_film_on_tpu_film",
  "tpu_coated_fabric_on_tpu_coated_fabric",
  "tpu_film_on_tpu_coated_fabric",
];

export interface StudioOptions {
  /** Toast lifetime; 0 keeps toasts until dismissed (used by tests). */
  toastTtlMs?: number;
}

export interface Studio {
  session: SessionState;
  view: ViewState;
  whenReady: Promise<void>;
  refreshProject(): Promise<boolean>;
  applyEdits(): Promise<boolean>;
  runPreview(): Promise<boolean>;
  loadGcode(name: string, text: string): void;
  runMerge(): Promise<boolean>;
  getDownload(): { filename: string; bytes: Uint8Array } | null;
  setLayer(layer: LayerName, visible: boolean): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

export function createStudio(
  root: HTMLElement,
  api: StudioApi,
  options: StudioOptions = {},
): Studio {
  const session = initialSession();
  const view = initialView();
  const toastTtl = options.toastTtlMs ?? 6000;

  // ----- static DOM -------------------------------------------------------
  root.innerHTML = "";
  const header = el("header");
  const title = el("h1", {}, "sealprint studio");
  const stackSummary = el("span", { id: "stack-summary", class: "summary" });
  const versionBadge = el("span", { id: "version-badge", class: "badge" });
  const outdatedBadge = el(
    "span",
    { id: "outdated-badge", class: "badge warn", hidden: "" },
    "preview outdated — run preview again",
  );
  header.append(title, stackSummary, versionBadge, outdatedBadge);

  const form = el("aside", { id: "project-form" });
  const regionWidth = el("input", { id: "region-width", type: "number" });
  const regionDepth = el("input", { id: "region-depth", type: "number" });
  const regionError = el("div", { id: "region-problem", class: "inline-error" });
  const stackInput = el("input", {
    id: "stack-input",
    list: "stack-options",
  });
  const stackList = el("datalist", { id: "stack-options" });
  for (const name of STACK_SUGGESTIONS) {
    stackList.append(el("option", { value: name }));
  }
  const patternsInput = el("input", {
    id: "patterns-input",
    placeholder: "comma-separated SVG files",
  });
  const markerX = el("input", { id: "marker-x", type: "number" });
  const markerY = el("input", { id: "marker-y", type: "number" });
  const markerError = el("div", { id: "marker-problem", class: "inline-error" });
  const applyBtn = el("button", { id: "apply-btn" }, "Apply changes");
  const field = (caption: string, ...inputs: HTMLElement[]) => {
    const label = el("label", {}, caption + " ");
    label.append(...inputs);
    return label;
  };
  form.append(
    field("region width (mm)", regionWidth),
    field("region depth (mm)", regionDepth),
    regionError,
    field("material stack", stackInput, stackList),
    field("sealing patterns", patternsInput),
    field("marker center x", markerX),
    field("marker center y", markerY),
    markerError,
    applyBtn,
  );

  const actions = el("aside", { id: "actions" });
  const previewBtn = el("button", { id: "preview-btn" }, "Preview");
  const gcodeFile = el("input", { id: "gcode-file", type: "file" });
  const gcodeName = el("span", { id: "gcode-name" }, "no sliced file");
  const mergeBtn = el("button", { id: "merge-btn", disabled: "" }, "Merge");
  const downloadBtn = el(
    "button",
    { id: "download-btn", disabled: "" },
    "Download hybrid job",
  );
  const planSummary = el("div", { id: "plan-summary" });
  const mergeSummary = el("div", { id: "merge-summary" });
  const progressLine = el("div", { id: "progress-line" });
  actions.append(
    previewBtn,
    field("sliced G-code", gcodeFile),
    gcodeName,
    mergeBtn,
    downloadBtn,
    planSummary,
    mergeSummary,
    progressLine,
  );

  const stage = el("section", { id: "stage" });
  const canvas = el("canvas", {
    id: "plate-canvas",
    width: "800",
    height: "600",
  });
  const toggles = el("div", { id: "layer-toggles" });
  const layerBoxes = {} as Record<LayerName, HTMLInputElement>;
  for (const layer of ["sealing", "print", "marker", "region"] as const) {
    const box = el("input", {
      id: `layer-${layer}`,
      type: "checkbox",
    });
    box.checked = view.layers[layer];
    const caption = layer === "print" ? "print first layer" : layer;
    const label = el("label", {}, " " + caption);
    label.prepend(box);
    toggles.append(label);
    layerBoxes[layer] = box;
  }
  const hoverInfo = el("div", { id: "hover-info" });
  stage.append(canvas, toggles, hoverInfo);

  const diagnostics = el("aside", { id: "diagnostics" });
  const diagToggle = el(
    "button",
    { id: "diagnostics-toggle" },
    "Diagnostics",
  );
  const diagPanel = el("div", { id: "diagnostics-panel", hidden: "" });
  const diagList = el("ul", { id: "diagnostics-list" });
  diagPanel.append(diagList);
  diagnostics.append(diagToggle, diagPanel);

  const toasts = el("div", { id: "toasts" });
  const main = el("main");
  main.append(form, stage, actions, diagnostics);
  root.append(header, main, toasts);

  // ----- helpers -----------------------------------------------------------
  function toast(text: string, action?: { label: string; run: () => void }) {
    const node = el("div", { class: "toast" }, text);
    if (action) {
      const btn = el("button", {}, action.label);
      btn.addEventListener("click", () => {
        action.run();
        node.remove();
      });
      node.append(" ", btn);
    }
    const close = el("button", { class: "close" }, "×");
    close.addEventListener("click", () => node.remove());
    node.append(" ", close);
    toasts.append(node);
    if (toastTtl > 0) setTimeout(() => node.remove(), toastTtl);
  }

  function pushDiagnostics(lines: string[]) {
    for (const line of lines) diagList.append(el("li", {}, line));
  }

  function updateBadges() {
    versionBadge.textContent = session.project
      ? `project v${fmt(session.project.version)}`
      : "";
    outdatedBadge.hidden = !previewOutdated(session);
  }

  function updateButtons() {
    mergeBtn.disabled = !canMerge(session);
    downloadBtn.disabled = !canDownload(session);
  }

  function fillForm(doc: ProjectDoc) {
    regionWidth.value = String(doc.region.width);
    regionDepth.value = String(doc.region.depth);
    stackInput.value = doc.stack;
    patternsInput.value = doc.patterns.join(", ");
    markerX.value = String(doc.marker.center[0]);
    markerY.value = String(doc.marker.center[1]);
    session.dirtyEdits = false;
    updateBadges();
  }

  function repaint() {
    if (!session.preview) return;
    const scene = buildScene(session.preview, view);
    canvasView.setScene(scene, session.preview.marker.center);
  }

  function showPreview() {
    const p = session.preview;
    if (!p) return;
    stackSummary.textContent =
      `${p.stack.name}: nozzle ${fmt(p.stack.nozzle_temp)} °C,` +
      ` bed ${fmt(p.stack.bed_temp)} °C, seal z ${fmt(p.stack.seal_z)} mm`;
    planSummary.textContent =
      `${fmt(p.sealing.curves.length)} curve(s), contact ` +
      `${fmt(p.sealing.contact_length)} mm, travel ` +
      `${fmt(p.sealing.travel_length)} mm, estimated ` +
      `${fmt(p.sealing.estimated_seconds)} s` +
      (p.offset
        ? `, plate offset dx ${fmt(p.offset.dx)} dy ${fmt(p.offset.dy)} mm`
        : "");
    layerBoxes.print.disabled = p.sealing_only;
    pushDiagnostics([...p.warnings, ...p.diagnostics]);
    repaint();
  }

  // ----- interaction -------------------------------------------------------
  const canvasView = new CanvasView(canvas, view, {
    onHover(hit: Hit | null) {
      if (!hit || !session.preview) {
        hoverInfo.textContent = "";
        return;
      }
      if (hit.kind === "sealing" && hit.curveIndex !== undefined) {
        const curve = session.preview.sealing.curves[hit.curveIndex];
        if (curve) {
          hoverInfo.textContent =
            `sealing: ${fmt(curve.speed_mm_s)} mm/s at z ${fmt(curve.z)} mm`;
          return;
        }
      }
      hoverInfo.textContent =
        hit.kind === "print"
          ? "print, first layer"
          : hit.kind === "marker"
            ? "alignment marker"
            : "print region";
    },
    onMarkerDrag(x: number, y: number) {
      markerX.value = x.toFixed(1);
      markerY.value = y.toFixed(1);
      session.dirtyEdits = true;
      updateBadges();
    },
    onMarkerDrop() {
      /* changes stay pending until Apply */
    },
  });

  for (const input of [
    regionWidth,
    regionDepth,
    stackInput,
    patternsInput,
    markerX,
    markerY,
  ]) {
    input.addEventListener("input", () => {
      session.dirtyEdits = true;
      updateBadges();
    });
  }

  for (const layer of ["sealing", "print", "marker", "region"] as const) {
    layerBoxes[layer].addEventListener("change", () => {
      setLayer(layer, layerBoxes[layer].checked);
    });
  }

  function setLayer(layer: LayerName, visible: boolean) {
    if (view.layers[layer] !== visible) {
      Object.assign(view, toggleLayer(view, layer));
    }
    layerBoxes[layer].checked = visible;
    repaint();
  }

  diagToggle.addEventListener("click", () => {
    diagPanel.hidden = !diagPanel.hidden;
  });

  async function refreshProject(): Promise<boolean> {
    const result = await api.getProject();
    if (!result.ok) {
      toast(`cannot load project: ${result.message}`);
      return false;
    }
    session.project = result.doc;
    fillForm(result.doc);
    updateButtons();
    return true;
  }

  async function applyEdits(): Promise<boolean> {
    if (!session.project) return false;
    const width = Number(regionWidth.value);
    const depth = Number(regionDepth.value);
    const regionIssue = regionProblem(width, depth);
    regionError.textContent = regionIssue ?? "";
    const mx = Number(markerX.value);
    const my = Number(markerY.value);
    const markerIssue = markerProblem(mx, my);
    markerError.textContent = markerIssue ?? "";
    if (regionIssue || markerIssue) return false; // no PUT for junk input

    const doc: ProjectDoc = {
      ...session.project,
      region: { ...session.project.region, width, depth },
      stack: stackInput.value.trim(),
      patterns: patternsInput.value
        .split(",")
        .map((s) => s.trim())
        .filter((s) => s.length > 0),
      marker: { ...session.project.marker, center: [mx, my] },
    };
    const result = await api.putProject(doc);
    if (!result.ok) {
      if (result.code === "version_conflict") {
        toast(`version conflict: ${result.message}`, {
          label: "Reload",
          run: () => void refreshProject(),
        });
      } else {
        toast(`project rejected: ${result.message}`);
        pushDiagnostics([result.message]);
      }
      return false;
    }
    session.project = result.doc;
    fillForm(result.doc);
    updateBadges();
    return true;
  }

  async function runPreview(): Promise<boolean> {
    if (!session.project) return false;
    const result = await api.preview(session.gcodeText ?? undefined);
    if (!result.ok) {
      toast(`preview failed: ${result.message}`, {
        label: "diagnostics",
        run: () => {
          diagPanel.hidden = false;
        },
      });
      pushDiagnostics([result.message]);
      return false;
    }
    session.preview = result.payload;
    session.previewVersion = session.project.version;
    showPreview();
    updateBadges();
    return true;
  }

  function loadGcode(name: string, text: string): void {
    session.gcodeName = name;
    session.gcodeText = text;
    session.merge = null; // stale bytes must not stay downloadable
    gcodeName.textContent = name;
    updateButtons();
  }

  gcodeFile.addEventListener("change", () => {
    const file = (gcodeFile as HTMLInputElement).files?.[0];
    if (!file) return;
    const reader = new FileReader();
    reader.onload = () => loadGcode(file.name, String(reader.result ?? ""));
    reader.readAsText(file);
  });

  async function runMerge(): Promise<boolean> {
    if (session.gcodeText === null) return false;
    const result = await api.merge(session.gcodeText);
    if (!result.ok) {
      toast(`merge failed (${result.code ?? result.status}): ${result.message}`, {
        label: "diagnostics",
        run: () => {
          diagPanel.hidden = false;
        },
      });
      pushDiagnostics([result.message]);
      return false;
    }
    session.merge = result.outcome;
    mergeSummary.textContent =
      `merged: offset dx ${fmt(result.outcome.offsetDx)} dy ` +
      `${fmt(result.outcome.offsetDy)} mm, ` +
      `${fmt(result.outcome.strippedMoves)} marker move(s) stripped, ` +
      `${fmt(result.outcome.bedRewrites)} bed command(s) clamped`;
    updateButtons();
    const progress = await api.progress();
    if (progress.ok && progress.info.last_merge) {
      progressLine.textContent =
        `server: project v${fmt(progress.info.project_version)}, last merge ` +
        `${fmt(progress.info.last_merge.commands)} command(s)`;
    }
    return true;
  }

  function getDownload(): { filename: string; bytes: Uint8Array } | null {
    if (!session.merge || !session.project) return null;
    const configured = session.project.outputs.merged;
    const filename = configured.split("/").pop() || "hybrid.gcode";
    return { filename, bytes: session.merge.bytes };
  }

  downloadBtn.addEventListener("click", () => {
    const dl = getDownload();
    if (!dl) return;
    const blob = new Blob([dl.bytes.slice()], { type: "text/plain" });
    if (typeof URL.createObjectURL !== "function") return;
    const href = URL.createObjectURL(blob);
    const anchor = el("a", { href, download: dl.filename });
    root.append(anchor);
    anchor.click();
    anchor.remove();
    if (typeof URL.revokeObjectURL === "function") URL.revokeObjectURL(href);
  });

  applyBtn.addEventListener("click", () => void applyEdits());
  previewBtn.addEventListener("click", () => void runPreview());
  mergeBtn.addEventListener("click", () => void runMerge());

  const whenReady = refreshProject().then(() => undefined);

  return {
    session,
    view,
    whenReady,
    refreshProject,
    applyEdits,
    runPreview,
    loadGcode,
    runMerge,
    getDownload,
    setLayer,
  };
}
