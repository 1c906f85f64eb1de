/** Canvas painting and pointer interaction: pan, zoom, hover, marker drag.
 *
 * The plate is drawn printer-style (origin bottom-left, Y up).  Painting is
 * skipped gracefully when no 2D context is available (headless test DOM);
 * everything observable -- scene content, hover hits, drag targets -- is
 * computed by pure helpers that work without one.
 */

import type { Scene, SceneKind } from "./scene.js";
import { hitTest, type Hit } from "./scene.js";
import type { ViewState } from "./state.js";

const STROKES: Record<SceneKind, string> = {
  region: "#8a8a8a",
  marker: "#c97b1e",
  sealing: "#1464c8",
  print: "#2e9e44",
};

export interface PointerCallbacks {
  onHover(hit: Hit | null): void;
  onMarkerDrag(x: number, y: number): void;
  onMarkerDrop(): void;
}

export class CanvasView {
  private ctx: CanvasRenderingContext2D | null = null;
  private scene: Scene = { polylines: [] };
  private markerCenter: [number, number] | null = null;
  private dragging: "pan" | "marker" | null = null;
  private lastClient: [number, number] = [0, 0];

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly view: ViewState,
    private readonly callbacks: PointerCallbacks,
  ) {
    try {
      this.ctx = canvas.getContext("2d");
    } catch {
      this.ctx = null;
    }
    canvas.addEventListener("mousedown", (e) => this.onDown(e));
    canvas.addEventListener("mousemove", (e) => this.onMove(e));
    canvas.addEventListener("mouseup", () => this.onUp());
    canvas.addEventListener("mouseleave", () => this.onUp());
    canvas.addEventListener("wheel", (e) => this.onWheel(e), {
      passive: false,
    });
  }

  /** World mm -> canvas px. */
  toScreen(x: number, y: number): [number, number] {
    return [
      this.view.panX + x * this.view.scale,
      this.canvas.height - (this.view.panY + y * this.view.scale),
    ];
  }

  /** Canvas px -> world mm. */
  toWorld(sx: number, sy: number): [number, number] {
    return [
      (sx - this.view.panX) / this.view.scale,
      (this.canvas.height - sy - this.view.panY) / this.view.scale,
    ];
  }

  setScene(scene: Scene, markerCenter: [number, number] | null): void {
    this.scene = scene;
    this.markerCenter = markerCenter;
    this.paint();
  }

  paint(): void {
    const ctx = this.ctx;
    if (!ctx) return;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    for (const poly of this.scene.polylines) {
      if (poly.points.length === 0) continue;
      ctx.strokeStyle = STROKES[poly.kind];
      ctx.lineWidth = poly.kind === "sealing" ? 2 : 1;
      ctx.setLineDash(poly.kind === "region" ? [6, 4] : []);
      ctx.beginPath();
      const [x0, y0] = this.toScreen(...poly.points[0]!);
      ctx.moveTo(x0, y0);
      for (let i = 1; i < poly.points.length; i++) {
        const [x, y] = this.toScreen(...poly.points[i]!);
        ctx.lineTo(x, y);
      }
      if (poly.closed) ctx.closePath();
      ctx.stroke();
    }
    ctx.setLineDash([]);
  }

  private clientPos(e: MouseEvent): [number, number] {
    const rect = this.canvas.getBoundingClientRect();
    return [e.clientX - rect.left, e.clientY - rect.top];
  }

  private onDown(e: MouseEvent): void {
    const [sx, sy] = this.clientPos(e);
    this.lastClient = [sx, sy];
    const [wx, wy] = this.toWorld(sx, sy);
    const grabRadius = 8 / this.view.scale;
    if (
      this.markerCenter &&
      Math.hypot(wx - this.markerCenter[0], wy - this.markerCenter[1]) <=
        grabRadius
    ) {
      this.dragging = "marker";
    } else {
      this.dragging = "pan";
    }
  }

  private onMove(e: MouseEvent): void {
    const [sx, sy] = this.clientPos(e);
    if (this.dragging === "pan") {
      this.view.panX += sx - this.lastClient[0];
      this.view.panY -= sy - this.lastClient[1];
      this.lastClient = [sx, sy];
      this.paint();
      return;
    }
    const [wx, wy] = this.toWorld(sx, sy);
    if (this.dragging === "marker") {
      this.callbacks.onMarkerDrag(wx, wy);
      return;
    }
    this.callbacks.onHover(
      hitTest(this.scene, wx, wy, 6 / this.view.scale),
    );
  }

  private onUp(): void {
    if (this.dragging === "marker") this.callbacks.onMarkerDrop();
    this.dragging = null;
  }

  private onWheel(e: WheelEvent): void {
    e.preventDefault();
    const [sx, sy] = this.clientPos(e);
    const [wx, wy] = this.toWorld(sx, sy);
    const factor = e.deltaY < 0 ? 1.15 : 1 / 1.15;
    this.view.scale = Math.min(40, Math.max(0.25, this.view.scale * factor));
    // Keep the world point under the cursor fixed while zooming.
    this.view.panX = sx - wx * this.view.scale;
    this.view.panY = this.canvas.height - sy - wy * this.view.scale;
    this.paint();
  }
}
