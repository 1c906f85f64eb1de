/** Typed client for the local studio API.
 *
 * Maps the server's three failure shapes onto one `ApiFailure`:
 *   - 422 {"detail": [{loc, msg, ...}]}   (validation)
 *   - 409 {"error": code, "detail": msg}  (version conflict, merge failure)
 *   - anything else                        (status + text)
 */

import type {
  ApiFailure,
  ApiResult,
  MergeOutcome,
  PreviewPayload,
  ProgressInfo,
  ProjectDoc,
} from "./types.js";

async function failureFrom(response: Response): Promise<ApiFailure> {
  let message = `${response.status} ${response.statusText}`;
  let code: string | undefined;
  try {
    const body = await response.json();
    if (Array.isArray(body?.detail)) {
      message = body.detail
        .map((d: { loc?: unknown[]; msg?: string }) =>
          d.loc ? `${d.loc.join(".")}: ${d.msg}` : String(d.msg),
        )
        .join("; ");
    } else if (typeof body?.detail === "string") {
      message = body.detail;
    }
    if (typeof body?.error === "string") code = body.error;
  } catch {
    // non-JSON error body; keep the status line
  }
  return { ok: false, status: response.status, code, message };
}

export class StudioApi {
  constructor(private readonly base: string = "") {}

  private url(path: string): string {
    return this.base + path;
  }

  async getProject(): Promise<ApiResult<{ doc: ProjectDoc }>> {
    const r = await fetch(this.url("/api/project"));
    if (!r.ok) return failureFrom(r);
    return { ok: true, doc: (await r.json()) as ProjectDoc };
  }

  async putProject(doc: ProjectDoc): Promise<ApiResult<{ doc: ProjectDoc }>> {
    const r = await fetch(this.url("/api/project"), {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(doc),
    });
    if (!r.ok) return failureFrom(r);
    return { ok: true, doc: (await r.json()) as ProjectDoc };
  }

  async preview(
    gcode?: string,
  ): Promise<ApiResult<{ payload: PreviewPayload }>> {
    const r = await fetch(this.url("/api/preview"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(gcode === undefined ? {} : { gcode }),
    });
    if (!r.ok) return failureFrom(r);
    return { ok: true, payload: (await r.json()) as PreviewPayload };
  }

  async merge(gcode: string): Promise<ApiResult<{ outcome: MergeOutcome }>> {
    const r = await fetch(this.url("/api/merge"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ gcode }),
    });
    if (!r.ok) return failureFrom(r);
    const bytes = new Uint8Array(await r.arrayBuffer());
    return {
      ok: true,
      outcome: {
        bytes,
        offsetDx: Number(r.headers.get("X-Offset-Dx") ?? "0"),
        offsetDy: Number(r.headers.get("X-Offset-Dy") ?? "0"),
        strippedMoves: Number(r.headers.get("X-Stripped-Moves") ?? "0"),
        bedRewrites: Number(r.headers.get("X-Bed-Rewrites") ?? "0"),
      },
    };
  }

  async progress(): Promise<ApiResult<{ info: ProgressInfo }>> {
    const r = await fetch(this.url("/api/progress"));
    if (!r.ok) return failureFrom(r);
    return { ok: true, info: (await r.json()) as ProgressInfo };
  }
}
