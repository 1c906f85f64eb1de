import { afterEach, describe, expect, it, vi } from "vitest";
import { StudioApi } from "../../src/api.js";
import { jsonResponse, mockFetch, sampleProject } from "./helpers.js";

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("StudioApi", () => {
  it("round-trips the project document", async () => {
    mockFetch([
      (url) =>
        url.endsWith("/api/project") ? jsonResponse(sampleProject(2)) : null,
    ]);
    const result = await new StudioApi().getProject();
    expect(result.ok).toBe(true);
    if (result.ok) expect(result.doc.version).toBe(2);
  });

  it("maps a 409 onto its error code and detail", async () => {
    mockFetch([
      () =>
        jsonResponse(
          {
            error: "version_conflict",
            detail: "project is at version 3, request carries 1",
          },
          409,
        ),
    ]);
    const result = await new StudioApi().putProject(sampleProject(1));
    expect(result.ok).toBe(false);
    if (!result.ok) {
      expect(result.status).toBe(409);
      expect(result.code).toBe("version_conflict");
      expect(result.message).toContain("version 3");
    }
  });

  it("joins 422 detail entries into one message with field paths", async () => {
    mockFetch([
      () =>
        jsonResponse(
          {
            detail: [
              {
                loc: ["body", "stack"],
                msg: "unknown material stack 'nylon'",
                type: "value_error",
              },
            ],
          },
          422,
        ),
    ]);
    const result = await new StudioApi().preview();
    expect(result.ok).toBe(false);
    if (!result.ok) {
      expect(result.message).toBe("body.stack: unknown material stack 'nylon'");
    }
  });

  it("returns merge bytes verbatim plus parsed summary headers", async () => {
    const text = "G28\nM400 U1\nG1 X1 Y1\n";
    mockFetch([
      (url) =>
        url.endsWith("/api/merge")
          ? new Response(text, {
              status: 200,
              headers: {
                "Content-Type": "text/plain; charset=utf-8",
                "X-Offset-Dx": "0.420000",
                "X-Offset-Dy": "-0.310000",
                "X-Stripped-Moves": "25",
                "X-Bed-Rewrites": "2",
              },
            })
          : null,
    ]);
    const result = await new StudioApi().merge("G28\n");
    expect(result.ok).toBe(true);
    if (result.ok) {
      expect(new TextDecoder().decode(result.outcome.bytes)).toBe(text);
      expect(result.outcome.offsetDx).toBeCloseTo(0.42, 9);
      expect(result.outcome.offsetDy).toBeCloseTo(-0.31, 9);
      expect(result.outcome.strippedMoves).toBe(25);
      expect(result.outcome.bedRewrites).toBe(2);
    }
  });

  it("sends the uploaded text as the preview body", async () => {
    const log = mockFetch([() => jsonResponse({ sealing_only: false })]);
    await new StudioApi().preview("G28\n;LAYER_CHANGE\n");
    expect(log.calls).toHaveLength(1);
    expect(JSON.parse(log.calls[0]!.body!)).toEqual({
      gcode: "G28\n;LAYER_CHANGE\n",
    });
  });

  it("sends an empty object when previewing without an upload", async () => {
    const log = mockFetch([() => jsonResponse({ sealing_only: true })]);
    await new StudioApi().preview();
    expect(JSON.parse(log.calls[0]!.body!)).toEqual({});
  });

  it("keeps the HTTP status line for non-JSON failures", async () => {
    mockFetch([() => new Response("boom", { status: 500, statusText: "ISE" })]);
    const result = await new StudioApi().progress();
    expect(result.ok).toBe(false);
    if (!result.ok) expect(result.message).toBe("500 ISE");
  });

  it("prefixes every path with the configured base", async () => {
    const log = mockFetch([() => jsonResponse({})]);
    await new StudioApi("http://127.0.0.1:9999").progress();
    expect(log.calls[0]!.url).toBe("http://127.0.0.1:9999/api/progress");
  });
});
