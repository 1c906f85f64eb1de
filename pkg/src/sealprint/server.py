"""HTTP API for the browser studio.

The server owns one project file.  Clients read and update the project
document (with an optimistic version counter), request preview geometry for
the canvas, and download merged hybrid jobs.  All numeric content shown in
the studio comes from these endpoints -- the frontend does no process math.

Endpoints:
  GET  /api/project   the current project document
  PUT  /api/project   replace it (version must match; bumped on success)
  POST /api/preview   seal-pass geometry, plus first-layer/offset info when
                      sliced G-code is uploaded
  POST /api/merge     merged hybrid job as text/plain with offset headers
  GET  /api/progress  tiny status blob (project version, last merge)

Static files from ``frontend/dist`` (when present next to the project or
under the package) are served at the web root.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from sealprint.gcode import parse
from sealprint.materials import ProfileError
from sealprint.merger import FabJob, MergeError, marker_outline, merge, recover_offset
from sealprint.motion import first_layer_extrusions
from sealprint.project import (
    ProjectError,
    load_project,
    project_from_dict,
    project_to_dict,
    save_project,
)
from sealprint.sealer import SealPlanError, compile_seal, plan_seal

__all__ = ["create_app"]


def _error_422(loc: list[str], msg: str) -> JSONResponse:
    return JSONResponse(
        status_code=422,
        content={"detail": [{"loc": loc, "msg": msg, "type": "value_error"}]},
    )


def _error_409(code: str, msg: str) -> JSONResponse:
    return JSONResponse(status_code=409, content={"error": code, "detail": msg})


class _State:
    """Mutable server state guarded by a single lock."""

    def __init__(self, project_path: str):
        self.path = project_path
        self.lock = threading.Lock()
        self.project = load_project(project_path)
        self.last_merge: dict[str, Any] | None = None


def _plan_for(state: _State):
    project = state.project
    profile = project.load_profile()
    stack = profile.stack(project.stack_name)
    paths, pattern_warnings = project.load_pattern_paths()
    plan = plan_seal(paths, stack, project.region, profile.sealing)
    return plan, profile, pattern_warnings


def _preview_payload(state: _State, gcode_text: str | None):
    project = state.project
    plan, profile, warnings = _plan_for(state)
    stack = plan.stack
    payload: dict[str, Any] = {
        "sealing_only": gcode_text is None,
        "region": {
            "width": project.region.width,
            "depth": project.region.depth,
            "origin": [project.region.origin.x, project.region.origin.y],
        },
        "stack": {
            "name": stack.name,
            "nozzle_temp": stack.nozzle_temp,
            "bed_temp": stack.bed_temp,
            "seal_z": stack.seal_z,
            "seal_speed": stack.seal_speed,
        },
        "marker": {
            "center": [project.marker.center.x, project.marker.center.y],
            "arm_length": project.marker.arm_length,
            "arm_width": project.marker.arm_width,
            "outline": [[p.x, p.y] for p in marker_outline(project.marker)],
        },
        "sealing": {
            "lift_z": plan.lift_z,
            "contact_length": plan.contact_length,
            "travel_length": plan.travel_length,
            "estimated_seconds": plan.estimated_seconds,
            "curves": [
                {
                    "points": [[p.x, p.y] for p in curve.points],
                    "closed": curve.closed,
                    "length": curve.length,
                    "z": stack.seal_z,
                    "speed_mm_s": stack.seal_speed,
                }
                for curve in plan.curves
            ],
        },
        "phases": ["preamble", "sealing"],
        "phase_spans": [
            {"name": s.name, "start": s.start, "stop": s.stop}
            for s in compile_seal(plan).phases
        ],
        "print_first_layer": None,
        "offset": None,
        "warnings": list(warnings) + list(plan.warnings),
        "diagnostics": [],
    }
    if gcode_text is None:
        return payload

    program = parse(gcode_text)
    payload["diagnostics"] = list(program.diagnostics)
    if not program.layer_marks:
        return _error_422(
            ["body", "gcode"],
            "uploaded file has no layer markers (\";LAYER_CHANGE\" or"
            " \";LAYER:<n>\"); it does not look like sliced G-code",
        )
    payload["phases"] = ["preamble", "sealing", "pause", "printing", "postamble"]
    payload["print_first_layer"] = [
        [[a[0], a[1]], [b[0], b[1]]] for a, b in first_layer_extrusions(program)
    ]
    try:
        offset = recover_offset(program, project.marker)
        payload["offset"] = {
            "dx": offset.dx,
            "dy": offset.dy,
            "distance": offset.distance,
            "aligned": offset.aligned,
        }
    except MergeError as exc:
        payload["warnings"].append(f"offset not recovered ({exc.code}): {exc}")
    return payload


def create_app(project_path: str) -> FastAPI:
    state = _State(project_path)
    app = FastAPI(title="sealprint studio API", version="0.1.0")

    @app.get("/api/project")
    def get_project():
        with state.lock:
            return project_to_dict(state.project)

    @app.put("/api/project")
    async def put_project(request: Request):
        try:
            doc = await request.json()
        except Exception:
            return _error_422(["body"], "request body must be a JSON object")
        if not isinstance(doc, dict):
            return _error_422(["body"], "request body must be a JSON object")
        with state.lock:
            current = state.project
            try:
                incoming = project_from_dict(doc, current.root)
            except ProjectError as exc:
                return _error_422(["body"], str(exc))
            if incoming.version != current.version:
                return _error_409(
                    "version_conflict",
                    f"project is at version {current.version}, request"
                    f" carries {incoming.version}; reload and retry",
                )
            try:
                profile = incoming.load_profile()
            except (ProfileError, OSError) as exc:
                return _error_422(["body", "profile"], str(exc))
            if incoming.stack_name not in profile.stacks:
                known = ", ".join(sorted(profile.stacks)) or "(none)"
                return _error_422(
                    ["body", "stack"],
                    f"unknown material stack {incoming.stack_name!r};"
                    f" profile defines: {known}",
                )
            import dataclasses

            accepted = dataclasses.replace(incoming, version=current.version + 1)
            save_project(accepted, state.path)
            state.project = accepted
            return project_to_dict(accepted)

    @app.post("/api/preview")
    async def preview(request: Request):
        body = b""
        try:
            body = await request.body()
        except Exception:
            pass
        gcode_text: str | None = None
        if body:
            import json

            try:
                doc = json.loads(body)
            except ValueError:
                return _error_422(["body"], "request body must be JSON")
            if doc is not None and not isinstance(doc, dict):
                return _error_422(["body"], "request body must be a JSON object")
            if doc:
                gcode_text = doc.get("gcode")
                if gcode_text is not None and not isinstance(gcode_text, str):
                    return _error_422(["body", "gcode"], "gcode must be a string")
        with state.lock:
            try:
                result = _preview_payload(state, gcode_text)
            except (ProjectError, ProfileError, SealPlanError) as exc:
                return _error_422(["body"], str(exc))
            return result

    @app.post("/api/merge")
    async def do_merge(request: Request):
        import json

        try:
            doc = json.loads(await request.body())
        except ValueError:
            return _error_422(["body"], "request body must be JSON")
        if not isinstance(doc, dict) or not isinstance(doc.get("gcode"), str):
            return _error_422(
                ["body", "gcode"], "a 'gcode' string with the sliced print is required"
            )
        with state.lock:
            try:
                plan, profile, _ = _plan_for(state)
            except (ProjectError, ProfileError, SealPlanError) as exc:
                return _error_422(["body"], str(exc))
            program = parse(doc["gcode"])
            try:
                result = merge(
                    FabJob(
                        plan=plan,
                        print_program=program,
                        marker=state.project.marker,
                        profile=profile,
                    )
                )
            except MergeError as exc:
                return _error_409(exc.code, str(exc))
            state.last_merge = {
                "offset": {"dx": result.offset.dx, "dy": result.offset.dy},
                "aligned": result.offset.aligned,
                "stripped_moves": result.strip.removed_commands,
                "bed_rewrites": result.bed_rewrites,
                "commands": len(result.program.commands),
            }
            return PlainTextResponse(
                result.text,
                headers={
                    "X-Offset-Dx": f"{result.offset.dx:.6f}",
                    "X-Offset-Dy": f"{result.offset.dy:.6f}",
                    "X-Stripped-Moves": str(result.strip.removed_commands),
                    "X-Bed-Rewrites": str(result.bed_rewrites),
                },
            )

    @app.get("/api/progress")
    def progress():
        with state.lock:
            return {
                "project_version": state.project.version,
                "last_merge": state.last_merge,
            }

    _mount_frontend(app, Path(project_path).resolve().parent)
    return app


def _mount_frontend(app: FastAPI, project_dir: Path) -> None:
    """Serve the built studio (frontend/dist) if one can be found."""
    candidates = [
        project_dir / "frontend" / "dist",
        # src/sealprint/server.py -> three levels up is the checkout root
        Path(__file__).resolve().parents[2] / "frontend" / "dist",
    ]
    for candidate in candidates:
        if candidate.is_dir():
            from fastapi.staticfiles import StaticFiles

            app.mount("/", StaticFiles(directory=str(candidate), html=True), name="studio")
            return
