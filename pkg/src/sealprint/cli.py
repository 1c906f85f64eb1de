"""Command-line interface.

Commands:
  seal      plan the heat-seal pass for a project and write its G-code
  export    write the project's parts plus alignment marker as one STL
  merge     splice a sliced print file with the seal pass into a hybrid job
  plan4d    suggest self-bending strip parameters (circle or arch)
  texture   pack bonding dots into a rectangle, optionally as an SVG pattern
  validate  check a project file and everything it references
  serve     run the HTTP API for the browser studio

All outputs are deterministic: running a command twice with the same inputs
produces byte-identical files.  Exit codes: 0 success, 2 bad input or
validation failure, 1 unexpected internal error.
"""

from __future__ import annotations

import argparse
import sys

from sealprint import __version__
from sealprint.gcode import emit, parse
from sealprint.geometry import Point2, PlanarPath
from sealprint.materials import ProfileError, load_profile
from sealprint.merger import (
    FabJob,
    MergeError,
    export_parts_with_marker,
    merge,
)
from sealprint.morph4d import (
    ArchPattern,
    CalibrationError,
    default_model,
    generate_arch_pattern,
    generate_dot_texture,
    load_calibration,
    plan_for_circle,
    plan_for_curvature,
)
from sealprint.project import (
    ProjectError,
    atomic_write_text,
    load_project,
    validate_project,
)
from sealprint.sealer import SealPlanError, compile_seal, plan_seal
from sealprint.stl import write_binary_stl


class UserError(Exception):
    """A problem the user can fix; printed without a traceback, exit 2."""


def _atomic_write_stl(mesh, out: str) -> None:
    import os
    import tempfile
    from pathlib import Path

    out_path = Path(out)
    fd, tmp = tempfile.mkstemp(dir=out_path.parent or ".", prefix=f".{out_path.name}.")
    os.close(fd)
    try:
        write_binary_stl(mesh, tmp, note="parts + alignment marker")
        os.replace(tmp, out)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _load_project_or_fail(path: str):
    try:
        return load_project(path)
    except ProjectError as exc:
        raise UserError(str(exc)) from exc


def _profile_for(project, override: str | None):
    try:
        if override is not None:
            return load_profile(override)
        return project.load_profile()
    except (ProfileError, OSError) as exc:
        raise UserError(f"profile: {exc}") from exc


def _plan_from_project(project, profile):
    try:
        stack = profile.stack(project.stack_name)
    except ProfileError as exc:
        raise UserError(str(exc)) from exc
    try:
        paths, warnings = project.load_pattern_paths()
    except ProjectError as exc:
        raise UserError(str(exc)) from exc
    try:
        plan = plan_seal(paths, stack, project.region, profile.sealing)
    except SealPlanError as exc:
        raise UserError(str(exc)) from exc
    return plan, warnings


def _print_plan_summary(plan, warnings):
    print(f"stack: {plan.stack.name}")
    print(
        f"temperatures: nozzle {plan.stack.nozzle_temp:g} C,"
        f" bed {plan.stack.bed_temp:g} C"
    )
    print(f"curves: {len(plan.curves)}")
    print(f"contact length: {plan.contact_length:.1f} mm")
    print(f"travel length: {plan.travel_length:.1f} mm")
    print(f"estimated time: {plan.estimated_seconds:.0f} s")
    for w in warnings:
        print(f"warning: {w}")
    for w in plan.warnings:
        print(f"warning: {w}")


def _with_seed_time(text: str, seed_time: str | None) -> str:
    """Outputs carry no clock reads; an explicit seed time is the only stamp."""
    if seed_time is None:
        return text
    return f"; job-time: {seed_time}\n{text}"


def cmd_seal(args) -> int:
    project = _load_project_or_fail(args.project)
    profile = _profile_for(project, args.profile)
    plan, warnings = _plan_from_project(project, profile)
    _print_plan_summary(plan, warnings)
    if args.dry_run:
        print("dry run: nothing written")
        return 0
    out = args.out or str(project.output_path("seal"))
    text = _with_seed_time(emit(compile_seal(plan)), args.seed_time)
    atomic_write_text(out, text)
    print(f"wrote {out} ({len(text.splitlines())} lines)")
    return 0


def cmd_export(args) -> int:
    import warnings as warningslib

    project = _load_project_or_fail(args.project)
    try:
        parts = project.load_part_meshes()
    except ProjectError as exc:
        raise UserError(str(exc)) from exc
    with warningslib.catch_warnings(record=True) as caught:
        warningslib.simplefilter("always")
        mesh = export_parts_with_marker(parts, project.marker)
    for w in caught:
        print(f"warning: {w.message}")
    if args.dry_run:
        print(f"dry run: would write {mesh.triangle_count} triangles")
        return 0
    out = args.out or str(project.output_path("export"))
    _atomic_write_stl(mesh, out)
    print(
        f"wrote {out}: {mesh.triangle_count} triangles"
        f" ({len(parts)} part file(s) + marker)"
    )
    return 0


def cmd_merge(args) -> int:
    project = _load_project_or_fail(args.project)
    profile = _profile_for(project, args.profile)
    if args.bed_ceiling is not None:
        if args.bed_ceiling <= 0:
            raise UserError("--bed-ceiling must be positive")
        import dataclasses

        profile = dataclasses.replace(
            profile,
            printer=dataclasses.replace(profile.printer, bed_ceiling=args.bed_ceiling),
        )
    plan, warnings = _plan_from_project(project, profile)
    try:
        with open(args.gcode, "r", encoding="utf-8", errors="replace") as fh:
            print_text = fh.read()
    except OSError as exc:
        raise UserError(f"cannot read sliced file {args.gcode}: {exc}") from exc
    print_program = parse(print_text)
    try:
        result = merge(
            FabJob(
                plan=plan,
                print_program=print_program,
                marker=project.marker,
                profile=profile,
            )
        )
    except MergeError as exc:
        raise UserError(f"merge failed ({exc.code}): {exc}") from exc

    _print_plan_summary(plan, warnings)
    o = result.offset
    print(
        f"marker offset: dx={o.dx:+.3f} mm dy={o.dy:+.3f} mm"
        f" ({'aligned' if o.aligned else 'shifted; print phase translated back'})"
    )
    print(
        f"stripped {result.strip.removed_commands} marker move(s),"
        f" {result.strip.removed_length:.1f} mm of extrusion"
    )
    print(f"bed temperature commands clamped: {result.bed_rewrites}")
    for w in result.warnings:
        print(f"warning: {w}")
    for d in result.program.diagnostics:
        print(f"note: {d}")
    if args.dry_run:
        print("dry run: nothing written")
        return 0
    out = args.out or str(project.output_path("merged"))
    atomic_write_text(out, _with_seed_time(result.text, args.seed_time))
    print(f"wrote {out} ({len(result.program.commands)} commands)")
    return 0


def _model_for(calibration: str | None):
    if calibration is None:
        return default_model()
    try:
        return load_calibration(calibration)
    except (CalibrationError, OSError) as exc:
        raise UserError(f"calibration: {exc}") from exc


def _warn_uncalibrated(model):
    if not model.calibrated:
        print(
            "warning: using the shipped placeholder calibration -- its"
            " numbers are plausible but not measured; calibrate your own"
            " machine for real parts"
        )


def _print_bend_plans(plans, tolerance: float) -> None:
    target = plans[0].target_curvature
    print(
        f"target curvature {target:.5f} 1/mm; {len(plans)} plan(s)"
        f" within {tolerance * 100:g}%:"
    )
    for p in plans:
        print(
            f"  width {p.width:g} mm, {p.count} points"
            f" (bonded {p.bonded_fraction * 100:.0f}%):"
            f" curvature {p.curvature:.5f}, off by"
            f" {p.relative_error * 100:.2f}%"
        )
        for a in p.advisories:
            print(f"    advisory: {a}")


def cmd_plan4d(args) -> int:
    if args.arch:
        for name in ("count", "span", "foot_width"):
            if getattr(args, name) is None:
                raise UserError(
                    f"--arch needs --{name.replace('_', '-')} (and --length"
                    " for the base)"
                )
        arch_height = args.arch_height
        if arch_height is None:
            arch_height = args.span / 4.0  # a shallow nominal rise
        try:
            spec = ArchPattern(
                span=args.span,
                foot_width=args.foot_width,
                arch_height=arch_height,
                count=args.count,
            )
            base = PlanarPath((Point2(0.0, 0.0), Point2(args.length, 0.0)))
            layout = generate_arch_pattern(spec, base)
        except ValueError as exc:
            raise UserError(str(exc)) from exc
        print(
            f"base {layout.base_length:g} mm, {len(layout.feet)} feet of"
            f" {spec.foot_width:g} mm every {spec.span:g} mm"
        )
        print(f"profile: {layout.describe_profile()}")
        print(f"bonded fraction: {layout.bonded_fraction * 100:.1f}%")
        print(f"clear gap between feet: {layout.clear_gap:g} mm")
        feet = ", ".join(f"[{a:g}, {b:g}]" for a, b in layout.feet)
        print(f"feet (mm along the base): {feet}")
        for a in layout.advisories:
            print(f"advisory: {a}")
        return 0

    model = _model_for(args.calibration)
    _warn_uncalibrated(model)
    print(
        f"strip {args.length:g} mm, bonding points"
        f" {model.point_width:g} mm wide"
    )
    try:
        if args.curvature is not None:
            plans = plan_for_curvature(
                model, args.curvature, args.length, tolerance=args.tolerance
            )
        else:
            plans = plan_for_circle(model, args.length, tolerance=args.tolerance)
    except (CalibrationError, ValueError) as exc:
        raise UserError(str(exc)) from exc
    _print_bend_plans(plans, args.tolerance)
    return 0


def _dots_svg(texture) -> str:
    r = texture.diameter / 2.0
    rows = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{texture.width}mm"'
        f' height="{texture.height}mm"'
        f' viewBox="0 0 {texture.width} {texture.height}">'
    ]
    for cx, cy in texture.centers:
        # Each dot as two half-circle arcs so the pattern loader (which
        # converts only <path> elements) can seal it directly.
        rows.append(
            f'  <path d="M {cx - r} {cy} A {r} {r} 0 1 1 {cx + r} {cy}'
            f' A {r} {r} 0 1 1 {cx - r} {cy} Z"/>'
        )
    rows.append("</svg>")
    return "\n".join(rows) + "\n"


def cmd_texture(args) -> int:
    try:
        texture = generate_dot_texture(
            args.width, args.height, args.diameter, args.pitch
        )
    except ValueError as exc:
        raise UserError(str(exc)) from exc
    print(
        f"{len(texture.centers)} dots of {texture.diameter:g} mm at pitch"
        f" {texture.pitch:g} mm in {texture.width:g} x {texture.height:g} mm"
    )
    print(f"bonded coverage: {texture.coverage * 100:.1f}%")
    if args.out:
        atomic_write_text(args.out, _dots_svg(texture))
        print(f"wrote {args.out} (usable as a seal pattern)")
    return 0


def cmd_validate(args) -> int:
    project = _load_project_or_fail(args.project)
    problems = validate_project(project)
    if problems:
        for p in problems:
            print(f"problem: {p}", file=sys.stderr)
        raise UserError(f"{len(problems)} problem(s) found")
    print("project OK")
    return 0


def cmd_serve(args) -> int:
    try:
        import uvicorn
    except ImportError as exc:  # pragma: no cover - dependency is declared
        raise UserError(f"the serve command needs uvicorn installed: {exc}") from exc
    from sealprint.server import create_app

    project = _load_project_or_fail(args.project)  # fail fast on bad files
    del project
    app = create_app(args.project)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sealprint",
        description=(
            "Toolchain for hybrid fabric/print jobs: heat-seal toolpaths,"
            " aligned G-code merging, and self-bending pattern planning."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("seal", help="write the heat-seal G-code for a project")
    p.add_argument("--project", required=True, help="project YAML file")
    p.add_argument("--profile", help="override the project's process profile")
    p.add_argument("--out", help="output path (default: project outputs.seal)")
    p.add_argument("--dry-run", action="store_true", help="plan and report only")
    p.add_argument(
        "--seed-time",
        help="text stamped into the file header (outputs carry no clock reads)",
    )
    p.set_defaults(func=cmd_seal)

    p = sub.add_parser("export", help="write parts plus alignment marker as STL")
    p.add_argument("--project", required=True)
    p.add_argument("--out", help="output path (default: project outputs.export)")
    p.add_argument("--dry-run", action="store_true", help="combine and report only")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("merge", help="merge a sliced print with the seal pass")
    p.add_argument("--project", required=True)
    p.add_argument("--gcode", required=True, help="sliced print file to merge")
    p.add_argument("--profile", help="override the project's process profile")
    p.add_argument("--out", help="output path (default: project outputs.merged)")
    p.add_argument(
        "--bed-ceiling",
        type=float,
        help="max bed temperature (C) allowed during the print phase",
    )
    p.add_argument("--dry-run", action="store_true", help="merge and report only")
    p.add_argument(
        "--seed-time",
        help="text stamped into the file header (outputs carry no clock reads)",
    )
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("plan4d", help="plan self-bending strip parameters")
    p.add_argument(
        "--length", type=float, default=100.0,
        help="strip / base length in mm (default 100)",
    )
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument(
        "--circle", action="store_true", help="bend the strip into a full circle"
    )
    mode.add_argument(
        "--curvature", type=float, help="target curvature in 1/mm"
    )
    mode.add_argument(
        "--arch", action="store_true",
        help="evenly spaced feet with arched spans (needs --count/--span/--foot-width)",
    )
    p.add_argument("--calibration", help="calibration YAML (default: placeholder)")
    p.add_argument(
        "--tolerance", type=float, default=0.05,
        help="max relative curvature error (default 0.05)",
    )
    p.add_argument("--count", type=int, help="number of arches (--arch)")
    p.add_argument(
        "--span", type=float, help="foot-to-foot start distance (--arch)"
    )
    p.add_argument("--foot-width", type=float, help="bonded foot width (--arch)")
    p.add_argument(
        "--arch-height", type=float,
        help="arch rise in mm (--arch; default span/4)",
    )
    p.set_defaults(func=cmd_plan4d)

    p = sub.add_parser("texture", help="pack bonding dots into a rectangle")
    p.add_argument("--width", type=float, required=True)
    p.add_argument("--height", type=float, required=True)
    p.add_argument("--diameter", type=float, required=True)
    p.add_argument("--pitch", type=float, required=True)
    p.add_argument("--out", help="write the dots as an SVG pattern")
    p.set_defaults(func=cmd_texture)

    p = sub.add_parser("validate", help="check a project file and its references")
    p.add_argument("--project", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("serve", help="run the HTTP API / studio server")
    p.add_argument("--project", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 1


if __name__ == "__main__":
    sys.exit(main())
