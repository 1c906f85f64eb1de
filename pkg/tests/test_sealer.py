"""Seal planning and compilation: temperatures, feeds, and motion safety.

The compiled program is checked by replaying its moves with a small
interpreter: the nozzle may only be at seal height while on (or next to)
the requested pattern, never elsewhere.
"""
import math

import pytest

from sealprint.gcode import BedTemp, Move, NozzleTemp, emit
from sealprint.geometry import PlanarPath, Point2, PrintRegion, path_from_pairs
from sealprint.materials import SealingSettings, builtin_stacks, default_profile
from sealprint.sealer import SealPlanError, compile_seal, plan_seal

REGION = PrintRegion(width=200.0, depth=200.0)


def _stack(name="tpu_film_on_tpu_film"):
    return default_profile().stack(name)


def _square(cx=50.0, cy=50.0, half=20.0):
    return path_from_pairs(
        [(cx - half, cy - half), (cx + half, cy - half),
         (cx + half, cy + half), (cx - half, cy + half)], closed=True)


# ---------------------------------------------------------------------------
# planning
# ---------------------------------------------------------------------------

def test_plan_orders_and_samples_curves():
    far = _square(150, 150)
    near = _square(20, 20, half=10)
    plan = plan_seal([far, near], _stack(), REGION)
    assert [c.source_index for c in plan.curves] == [1, 0]
    for curve in plan.curves:
        for a, b in zip(curve.points, curve.points[1:]):
            assert a.distance_to(b) <= 0.5 + 1e-9
        assert curve.points[0] == curve.points[-1]  # closed squares


def test_plan_rejects_out_of_region_geometry():
    bad = path_from_pairs([(190, 190), (210, 190)])
    with pytest.raises(SealPlanError) as err:
        plan_seal([_square(), bad], _stack(), REGION)
    assert "region" in str(err.value)
    assert err.value.report is not None
    assert err.value.report.violations[0].path_index == 1


def test_plan_rejects_empty_job():
    with pytest.raises(SealPlanError, match="at least one"):
        plan_seal([], _stack(), REGION)


def test_plan_warns_on_self_intersection():
    bowtie = path_from_pairs([(10, 10), (30, 30), (30, 10), (10, 30)], closed=True)
    plan = plan_seal([bowtie], _stack(), REGION)
    assert any("crosses itself" in w for w in plan.warnings)


def test_plan_length_accounting():
    plan = plan_seal([_square(50, 50, 20)], _stack(), REGION)
    assert plan.contact_length == pytest.approx(160.0)
    assert plan.travel_length == pytest.approx(math.hypot(30, 30))
    assert plan.lift_z == pytest.approx(plan.stack.seal_z + 2.0)
    assert plan.estimated_seconds > plan.contact_length / 5.0


# ---------------------------------------------------------------------------
# compilation
# ---------------------------------------------------------------------------

def test_compiled_program_uses_contact_feed_and_stack_temps():
    for stack in builtin_stacks():
        text = emit(compile_seal(plan_seal([_square()], stack, REGION)))
        assert "F300" in text
        assert f"M109 S{stack.nozzle_temp:g}" in text
        assert f"M190 S{stack.bed_temp:g}" in text


def test_compiled_program_has_no_extrusion():
    prog = compile_seal(plan_seal([_square()], _stack(), REGION))
    for cmd in prog.commands:
        if isinstance(cmd, Move):
            assert cmd.e is None
    assert "E" not in "".join(
        line.split(";")[0] for line in emit(prog).splitlines())


def test_compiled_phases_cover_program():
    prog = compile_seal(plan_seal([_square()], _stack(), REGION))
    assert [s.name for s in prog.phases] == ["preamble", "sealing"]
    assert prog.phases[0].start == 0
    assert prog.phases[-1].stop == len(prog.commands)


def test_preamble_heats_before_sealing():
    prog = compile_seal(plan_seal([_square()], _stack(), REGION))
    pre = prog.phase_commands("preamble")
    assert any(isinstance(c, NozzleTemp) and c.wait for c in pre)
    assert any(isinstance(c, BedTemp) and c.wait for c in pre)
    seal_cmds = prog.phase_commands("sealing")
    assert not any(isinstance(c, (NozzleTemp, BedTemp)) for c in seal_cmds)


def test_one_descend_per_curve():
    paths = [_square(40, 40, 10), _square(100, 100, 10), _square(160, 160, 10)]
    plan = plan_seal(paths, _stack(), REGION)
    prog = compile_seal(plan)
    seal_z = plan.stack.seal_z
    descents = [
        c for c in prog.commands
        if isinstance(c, Move) and not c.rapid and c.z == seal_z
        and c.x is None and c.y is None
    ]
    assert len(descents) == 3


def _replay(prog):
    """Tiny interpreter: yields (x, y, z, contact) after every move."""
    x = y = z = None
    for cmd in prog.commands:
        if isinstance(cmd, Move):
            x = cmd.x if cmd.x is not None else x
            y = cmd.y if cmd.y is not None else y
            z = cmd.z if cmd.z is not None else z
            yield x, y, z, not cmd.rapid


def _distance_to_paths(x, y, paths):
    best = float("inf")
    for path in paths:
        verts = list(path.vertices)
        if path.closed:
            verts.append(verts[0])
        for a, b in zip(verts, verts[1:]):
            vx, vy = b.x - a.x, b.y - a.y
            L2 = vx * vx + vy * vy
            if L2 == 0:
                d = math.hypot(x - a.x, y - a.y)
            else:
                t = max(0.0, min(1.0, ((x - a.x) * vx + (y - a.y) * vy) / L2))
                d = math.hypot(x - (a.x + t * vx), y - (a.y + t * vy))
            best = min(best, d)
    return best


def test_replay_touches_seal_height_only_on_pattern(rng):
    for _ in range(50):
        paths = []
        for _ in range(rng.randint(1, 4)):
            cx, cy = rng.uniform(30, 170), rng.uniform(30, 170)
            n = rng.randint(3, 8)
            pts = []
            for k in range(n):
                ang = 2 * math.pi * k / n
                r = rng.uniform(5, 20)
                pts.append((cx + r * math.cos(ang), cy + r * math.sin(ang)))
            paths.append(path_from_pairs(pts, closed=rng.random() < 0.5))
        plan = plan_seal(paths, _stack(), REGION)
        prog = compile_seal(plan)
        seal_z = plan.stack.seal_z
        for x, y, z, contact in _replay(prog):
            if z is not None and z <= seal_z + 1e-9 and x is not None:
                assert _distance_to_paths(x, y, paths) <= 0.25, (x, y, z)


def test_travel_happens_at_lift_height():
    paths = [_square(40, 40, 10), _square(140, 140, 10)]
    plan = plan_seal(paths, _stack(), REGION)
    prog = compile_seal(plan)
    z = None
    for cmd in prog.commands:
        if isinstance(cmd, Move):
            if cmd.z is not None:
                z = cmd.z
            elif cmd.rapid and (cmd.x is not None or cmd.y is not None):
                assert z == pytest.approx(plan.lift_z)


def test_travel_feed_matches_settings():
    settings = SealingSettings(travel_speed=50.0)
    plan = plan_seal([_square(40, 40, 10), _square(140, 140, 10)],
                     _stack(), REGION, settings)
    prog = compile_seal(plan)
    rapid_feeds = {c.f for c in prog.commands
                   if isinstance(c, Move) and c.rapid and c.f is not None}
    assert rapid_feeds == {3000.0}  # 50 mm/s


def test_compiled_output_is_deterministic():
    paths = [_square(40, 40, 10), _square(140, 140, 10)]
    a = emit(compile_seal(plan_seal(paths, _stack(), REGION)))
    b = emit(compile_seal(plan_seal(paths, _stack(), REGION)))
    assert a == b


def test_compiled_seal_height_matches_stack():
    stack = _stack("tpu_film_on_tpu_coated_fabric")
    plan = plan_seal([_square()], stack, REGION)
    prog = compile_seal(plan)
    contact_zs = {c.z for c in prog.commands
                  if isinstance(c, Move) and not c.rapid and c.z is not None}
    assert len(contact_zs) == 1
    assert contact_zs.pop() == pytest.approx(stack.seal_z)
