"""Kinematic replay of a command list: where the nozzle goes, what extrudes.

The replayer walks commands in order, tracking logical position, feed, and
extruder state.  Moves carry their own modal stamps (set at parse time or by
whichever code constructed them), so replay works identically on parsed
files and on programs assembled in memory.

Position starts unknown; it becomes known through homing, absolute moves,
or G92 relabels.  Segments with an unknown endpoint are still counted but
carry no geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from sealprint.gcode import GcodeProgram, Home, Move, SetPosition

__all__ = ["MotionSegment", "ReplayResult", "replay", "first_layer_extrusions"]


@dataclass(frozen=True)
class MotionSegment:
    """One executed move with resolved endpoints.

    ``start``/``end`` are (x, y, z) or None when the position was unknown.
    ``e_start``/``e_end`` track the logical extruder axis across the move.
    """

    command_index: int
    start: tuple[float, float, float] | None
    end: tuple[float, float, float] | None
    extrudes: bool
    e_start: float
    e_end: float
    feed: float | None
    rapid: bool

    def xy_length(self) -> float:
        if self.start is None or self.end is None:
            return 0.0
        dx = self.end[0] - self.start[0]
        dy = self.end[1] - self.start[1]
        return math.sqrt(dx * dx + dy * dy)


@dataclass(frozen=True)
class ReplayResult:
    segments: tuple[MotionSegment, ...]
    end_position: tuple[float | None, float | None, float | None]
    end_e: float


def replay(program_or_commands) -> ReplayResult:
    """Execute every move in order and return the resolved segments."""
    if isinstance(program_or_commands, GcodeProgram):
        commands = program_or_commands.commands
    else:
        commands = tuple(program_or_commands)

    x: float | None = None
    y: float | None = None
    z: float | None = None
    e = 0.0
    feed: float | None = None
    segments: list[MotionSegment] = []

    for index, cmd in enumerate(commands):
        if isinstance(cmd, Home):
            x, y, z = 0.0, 0.0, 0.0
            continue
        if isinstance(cmd, SetPosition):
            if cmd.x is not None:
                x = cmd.x
            if cmd.y is not None:
                y = cmd.y
            if cmd.z is not None:
                z = cmd.z
            if cmd.e is not None:
                e = cmd.e
            continue
        if not isinstance(cmd, Move):
            continue

        if cmd.f is not None:
            feed = cmd.f

        if cmd.absolute_xy:
            nx = cmd.x if cmd.x is not None else x
            ny = cmd.y if cmd.y is not None else y
            nz = cmd.z if cmd.z is not None else z
        else:
            nx = None if (x is None and cmd.x is not None) else (
                x if cmd.x is None else x + cmd.x
            )
            ny = None if (y is None and cmd.y is not None) else (
                y if cmd.y is None else y + cmd.y
            )
            nz = None if (z is None and cmd.z is not None) else (
                z if cmd.z is None else z + cmd.z
            )

        e_start = e
        if cmd.e is not None:
            e = e + cmd.e if cmd.relative_e else cmd.e
        delta_e = e - e_start
        moves_xy = (cmd.x is not None) or (cmd.y is not None)
        extrudes = delta_e > 1e-9 and moves_xy

        start = None if (x is None or y is None or z is None) else (x, y, z)
        end = None if (nx is None or ny is None or nz is None) else (nx, ny, nz)
        segments.append(
            MotionSegment(
                command_index=index,
                start=start,
                end=end,
                extrudes=extrudes,
                e_start=e_start,
                e_end=e,
                feed=feed,
                rapid=cmd.rapid,
            )
        )
        x, y, z = nx, ny, nz

    return ReplayResult(tuple(segments), (x, y, z), e)


def first_layer_extrusions(
    program: GcodeProgram,
) -> list[tuple[tuple[float, float], tuple[float, float]]]:
    """XY endpoints of every extruding move in the first printed layer.

    The first layer spans from the first layer marker to the next one (or
    the end of the program).  Programs without layer markers yield an empty
    list -- callers treat that as "cannot locate the first layer".
    """
    marks = program.layer_marks
    if not marks:
        return []
    start = marks[0].index
    stop = marks[1].index if len(marks) > 1 else len(program.commands)
    result = replay(program)
    out: list[tuple[tuple[float, float], tuple[float, float]]] = []
    for seg in result.segments:
        if not (start <= seg.command_index < stop):
            continue
        if not seg.extrudes or seg.start is None or seg.end is None:
            continue
        out.append(
            ((seg.start[0], seg.start[1]), (seg.end[0], seg.end[1]))
        )
    return out
