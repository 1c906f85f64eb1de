"""G-code reading, writing, and whole-program rewrites (Marlin dialect).

The parser is total: every input line becomes exactly one command, and any
line that does not fit the structured dialect is kept verbatim as a
:class:`Passthrough`.  Emission normalizes formatting (LF newlines, fixed
coordinate precision), so ``emit(parse(text))`` reaches a fixed point after
one pass: re-parsing and re-emitting the output reproduces it byte for byte.

Structured commands cover the motion and thermal subset this tool needs to
reason about: G0/G1 moves, bare G28, G90/G91/M82/M83 mode switches, G92
position resets, M104/M109/M140/M190 temperatures, M106/M107 fan, M300 tones.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field

from sealprint.kernels import scan_line

__all__ = [
    "Command", "Move", "Home", "SetPosition", "ModeSwitch", "NozzleTemp",
    "BedTemp", "Fan", "Tone", "PauseMacro", "Comment", "Passthrough",
    "PhaseSpan", "LayerMark", "GcodeProgram", "TranslateResult",
    "parse", "emit", "rewrite_bed_temps", "translate_xy",
]

_LAYER_NUMBER_RE = re.compile(r"LAYER:(-?\d+)\Z")
_MOTION_PASSTHROUGH_RE = re.compile(r"\s*[Gg][0-3]\b")
_LINEAR_MOVE_RE = re.compile(r"\s*[Gg]0*[01]\b")


def format_coord(v: float) -> str:
    """Format an X/Y/Z coordinate at fixed 3-decimal precision."""
    return "%.3f" % v


def format_extrusion(v: float) -> str:
    return "%.5f" % v


def format_scalar(v: float) -> str:
    """Format feeds, temperatures, fan duties, tone parameters.

    Integral values print bare ("F300", "S250"); others keep up to three
    decimals with trailing zeros trimmed.
    """
    text = "%.3f" % v
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    if text in ("-0", ""):
        text = "0"
    return text


@dataclass(frozen=True)
class Command:
    """Base for all program commands."""

    comment: str | None = field(default=None, kw_only=True)
    line: int | None = field(default=None, kw_only=True)

    def _tail(self) -> str:
        return "" if self.comment is None else " ;" + self.comment

    def to_line(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Move(Command):
    """A G0 (rapid) or G1 (feed) linear move.

    ``absolute_xy`` and ``relative_e`` record the modal state in force when
    the move was parsed; they are informational and not re-emitted.
    """

    rapid: bool = False
    x: float | None = None
    y: float | None = None
    z: float | None = None
    e: float | None = None
    f: float | None = None
    absolute_xy: bool = field(default=True, kw_only=True)
    relative_e: bool = field(default=False, kw_only=True)

    def to_line(self) -> str:
        parts = ["G0" if self.rapid else "G1"]
        if self.x is not None:
            parts.append("X" + format_coord(self.x))
        if self.y is not None:
            parts.append("Y" + format_coord(self.y))
        if self.z is not None:
            parts.append("Z" + format_coord(self.z))
        if self.e is not None:
            parts.append("E" + format_extrusion(self.e))
        if self.f is not None:
            parts.append("F" + format_scalar(self.f))
        return " ".join(parts) + self._tail()


@dataclass(frozen=True)
class Home(Command):
    """A bare G28 homing all axes.  G28 with axis words stays verbatim."""

    def to_line(self) -> str:
        return "G28" + self._tail()


@dataclass(frozen=True)
class SetPosition(Command):
    """G92: relabel the current position without moving."""

    x: float | None = None
    y: float | None = None
    z: float | None = None
    e: float | None = None

    def to_line(self) -> str:
        parts = ["G92"]
        if self.x is not None:
            parts.append("X" + format_coord(self.x))
        if self.y is not None:
            parts.append("Y" + format_coord(self.y))
        if self.z is not None:
            parts.append("Z" + format_coord(self.z))
        if self.e is not None:
            parts.append("E" + format_extrusion(self.e))
        return " ".join(parts) + self._tail()


@dataclass(frozen=True)
class ModeSwitch(Command):
    """G90/G91 (absolute/relative motion) or M82/M83 (absolute/relative E)."""

    kind: str = "G90"

    def __post_init__(self):
        if self.kind not in ("G90", "G91", "M82", "M83"):
            raise ValueError(f"unknown mode switch {self.kind!r}")

    def to_line(self) -> str:
        return self.kind + self._tail()


@dataclass(frozen=True)
class NozzleTemp(Command):
    """M104 (set) or M109 (set and wait) hotend temperature."""

    celsius: float = 0.0
    wait: bool = False

    def to_line(self) -> str:
        code = "M109" if self.wait else "M104"
        return f"{code} S{format_scalar(self.celsius)}" + self._tail()


@dataclass(frozen=True)
class BedTemp(Command):
    """M140 (set) or M190 (set and wait) bed temperature."""

    celsius: float = 0.0
    wait: bool = False

    def to_line(self) -> str:
        code = "M190" if self.wait else "M140"
        return f"{code} S{format_scalar(self.celsius)}" + self._tail()


@dataclass(frozen=True)
class Fan(Command):
    """M106 Sn part-cooling fan, or M107 (off)."""

    duty: float = 255.0
    off: bool = False

    def to_line(self) -> str:
        if self.off:
            return "M107" + self._tail()
        return f"M106 S{format_scalar(self.duty)}" + self._tail()


@dataclass(frozen=True)
class Tone(Command):
    """M300 beep; frequency (S, Hz) and duration (P, ms) are optional."""

    frequency: float | None = None
    milliseconds: float | None = None

    def to_line(self) -> str:
        parts = ["M300"]
        if self.frequency is not None:
            parts.append("S" + format_scalar(self.frequency))
        if self.milliseconds is not None:
            parts.append("P" + format_scalar(self.milliseconds))
        return " ".join(parts) + self._tail()


@dataclass(frozen=True)
class PauseMacro(Command):
    """An operator-pause line injected by this tool (e.g. "M400 U1" or "M0").

    Never produced by the parser; used to tag the pause intent of a line
    that is otherwise emitted verbatim.
    """

    text: str = "M0"

    def to_line(self) -> str:
        return self.text + self._tail()


@dataclass(frozen=True)
class Comment(Command):
    """A whole-line comment; ``text`` is everything after the semicolon."""

    text: str = ""

    def to_line(self) -> str:
        return ";" + self.text


@dataclass(frozen=True)
class Passthrough(Command):
    """Any line outside the structured dialect, kept byte-for-byte."""

    text: str = ""

    def to_line(self) -> str:
        return self.text


@dataclass(frozen=True)
class PhaseSpan:
    """A named half-open range [start, stop) of command indices."""

    name: str
    start: int
    stop: int


@dataclass(frozen=True)
class LayerMark:
    """A layer-change marker comment: command index plus layer number."""

    index: int
    layer: int


def scan_layer_marks(commands) -> tuple[LayerMark, ...]:
    """Find layer markers: ";LAYER_CHANGE" (counted) or ";LAYER:<n>"."""
    marks: list[LayerMark] = []
    change_counter = 0
    for i, cmd in enumerate(commands):
        if not isinstance(cmd, Comment):
            continue
        text = cmd.text.strip()
        if text == "LAYER_CHANGE":
            marks.append(LayerMark(i, change_counter))
            change_counter += 1
            continue
        m = _LAYER_NUMBER_RE.fullmatch(text)
        if m:
            marks.append(LayerMark(i, int(m.group(1))))
    return tuple(marks)


@dataclass(frozen=True)
class GcodeProgram:
    """An ordered command list with phase annotations and parse diagnostics.

    ``layer_marks`` is always derived from ``commands`` at construction, so
    it stays consistent through any rewrite.
    """

    commands: tuple[Command, ...]
    phases: tuple[PhaseSpan, ...] = ()
    diagnostics: tuple[str, ...] = ()
    layer_marks: tuple[LayerMark, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "commands", tuple(self.commands))
        object.__setattr__(self, "phases", tuple(self.phases))
        object.__setattr__(self, "diagnostics", tuple(self.diagnostics))
        object.__setattr__(self, "layer_marks", scan_layer_marks(self.commands))

    def phase_span(self, name: str) -> PhaseSpan | None:
        for span in self.phases:
            if span.name == name:
                return span
        return None

    def phase_commands(self, name: str) -> tuple[Command, ...]:
        span = self.phase_span(name)
        if span is None:
            return ()
        return self.commands[span.start : span.stop]


def _classify(scanned, raw: str, lineno: int, state: dict, diagnostics: list[str]):
    """Map one scanned line to a structured command, or None to pass through."""
    letter, code, words, comment = scanned
    keys = [w[0] for w in words]
    keyset = set(keys)
    has_dup = len(keys) != len(keyset)

    def value(k):
        for wk, wv in words:
            if wk == k:
                return wv
        return None

    if letter == "G" and code in (0, 1):
        if has_dup or not keyset <= {"X", "Y", "Z", "E", "F"}:
            diagnostics.append(
                f"line {lineno}: G{code} outside the X/Y/Z/E/F form kept verbatim"
            )
            return None
        return Move(
            rapid=(code == 0),
            x=value("X"), y=value("Y"), z=value("Z"),
            e=value("E"), f=value("F"),
            absolute_xy=state["absolute_xy"],
            relative_e=state["relative_e"],
            comment=comment, line=lineno,
        )
    if letter == "G" and code == 28:
        if words:
            return None  # partial home: legal, but kept verbatim
        return Home(comment=comment, line=lineno)
    if letter == "G" and code in (90, 91):
        if words:
            return None
        kind = "G90" if code == 90 else "G91"
        state["absolute_xy"] = code == 90
        state["relative_e"] = code == 91
        return ModeSwitch(kind, comment=comment, line=lineno)
    if letter == "M" and code in (82, 83):
        if words:
            return None
        state["relative_e"] = code == 83
        return ModeSwitch("M82" if code == 82 else "M83", comment=comment, line=lineno)
    if letter == "G" and code == 92:
        if has_dup or not keyset or not keyset <= {"X", "Y", "Z", "E"}:
            return None
        return SetPosition(
            x=value("X"), y=value("Y"), z=value("Z"), e=value("E"),
            comment=comment, line=lineno,
        )
    if letter == "M" and code in (104, 109, 140, 190):
        if keys != ["S"]:
            diagnostics.append(
                f"line {lineno}: M{code} without a single S word kept verbatim;"
                " temperature rewrites will not touch it"
            )
            return None
        cls = NozzleTemp if code in (104, 109) else BedTemp
        return cls(
            celsius=value("S"), wait=code in (109, 190),
            comment=comment, line=lineno,
        )
    if letter == "M" and code == 106:
        if has_dup or not keyset <= {"S"}:
            return None
        duty = value("S")
        return Fan(duty=255.0 if duty is None else duty, comment=comment, line=lineno)
    if letter == "M" and code == 107:
        if words:
            return None
        return Fan(duty=0.0, off=True, comment=comment, line=lineno)
    if letter == "M" and code == 300:
        if has_dup or not keyset <= {"S", "P"}:
            return None
        return Tone(
            frequency=value("S"), milliseconds=value("P"),
            comment=comment, line=lineno,
        )
    return None


def parse(text: str) -> GcodeProgram:
    """Parse G-code text; total, one command per input line.

    CRLF line endings are accepted; any run of trailing carriage returns is
    treated as line-terminator bytes and dropped (emission is LF-only), so a
    single parse/emit pass is already a fixpoint.  Carriage returns in the
    middle of a line are content and survive verbatim.
    The whole program is annotated as a single "printing" phase; an empty
    input yields an empty program with no phases.
    """
    pieces = text.split("\n")
    if pieces and pieces[-1] == "":
        pieces.pop()
    commands: list[Command] = []
    diagnostics: list[str] = []
    state = {"absolute_xy": True, "relative_e": False}
    for idx, piece in enumerate(pieces):
        lineno = idx + 1
        piece = piece.rstrip("\r")
        stripped = piece.lstrip(" \t")
        if stripped.startswith(";"):
            commands.append(Comment(stripped[1:], line=lineno))
            continue
        scanned = scan_line(piece)
        cmd = None
        if scanned is not None:
            cmd = _classify(scanned, piece, lineno, state, diagnostics)
        elif _LINEAR_MOVE_RE.match(piece):
            # A G0/G1 that would not even tokenize (e.g. "X1.2.3") is
            # suspicious; arcs and unknown M-codes pass through silently.
            diagnostics.append(
                f"line {lineno}: G0/G1 with unreadable words kept verbatim"
            )
        if cmd is None:
            commands.append(Passthrough(piece, line=lineno))
        else:
            commands.append(cmd)
    phases = (PhaseSpan("printing", 0, len(commands)),) if commands else ()
    return GcodeProgram(tuple(commands), phases, tuple(diagnostics))


def emit(program: GcodeProgram) -> str:
    """Render a program as LF-terminated text (empty program -> "")."""
    if not program.commands:
        return ""
    return "\n".join(cmd.to_line() for cmd in program.commands) + "\n"


def rewrite_bed_temps(
    program: GcodeProgram, ceiling: float
) -> tuple[GcodeProgram, int]:
    """Clamp every bed-temperature command above ``ceiling`` down to it.

    Returns the rewritten program and the number of commands changed.
    Wait/no-wait form and comments are preserved.
    """
    changed = 0
    commands: list[Command] = []
    for cmd in program.commands:
        if isinstance(cmd, BedTemp) and cmd.celsius > ceiling:
            commands.append(dataclasses.replace(cmd, celsius=ceiling))
            changed += 1
        else:
            commands.append(cmd)
    return (
        GcodeProgram(tuple(commands), program.phases, program.diagnostics),
        changed,
    )


@dataclass(frozen=True)
class TranslateResult:
    program: GcodeProgram
    shifted_moves: int
    warnings: tuple[str, ...]


def translate_xy(program: GcodeProgram, dx: float, dy: float) -> TranslateResult:
    """Shift all absolute-mode XY geometry by (dx, dy).

    Absolute moves have X/Y offset; G92 X/Y relabels are offset the same way
    so that later absolute moves stay consistent.  Relative-mode moves are
    translation-invariant and left alone, but their presence is reported as
    a warning because correctness then rests on the program anchoring them
    to absolute positions.  Motion-like passthrough lines (e.g. arcs) cannot
    be shifted and are warned about as well.
    """
    commands: list[Command] = []
    shifted = 0
    relative_moves = 0
    opaque_motion: list[int] = []
    for cmd in program.commands:
        if isinstance(cmd, Move) and (cmd.x is not None or cmd.y is not None):
            if cmd.absolute_xy:
                commands.append(
                    dataclasses.replace(
                        cmd,
                        x=None if cmd.x is None else cmd.x + dx,
                        y=None if cmd.y is None else cmd.y + dy,
                    )
                )
                shifted += 1
            else:
                relative_moves += 1
                commands.append(cmd)
            continue
        if isinstance(cmd, SetPosition) and (cmd.x is not None or cmd.y is not None):
            commands.append(
                dataclasses.replace(
                    cmd,
                    x=None if cmd.x is None else cmd.x + dx,
                    y=None if cmd.y is None else cmd.y + dy,
                )
            )
            shifted += 1
            continue
        if isinstance(cmd, Passthrough) and _MOTION_PASSTHROUGH_RE.match(cmd.text):
            opaque_motion.append(cmd.line or 0)
            commands.append(cmd)
            continue
        commands.append(cmd)
    warnings: list[str] = []
    if relative_moves:
        warnings.append(
            f"{relative_moves} relative-mode XY move(s) left unshifted; they"
            " follow shifted absolute positions and stay consistent only if"
            " the program re-anchors with absolute moves after homing"
        )
    if opaque_motion:
        where = ", ".join(str(n) for n in opaque_motion[:5])
        more = "" if len(opaque_motion) <= 5 else f" (+{len(opaque_motion) - 5} more)"
        warnings.append(
            f"{len(opaque_motion)} motion-like line(s) outside the structured"
            f" dialect could not be shifted (lines {where}{more})"
        )
    return TranslateResult(
        GcodeProgram(tuple(commands), program.phases, program.diagnostics),
        shifted,
        tuple(warnings),
    )
