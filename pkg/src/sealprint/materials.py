"""Material stacks, filament/substrate compatibility, and process profiles.

A *stack* is what sits under the nozzle during heat sealing: a bottom layer
and a top layer of sheet material, plus a protective film between nozzle and
top layer so the hot brass never touches the thermoplastic directly.  The
top layer determines both the nozzle and bed temperature.

Profiles bundle printer limits and process parameters and are stored as
YAML; :func:`load_profile` / :func:`save_profile` round-trip losslessly.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field

import yaml

__all__ = [
    "SheetMaterial", "MaterialStack", "Filament", "AdhesionEntry",
    "CompatibilityError", "ProfileError", "Profile", "PrinterSettings",
    "SealingSettings", "Morph4dSettings", "BUILTIN_SHEETS", "builtin_stacks",
    "check_compatibility", "adhesion_matrix",
    "SHEET_KINDS", "FILAMENT_KINDS", "PRINTABLE_FILAMENTS", "SUBSTRATE_KINDS",
    "default_profile", "load_profile", "save_profile",
]


# Sheet kinds the sealing process is tuned for: plain TPU film, nylon fabric
# laminated with a TPU coating, and the PTFE film that shields the nozzle.
SHEET_KINDS = ("tpu_film", "tpu_coated_fabric", "ptfe_protector")


@dataclass(frozen=True)
class SheetMaterial:
    """A sheet layer: thickness in mm, thermal conductivity in W/(m*K).

    ``kind`` names which of the three supported sheet families the material
    belongs to; ``name`` is free-form so a profile can define e.g. several
    film thicknesses.  Conductivity is documentation only.
    """

    name: str
    kind: str
    thickness: float
    thermal_conductivity: float

    def __post_init__(self):
        if self.kind not in SHEET_KINDS:
            raise ValueError(
                f"sheet {self.name!r}: unknown kind {self.kind!r};"
                f" expected one of {', '.join(SHEET_KINDS)}"
            )
        if self.thickness <= 0:
            raise ValueError(f"sheet {self.name!r}: thickness must be positive")
        if self.thermal_conductivity < 0:
            raise ValueError(f"sheet {self.name!r}: conductivity must be >= 0")


BUILTIN_SHEETS: dict[str, SheetMaterial] = {
    "tpu_film": SheetMaterial("tpu_film", "tpu_film", 0.2, 0.2),
    "tpu_coated_fabric": SheetMaterial(
        "tpu_coated_fabric", "tpu_coated_fabric", 0.23, 0.25
    ),
    "ptfe_protector": SheetMaterial("ptfe_protector", "ptfe_protector", 0.1, 0.23),
}


@dataclass(frozen=True)
class MaterialStack:
    """Layers under the nozzle plus the temperatures and speed to seal them.

    ``seal_z`` is the nozzle height while sealing; unless overridden it is
    the summed thickness of every layer in the stack, so the nozzle just
    presses the layers together.
    """

    name: str
    top: SheetMaterial
    bottom: SheetMaterial
    nozzle_temp: float
    bed_temp: float
    protector: SheetMaterial | None = None
    seal_speed: float = 5.0  # mm/s
    seal_z_override: float | None = None

    def __post_init__(self):
        if not (180 <= self.nozzle_temp <= 300):
            raise ValueError(
                f"stack {self.name!r}: nozzle_temp must be in [180, 300] C,"
                f" got {self.nozzle_temp}"
            )
        if not (0 <= self.bed_temp <= 110):
            raise ValueError(
                f"stack {self.name!r}: bed_temp must be in [0, 110] C,"
                f" got {self.bed_temp}"
            )
        if self.seal_speed <= 0:
            raise ValueError(f"stack {self.name!r}: seal_speed must be positive")
        if self.seal_z_override is not None and self.seal_z_override <= 0:
            raise ValueError(f"stack {self.name!r}: seal_z must be positive")

    @property
    def seal_z(self) -> float:
        if self.seal_z_override is not None:
            return self.seal_z_override
        total = self.top.thickness + self.bottom.thickness
        if self.protector is not None:
            total += self.protector.thickness
        return total


def builtin_stacks() -> list[MaterialStack]:
    """The three supported layer combinations.

    Temperatures follow the top layer: plain TPU film seals at 250 C nozzle
    / 50 C bed, TPU-coated fabric needs 280 C / 70 C because the fabric
    conducts heat away faster.  Sealing speed is 5 mm/s for all of them.
    """
    film = BUILTIN_SHEETS["tpu_film"]
    fabric = BUILTIN_SHEETS["tpu_coated_fabric"]
    ptfe = BUILTIN_SHEETS["ptfe_protector"]
    return [
        MaterialStack(
            "tpu_film_on_tpu_film",
            top=film, bottom=film, protector=ptfe,
            nozzle_temp=250.0, bed_temp=50.0,
        ),
        MaterialStack(
            "tpu_coated_fabric_on_tpu_coated_fabric",
            top=fabric, bottom=fabric, protector=ptfe,
            nozzle_temp=280.0, bed_temp=70.0,
        ),
        MaterialStack(
            "tpu_film_on_tpu_coated_fabric",
            top=film, bottom=fabric, protector=ptfe,
            nozzle_temp=250.0, bed_temp=50.0,
        ),
    ]


class CompatibilityError(ValueError):
    """Raised for unknown names or non-bonding materials in a query."""


# Filament kinds a job may reference; pva_support exists only to be rejected
# with an explanation when someone asks whether it bonds.
FILAMENT_KINDS = ("pla", "tpu", "conductive_tpu", "pva_support")
# The structural filaments that appear in the adhesion matrix.
PRINTABLE_FILAMENTS = ("pla", "tpu", "conductive_tpu")
# Substrates a part can be printed onto.  Coated fabric appears twice because
# lamination quality dominates adhesion: a hand-ironed TPU coating peels far
# more easily than a machine-laminated one.
SUBSTRATE_KINDS = (
    "tpu_film", "tpu_coated_fabric_hand", "tpu_coated_fabric_machine"
)


@dataclass(frozen=True)
class Filament:
    """A printable (or support) filament spool."""

    name: str
    kind: str

    def __post_init__(self):
        if self.kind not in FILAMENT_KINDS:
            raise ValueError(
                f"filament {self.name!r}: unknown kind {self.kind!r};"
                f" expected one of {', '.join(FILAMENT_KINDS)}"
            )


@dataclass(frozen=True)
class AdhesionEntry:
    """One cell of the filament-on-substrate adhesion matrix.

    ``tensile_class`` ranks pull-off strength (strong / medium / weak).
    ``shear_note`` describes the observed failure mode under shear load.
    ``recommendation`` is mitigation advice; always non-empty for weak
    entries, empty when nothing needs doing.
    """

    filament: str
    substrate: str
    tensile_class: str  # "strong" | "medium" | "weak"
    shear_note: str
    recommendation: str = ""

    @property
    def recommended(self) -> bool:
        return self.tensile_class in ("strong", "medium")


_INTERLAYER_ADVICE = (
    "print a thin TPU interlayer first and print the part on top of it;"
    " PLA grips TPU far better than it grips the sheet directly"
)
_MACHINE_LAMINATION_ADVICE = (
    "hand-laminated coating limits adhesion; machine-laminated double-sided"
    " fabric bonds several times stronger"
)

_SHEAR_FILM_TEARS = (
    "under shear the film tears before the printed part detaches; the weld"
    " outlasts the sheet"
)
_SHEAR_COATING_PEELS = (
    "under shear the hand-laminated coating peels from the nylon before the"
    " printed part detaches"
)
_SHEAR_MACHINE_HOLDS = (
    "machine lamination anchors the coating to the nylon, so shear no longer"
    " fails by peeling the coating off"
)

_ADHESION: dict[tuple[str, str], AdhesionEntry] = {
    (f, s): AdhesionEntry(f, s, cls, shear, rec)
    for (f, s, cls, shear, rec) in [
        ("tpu", "tpu_film", "strong", _SHEAR_FILM_TEARS, ""),
        ("conductive_tpu", "tpu_film", "strong", _SHEAR_FILM_TEARS, ""),
        ("pla", "tpu_film", "weak", _SHEAR_FILM_TEARS, _INTERLAYER_ADVICE),
        ("tpu", "tpu_coated_fabric_hand", "medium",
         _SHEAR_COATING_PEELS, _MACHINE_LAMINATION_ADVICE),
        ("conductive_tpu", "tpu_coated_fabric_hand", "medium",
         _SHEAR_COATING_PEELS, _MACHINE_LAMINATION_ADVICE),
        ("pla", "tpu_coated_fabric_hand", "weak", _SHEAR_COATING_PEELS,
         _INTERLAYER_ADVICE + "; " + _MACHINE_LAMINATION_ADVICE),
        ("tpu", "tpu_coated_fabric_machine", "strong", _SHEAR_MACHINE_HOLDS, ""),
        ("conductive_tpu", "tpu_coated_fabric_machine", "strong",
         _SHEAR_MACHINE_HOLDS, ""),
        ("pla", "tpu_coated_fabric_machine", "medium", _SHEAR_MACHINE_HOLDS,
         _INTERLAYER_ADVICE),
    ]
}


def adhesion_matrix() -> tuple[AdhesionEntry, ...]:
    """All nine (filament, substrate) adhesion entries."""
    return tuple(
        _ADHESION[(f, s)] for f in PRINTABLE_FILAMENTS for s in SUBSTRATE_KINDS
    )


def check_compatibility(filament: Filament | str, substrate: str) -> AdhesionEntry:
    """Rate how well a printed filament bonds onto a substrate.

    TPU-family filaments fuse with TPU surfaces; PLA barely grips them and
    needs a TPU interlayer.  Support filament is rejected outright: it is
    dissolvable, so nothing printed on it stays attached once it washes away.
    Accepts a :class:`Filament` or a bare kind string.
    """
    kind = filament.kind if isinstance(filament, Filament) else filament
    if kind == "pva_support":
        raise CompatibilityError(
            "pva_support is a dissolvable support material: it cannot form a"
            " lasting bond because it washes away in water; use it only for"
            " support structures"
        )
    if kind not in PRINTABLE_FILAMENTS:
        raise CompatibilityError(
            f"unknown filament {kind!r};"
            f" expected one of {', '.join(PRINTABLE_FILAMENTS)}"
        )
    if substrate not in SUBSTRATE_KINDS:
        raise CompatibilityError(
            f"unknown substrate {substrate!r};"
            f" expected one of {', '.join(SUBSTRATE_KINDS)}"
        )
    return _ADHESION[(kind, substrate)]


class ProfileError(ValueError):
    """Raised when a profile document is malformed or out of range."""


@dataclass(frozen=True)
class PrinterSettings:
    build_plate_width: float = 220.0
    build_plate_depth: float = 220.0
    pause_macro: str = "M400 U1"
    supports_tones: bool = True
    alert_tones: tuple[tuple[float, float], ...] = (
        (440.0, 200.0), (554.0, 200.0), (659.0, 200.0),
    )
    bed_ceiling: float = 30.0

    def __post_init__(self):
        if self.build_plate_width <= 0 or self.build_plate_depth <= 0:
            raise ProfileError("printer.build_plate: dimensions must be positive")
        if not self.pause_macro.strip():
            raise ProfileError("printer.pause_macro: must not be empty")
        for i, (freq, ms) in enumerate(self.alert_tones):
            if freq <= 0 or ms <= 0:
                raise ProfileError(
                    f"printer.alert_tones[{i}]: frequency and duration must be positive"
                )
        if self.bed_ceiling <= 0:
            raise ProfileError("printer.bed_ceiling: must be positive")

    @property
    def effective_tones(self) -> tuple[tuple[float, float], ...]:
        """The tones merge will actually emit (none if the firmware lacks M300)."""
        return self.alert_tones if self.supports_tones else ()


# Sealed outlines must be sampled at least this finely for a continuous weld.
MAX_SAMPLE_INTERVAL = 0.5  # mm


@dataclass(frozen=True)
class SealingSettings:
    sample_interval: float = 0.5
    travel_speed: float = 50.0  # mm/s between curves
    lift_height_offset: float = 2.0  # mm above seal height while traveling

    def __post_init__(self):
        if not (0 < self.sample_interval <= MAX_SAMPLE_INTERVAL):
            raise ProfileError(
                "sealing.sample_interval: must be in (0, "
                f"{MAX_SAMPLE_INTERVAL}] mm, got {self.sample_interval}"
            )
        if self.travel_speed <= 0:
            raise ProfileError("sealing.travel_speed: must be positive")
        if self.lift_height_offset <= 0:
            raise ProfileError("sealing.lift_height_offset: must be positive")


@dataclass(frozen=True)
class Morph4dSettings:
    # Bending feet spans above this need dissolvable support when printing.
    support_span_threshold: float = 8.0
    # Feet narrower than this need a thin TPU interlayer to stay attached.
    interlayer_foot_threshold: float = 2.0

    def __post_init__(self):
        if self.support_span_threshold <= 0:
            raise ProfileError("morph4d.support_span_threshold: must be positive")
        if self.interlayer_foot_threshold <= 0:
            raise ProfileError("morph4d.interlayer_foot_threshold: must be positive")


@dataclass(frozen=True)
class Profile:
    printer: PrinterSettings = field(default_factory=PrinterSettings)
    sealing: SealingSettings = field(default_factory=SealingSettings)
    morph4d: Morph4dSettings = field(default_factory=Morph4dSettings)
    sheets: dict[str, SheetMaterial] = field(default_factory=dict)
    stacks: dict[str, MaterialStack] = field(default_factory=dict)

    def stack(self, name: str) -> MaterialStack:
        try:
            return self.stacks[name]
        except KeyError:
            known = ", ".join(sorted(self.stacks)) or "(none)"
            raise ProfileError(
                f"unknown material stack {name!r}; profile defines: {known}"
            ) from None


def default_profile() -> Profile:
    """The shipped defaults: built-in sheets, the three stacks, 30 C ceiling."""
    return Profile(
        sheets=dict(BUILTIN_SHEETS),
        stacks={s.name: s for s in builtin_stacks()},
    )


def _require(mapping, key, path, types):
    if key not in mapping:
        raise ProfileError(f"{path}.{key}: missing")
    value = mapping[key]
    if not isinstance(value, types) or isinstance(value, bool):
        raise ProfileError(f"{path}.{key}: wrong type {type(value).__name__}")
    return value


def _num(mapping, key, path, default=None):
    if key not in mapping:
        if default is not None:
            return default
        raise ProfileError(f"{path}.{key}: missing")
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProfileError(f"{path}.{key}: expected a number")
    return float(value)


def profile_from_dict(doc: dict) -> Profile:
    if not isinstance(doc, dict):
        raise ProfileError("profile document must be a mapping")
    unknown = set(doc) - {"printer", "sealing", "morph4d", "sheets", "stacks"}
    if unknown:
        raise ProfileError(f"unknown profile section(s): {', '.join(sorted(unknown))}")

    printer_doc = doc.get("printer", {})
    plate = printer_doc.get("build_plate", {})
    tones_doc = printer_doc.get(
        "alert_tones", [[440, 200], [554, 200], [659, 200]]
    )
    if not isinstance(tones_doc, list):
        raise ProfileError("printer.alert_tones: expected a list of [hz, ms] pairs")
    tones = []
    for i, pair in enumerate(tones_doc):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ProfileError(f"printer.alert_tones[{i}]: expected [hz, ms]")
        tones.append((float(pair[0]), float(pair[1])))
    supports_tones = printer_doc.get("supports_tones", True)
    if not isinstance(supports_tones, bool):
        raise ProfileError("printer.supports_tones: expected true/false")
    printer = PrinterSettings(
        build_plate_width=_num(plate, "width", "printer.build_plate", 220.0),
        build_plate_depth=_num(plate, "depth", "printer.build_plate", 220.0),
        pause_macro=str(printer_doc.get("pause_macro", "M400 U1")),
        supports_tones=supports_tones,
        alert_tones=tuple(tones),
        bed_ceiling=_num(printer_doc, "bed_ceiling", "printer", 30.0),
    )

    sealing_doc = doc.get("sealing", {})
    sealing = SealingSettings(
        sample_interval=_num(sealing_doc, "sample_interval", "sealing", 0.5),
        travel_speed=_num(sealing_doc, "travel_speed", "sealing", 50.0),
        lift_height_offset=_num(sealing_doc, "lift_height_offset", "sealing", 2.0),
    )

    morph_doc = doc.get("morph4d", {})
    morph = Morph4dSettings(
        support_span_threshold=_num(morph_doc, "support_span_threshold", "morph4d", 8.0),
        interlayer_foot_threshold=_num(
            morph_doc, "interlayer_foot_threshold", "morph4d", 2.0
        ),
    )

    sheets: dict[str, SheetMaterial] = {}
    for name, sdoc in (doc.get("sheets") or {}).items():
        if not isinstance(sdoc, dict):
            raise ProfileError(f"sheets.{name}: expected a mapping")
        kind = sdoc.get("kind", name if name in SHEET_KINDS else None)
        if kind is None:
            raise ProfileError(
                f"sheets.{name}.kind: missing (one of {', '.join(SHEET_KINDS)})"
            )
        try:
            sheets[name] = SheetMaterial(
                name,
                str(kind),
                _num(sdoc, "thickness", f"sheets.{name}"),
                _num(sdoc, "thermal_conductivity", f"sheets.{name}"),
            )
        except ValueError as exc:
            raise ProfileError(str(exc)) from exc

    def sheet_ref(name, path):
        if name is None:
            return None
        if name not in sheets:
            raise ProfileError(f"{path}: references unknown sheet {name!r}")
        return sheets[name]

    stacks: dict[str, MaterialStack] = {}
    for name, kdoc in (doc.get("stacks") or {}).items():
        if not isinstance(kdoc, dict):
            raise ProfileError(f"stacks.{name}: expected a mapping")
        path = f"stacks.{name}"
        top = _require(kdoc, "top", path, str)
        bottom = _require(kdoc, "bottom", path, str)
        seal_z = kdoc.get("seal_z")
        try:
            stacks[name] = MaterialStack(
                name,
                top=sheet_ref(top, f"{path}.top"),
                bottom=sheet_ref(bottom, f"{path}.bottom"),
                protector=sheet_ref(kdoc.get("protector"), f"{path}.protector"),
                nozzle_temp=_num(kdoc, "nozzle_temp", path),
                bed_temp=_num(kdoc, "bed_temp", path),
                seal_speed=_num(kdoc, "seal_speed", path, 5.0),
                seal_z_override=None if seal_z is None else float(seal_z),
            )
        except ValueError as exc:
            raise ProfileError(str(exc)) from exc

    return Profile(printer, sealing, morph, sheets, stacks)


def profile_to_dict(profile: Profile) -> dict:
    doc: dict = {
        "printer": {
            "build_plate": {
                "width": profile.printer.build_plate_width,
                "depth": profile.printer.build_plate_depth,
            },
            "pause_macro": profile.printer.pause_macro,
            "supports_tones": profile.printer.supports_tones,
            "alert_tones": [list(pair) for pair in profile.printer.alert_tones],
            "bed_ceiling": profile.printer.bed_ceiling,
        },
        "sealing": {
            "sample_interval": profile.sealing.sample_interval,
            "travel_speed": profile.sealing.travel_speed,
            "lift_height_offset": profile.sealing.lift_height_offset,
        },
        "morph4d": {
            "support_span_threshold": profile.morph4d.support_span_threshold,
            "interlayer_foot_threshold": profile.morph4d.interlayer_foot_threshold,
        },
        "sheets": {
            name: {
                "kind": sheet.kind,
                "thickness": sheet.thickness,
                "thermal_conductivity": sheet.thermal_conductivity,
            }
            for name, sheet in profile.sheets.items()
        },
        "stacks": {},
    }
    for name, stack in profile.stacks.items():
        entry = {
            "top": stack.top.name,
            "bottom": stack.bottom.name,
            "nozzle_temp": stack.nozzle_temp,
            "bed_temp": stack.bed_temp,
            "seal_speed": stack.seal_speed,
        }
        if stack.protector is not None:
            entry["protector"] = stack.protector.name
        if stack.seal_z_override is not None:
            entry["seal_z"] = stack.seal_z_override
        doc["stacks"][name] = entry
    return doc


def load_profile(path: str) -> Profile:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ProfileError(f"{path}: invalid YAML: {exc}") from exc
    if doc is None:
        raise ProfileError(f"{path}: profile file is empty")
    return profile_from_dict(doc)


def save_profile(profile: Profile, path: str) -> None:
    text = yaml.safe_dump(profile_to_dict(profile), sort_keys=False)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def packaged_default_profile_text() -> str:
    """The YAML text of the shipped default profile."""
    return (
        importlib.resources.files("sealprint")
        .joinpath("data/default_profile.yaml")
        .read_text(encoding="utf-8")
    )
