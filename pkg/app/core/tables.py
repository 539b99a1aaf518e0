"""Invariant tables and their JSON / CSV / text renderings.

JSON layout (schema 1):

    {"schema": 1,
     "meta": {"surface", "real_structure", "L", "F",
              "flags": {"chain_of_spheres", "F_nontrivial"},
              "convention", ...},
     "entries": [{"class": [ints], "s": int, "value": "decimal string"}]}
"""
import io
import json
import re
from dataclasses import dataclass, field

import pandas as pd

from app.core.errors import InputError, SchemaError, UnsupportedSurfaceError
from app.core.lattice import (
    SURFACES,
    DivisorClass,
    SurfaceModel,
    constraint_split,
    get_surface,
)

SCHEMA_VERSION = 1
# bumped whenever a multiplicity convention changes
CONVENTION_VERSION = 1

CONVENTIONS = {
    "f-mass": "sign (-1)^(m + C.F)",
    "shifted-f-mass": "sign (-1)^(m + C.(F + [RX minus L]))",
}
F_STANDARD = "standard"

_DECIMAL = re.compile(r"-?[0-9]+")


@dataclass(frozen=True)
class TableFlags:
    chain_of_spheres: bool = None
    F_nontrivial: bool = None

    @property
    def hypotheses_hold(self):
        return self.chain_of_spheres is True and self.F_nontrivial is True


@dataclass(frozen=True)
class TableMeta:
    surface: str
    real_structure: str = "standard"
    L: str = "RX"
    F: str = F_STANDARD
    flags: TableFlags = field(default_factory=TableFlags)
    convention: str = "f-mass"
    kind: str = "welschinger"
    source: str = None
    surface_model: dict = None

    @property
    def model(self):
        """The declared surface_model when present, else the built-in surface."""
        if self.surface_model is None:
            return get_surface(self.surface)
        return _declared_model(self.surface, self.surface_model)


@dataclass(frozen=True)
class TableEntry:
    cls: DivisorClass
    s: int
    value: int

    @property
    def key(self):
        return (self.cls.coords, self.s)

    @property
    def label(self):
        return f"{self.cls.surface_id}{list(self.cls.coords)} s={self.s}"


@dataclass(frozen=True)
class InvariantTable:
    meta: TableMeta
    entries: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        model = self.meta.model
        seen = set()
        for entry in self.entries:
            if entry.cls.surface_id != self.meta.surface:
                raise SchemaError(f"Entry {entry.label} is not on surface {self.meta.surface}")
            if len(entry.cls.coords) != model.rank:
                raise SchemaError(f"Entry {entry.label} does not have {model.rank} coordinates")
            if entry.key in seen:
                raise SchemaError(f"Duplicate (class, s) key {entry.label}")
            seen.add(entry.key)
            constraint_split(entry.cls, entry.s, model)


# JSON
def table_to_dict(table):
    meta = table.meta
    out_meta = {
        "surface": meta.surface,
        "real_structure": meta.real_structure,
        "L": meta.L,
        "F": meta.F,
        "flags": {
            "chain_of_spheres": meta.flags.chain_of_spheres,
            "F_nontrivial": meta.flags.F_nontrivial,
        },
        "convention": meta.convention,
        "kind": meta.kind,
    }
    for optional in ("source", "surface_model"):
        if getattr(meta, optional) is not None:
            out_meta[optional] = getattr(meta, optional)
    return {
        "schema": SCHEMA_VERSION,
        "meta": out_meta,
        "entries": [
            {"class": list(e.cls.coords), "s": e.s, "value": str(e.value)}
            for e in table.entries
        ],
    }


def dumps_table(table):
    return json.dumps(table_to_dict(table), indent=2, sort_keys=True) + "\n"


def _require(mapping, key, where):
    if key not in mapping:
        raise SchemaError(f"Missing {where}.{key}")
    return mapping[key]


def _flag(value, name):
    if value is None or isinstance(value, bool):
        return value
    if value in (0, 1):
        return bool(value)
    raise SchemaError(f"Flag {name} must be a boolean, 0/1 or null, got {value!r}")


def _declared_model(name, declared):
    """SurfaceModel for a table-local surface; never added to the built-in registry."""
    if any(name.lower() == builtin.lower() for builtin in SURFACES):
        raise SchemaError(f"surface_model may not redefine the built-in surface {name!r}")
    if not isinstance(declared, dict):
        raise SchemaError(f"surface_model for {name} must be an object")
    try:
        return SurfaceModel(
            name=name,
            rank=int(_require(declared, "rank", "surface_model")),
            intersection_matrix=_require(declared, "intersection_matrix", "surface_model"),
            c1_row=_require(declared, "c1_row", "surface_model"),
        )
    except (TypeError, ValueError, InputError) as e:
        raise SchemaError(f"Invalid surface_model for {name}: {e}") from e


def table_from_dict(data, require_provenance=False):
    if not isinstance(data, dict):
        raise SchemaError("Table must be a JSON object")
    if data.get("schema") != SCHEMA_VERSION:
        raise SchemaError(f"Unsupported schema {data.get('schema')!r}, expected {SCHEMA_VERSION}")
    raw_meta = _require(data, "meta", "table")
    surface = str(_require(raw_meta, "surface", "meta"))
    declared = raw_meta.get("surface_model")
    if declared is None:
        try:
            surface = get_surface(surface).name
        except UnsupportedSurfaceError as e:
            raise SchemaError(f"Unknown surface {surface!r} and no surface_model given") from e
    else:
        _declared_model(surface, declared)

    convention = raw_meta.get("convention")
    if require_provenance:
        if not raw_meta.get("source"):
            raise SchemaError("meta.source is required: say where the values come from")
        if not convention:
            raise SchemaError(
                "meta.convention is required: published sign conventions differ by "
                "C.[RX minus L]; declare one of " + ", ".join(sorted(CONVENTIONS))
            )
    if convention is not None and convention not in CONVENTIONS:
        raise SchemaError(f"Unknown convention {convention!r}; known: {', '.join(sorted(CONVENTIONS))}")

    raw_flags = raw_meta.get("flags") or {}
    meta = TableMeta(
        surface=surface,
        real_structure=str(raw_meta.get("real_structure", "standard")),
        L=str(raw_meta.get("L", "RX")),
        F=str(raw_meta.get("F", F_STANDARD)),
        flags=TableFlags(
            chain_of_spheres=_flag(raw_flags.get("chain_of_spheres"), "chain_of_spheres"),
            F_nontrivial=_flag(raw_flags.get("F_nontrivial"), "F_nontrivial"),
        ),
        convention=convention,
        kind=str(raw_meta.get("kind", "welschinger")),
        source=raw_meta.get("source"),
        surface_model=declared,
    )

    entries = []
    for i, raw in enumerate(_require(data, "entries", "table")):
        value = _require(raw, "value", f"entries[{i}]")
        if not isinstance(value, str) or not _DECIMAL.fullmatch(value):
            raise SchemaError(f"entries[{i}].value must be a decimal string, got {value!r}")
        s = _require(raw, "s", f"entries[{i}]")
        if not isinstance(s, int) or s < 0:
            raise SchemaError(f"entries[{i}].s must be a nonnegative integer")
        coords = _require(raw, "class", f"entries[{i}]")
        if not isinstance(coords, list) or not all(isinstance(c, int) for c in coords):
            raise SchemaError(f"entries[{i}].class must be a list of integers")
        entries.append(TableEntry(DivisorClass(surface, coords), s, int(value)))
    return InvariantTable(meta, tuple(entries))


def loads_table(text, require_provenance=False):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"Not valid JSON: {e}") from e
    return table_from_dict(data, require_provenance)


def load_table(path, require_provenance=False):
    with open(path, "r") as f:
        return loads_table(f.read(), require_provenance)


# CSV / text
def table_frame(table):
    return pd.DataFrame(
        [
            {
                "surface": table.meta.surface,
                "class": ",".join(str(c) for c in e.cls.coords),
                "s": e.s,
                "kind": table.meta.kind,
                "value": str(e.value),
            }
            for e in table.entries
        ],
        columns=["surface", "class", "s", "kind", "value"],
    )


def frame_to_csv(frame):
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def table_to_text(table):
    meta = table.meta
    lines = [f"{meta.kind} on {meta.surface} ({meta.real_structure}, L={meta.L}, F={meta.F})"]
    lines += [f"  {list(e.cls.coords)} s={e.s}: {e.value}" for e in table.entries]
    return "\n".join(lines) + "\n"
