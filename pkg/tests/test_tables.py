import copy

import pytest

from app.core.errors import InputError, SchemaError
from app.core.lattice import SURFACES, constraint_split, get_surface
from app.core.tables import (
    dumps_table,
    frame_to_csv,
    loads_table,
    table_frame,
    table_from_dict,
    table_to_text,
)

TABLE = {
    "schema": 1,
    "meta": {
        "surface": "F0",
        "real_structure": "standard",
        "L": "RX",
        "F": "standard",
        "flags": {"chain_of_spheres": True, "F_nontrivial": True},
        "convention": "f-mass",
        "kind": "welschinger",
        "source": "hand computation",
    },
    "entries": [
        {"class": [2, 2], "s": 3, "value": "48"},
        {"class": [1, 1], "s": 0, "value": "1"},
    ],
}


def variant(**meta):
    data = copy.deepcopy(TABLE)
    data["meta"].update(meta)
    return data


def test_json_round_trip():
    table = table_from_dict(TABLE)
    text = dumps_table(table)
    assert loads_table(text) == table
    assert dumps_table(loads_table(text)) == text
    assert text.endswith("}\n")


def test_unknown_meta_keys_are_not_written_back():
    text = dumps_table(table_from_dict(variant(gamma=0)))
    assert "gamma" not in loads_table(text).meta.__dict__
    assert '"gamma"' not in text


def test_values_keep_full_precision():
    data = copy.deepcopy(TABLE)
    data["entries"][0]["value"] = str(2 ** 80)
    assert table_from_dict(data).entries[0].value == 2 ** 80


def test_duplicate_keys_are_rejected():
    data = copy.deepcopy(TABLE)
    data["entries"].append({"class": [2, 2], "s": 3, "value": "7"})
    with pytest.raises(SchemaError):
        table_from_dict(data)


@pytest.mark.parametrize("value", [48, "4.8", "x"])
def test_values_must_be_decimal_strings(value):
    data = copy.deepcopy(TABLE)
    data["entries"][0]["value"] = value
    with pytest.raises(SchemaError):
        table_from_dict(data)


def test_provenance_is_required_for_ingest():
    no_source = variant()
    del no_source["meta"]["source"]
    with pytest.raises(SchemaError):
        table_from_dict(no_source, require_provenance=True)

    no_convention = variant()
    del no_convention["meta"]["convention"]
    with pytest.raises(SchemaError, match="convention"):
        table_from_dict(no_convention, require_provenance=True)
    assert table_from_dict(no_convention).meta.convention is None


def test_unknown_convention_and_schema():
    with pytest.raises(SchemaError):
        table_from_dict(variant(convention="mine"))
    data = copy.deepcopy(TABLE)
    data["schema"] = 2
    with pytest.raises(SchemaError):
        table_from_dict(data)


def test_flags():
    assert table_from_dict(variant(flags={"chain_of_spheres": 1, "F_nontrivial": 1})).meta.flags.hypotheses_hold
    assert not table_from_dict(variant(flags={})).meta.flags.hypotheses_hold
    with pytest.raises(SchemaError):
        table_from_dict(variant(flags={"chain_of_spheres": "yes"}))


def test_overconstrained_entry_is_rejected():
    data = copy.deepcopy(TABLE)
    data["entries"] = [{"class": [1, 1], "s": 2, "value": "0"}]
    with pytest.raises(InputError):
        table_from_dict(data)


def test_declared_surface_model_stays_local():
    data = variant(surface="Y1", surface_model={"rank": 1, "intersection_matrix": [[1]], "c1_row": [3]})
    data["entries"] = [{"class": [2], "s": 0, "value": "1"}]
    table = table_from_dict(data)
    assert "Y1" not in SURFACES
    assert table.meta.model.c1_row == (3,)
    assert table.entries[0].cls.coords == (2,)


def test_same_name_different_models():
    first = variant(surface="Z", surface_model={"rank": 1, "intersection_matrix": [[1]], "c1_row": [3]})
    second = variant(surface="Z", surface_model={"rank": 1, "intersection_matrix": [[1]], "c1_row": [2]})
    for data in (first, second):
        data["entries"] = [{"class": [1], "s": 0, "value": "5"}]
    a, b = table_from_dict(first), table_from_dict(second)
    assert constraint_split(a.entries[0].cls, 0, a.meta.model) == 2
    assert constraint_split(b.entries[0].cls, 0, b.meta.model) == 1


@pytest.mark.parametrize("name", ["CP2", "cp2", "f0"])
def test_declared_model_cannot_shadow_builtins(name):
    data = variant(surface=name, surface_model={"rank": 1, "intersection_matrix": [[1]], "c1_row": [2]})
    data["entries"] = []
    with pytest.raises(SchemaError):
        table_from_dict(data)
    assert get_surface("cp2").name == "CP2"


def test_builtin_names_are_normalised():
    data = variant(surface="f0")
    assert table_from_dict(data).meta.surface == "F0"


def test_declared_model_with_wrong_rank():
    data = variant(surface="Y3", surface_model={"rank": 2, "intersection_matrix": [[1]], "c1_row": [3]})
    with pytest.raises(SchemaError):
        table_from_dict(data)


def test_unknown_surface_needs_a_model():
    with pytest.raises(SchemaError):
        table_from_dict(variant(surface="Y2"))


def test_csv_rendering():
    lines = frame_to_csv(table_frame(table_from_dict(TABLE))).splitlines()
    assert lines[0] == "surface,class,s,kind,value"
    assert lines[1] == 'F0,"2,2",3,welschinger,48'


def test_text_rendering():
    text = table_to_text(table_from_dict(TABLE))
    assert text.splitlines()[0] == "welschinger on F0 (standard, L=RX, F=standard)"
    assert "[2, 2] s=3: 48" in text
