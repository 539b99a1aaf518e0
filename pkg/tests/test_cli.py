import copy
import json
import os

from app.cli.commands import COMPUTED_SOURCE, app
from tests.test_tables import TABLE


def run(runner, *args):
    return runner.invoke(app, list(args))


def value_of(result):
    (entry,) = json.loads(result.stdout)["entries"]
    return entry["value"]


# compute
def test_compute_gw(runner, cache_dir):
    result = run(runner, "compute", "gw", "--surface", "cp2", "--degree", "3")
    assert result.exit_code == 0, result.output
    assert value_of(result) == "12"
    meta = json.loads(result.stdout)["meta"]
    assert meta["source"] == COMPUTED_SOURCE
    assert meta["convention"] == "f-mass"


def test_warm_cache_gives_identical_output(runner, cache_dir):
    first = run(runner, "compute", "welschinger", "--surface", "cp2", "--degree", "4")
    second = run(runner, "compute", "welschinger", "--surface", "cp2", "--degree", "4")
    assert first.exit_code == second.exit_code == 0
    assert value_of(first) == "240"
    assert first.stdout == second.stdout
    assert len([n for n in os.listdir(cache_dir) if n.endswith(".json")]) == 1


def test_no_cache_leaves_the_directory_alone(runner, cache_dir):
    result = run(runner, "compute", "gw", "--degree", "2", "--no-cache")
    assert result.exit_code == 0, result.output
    assert not cache_dir.exists()


def test_compute_f2_welschinger(runner, cache_dir):
    result = run(runner, "compute", "welschinger", "--surface", "f2", "--class", "2,0")
    assert result.exit_code == 0, result.output
    assert value_of(result) == "6"


def test_compute_csv(runner, cache_dir):
    result = run(runner, "compute", "gw", "--surface", "f0", "--class", "2,2", "--format", "csv")
    assert result.exit_code == 0, result.output
    assert result.stdout.splitlines() == ["surface,class,s,kind,value", 'F0,"2,2",0,gw,12']


def test_input_errors_exit_with_two(runner, cache_dir):
    assert run(runner, "compute", "gw", "--degree", "0").exit_code == 2
    assert run(runner, "compute", "gw", "--surface", "f0", "--degree", "2").exit_code == 2
    assert run(runner, "compute", "gw", "--degree", "3", "--class", "3").exit_code == 2
    assert run(runner, "compute", "gw", "--surface", "dp5", "--degree", "1").exit_code == 2
    assert run(runner, "compute", "gw", "--surface", "f2", "--class", "1,x").exit_code == 2


def test_compute_ellipsoid(runner, cache_dir):
    result = run(runner, "compute", "ellipsoid", "--degree", "2")
    assert result.exit_code == 0, result.output
    assert value_of(result) == "6"
    assert json.loads(result.stdout)["meta"]["real_structure"] == "ellipsoid"


def test_compute_strata(runner, cache_dir):
    result = run(runner, "compute", "strata", "--class", "1,0")
    assert result.exit_code == 0, result.output
    record = json.loads(result.stdout)
    assert record["meta"]["d_dot_E"] == 0
    assert record["strata"] == [
        {"k": 0, "a": 0, "b": 0, "value": "1"},
        {"k": 1, "a": 2, "b": 0, "value": "0"},
    ]
    complex_result = run(runner, "compute", "strata", "--class", "1,0", "--complex")
    assert [row["value"] for row in json.loads(complex_result.stdout)["strata"]] == ["1", "0"]
    assert run(runner, "compute", "strata", "--class", "1,0", "--k-max", "-1").exit_code == 2


# check
def test_sum_formula_checks_pass(runner):
    for args in (
        ["check", "abv-complex", "--max-total", "3"],
        ["check", "abv-real", "--max-total", "3"],
        ["check", "class-trop", "--max-degree", "2"],
    ):
        result = run(runner, *args)
        assert result.exit_code == 0, result.output
        assert {line["status"] for line in json.loads(result.stdout)["report"]} == {"pass"}


def test_wrong_gamma_fails(runner):
    assert run(runner, "check", "abv-real", "--max-total", "3", "--gamma", "1").exit_code == 1


def test_table_violation_exits_with_one(runner, write_json):
    data = copy.deepcopy(TABLE)
    data["entries"] = [{"class": [1, 2], "s": 2, "value": "3"}]
    result = run(runner, "check", "table", write_json("bad.json", data))
    assert result.exit_code == 1
    statuses = {(l["check"], l["status"]) for l in json.loads(result.stdout)["report"]}
    assert ("divisibility", "fail") in statuses


def test_missing_flags_give_not_applicable(runner, write_json):
    data = copy.deepcopy(TABLE)
    data["meta"]["flags"] = {"chain_of_spheres": True}
    data["entries"] = [{"class": [1, 2], "s": 2, "value": "3"}]
    result = run(runner, "check", "table", write_json("unflagged.json", data))
    assert result.exit_code == 0, result.output
    assert {l["status"] for l in json.loads(result.stdout)["report"]} == {"n/a"}


def test_vanishing_violation_exits_with_one(runner, write_json):
    data = copy.deepcopy(TABLE)
    data["meta"]["surface"] = "CP2"
    data["entries"] = [{"class": [1], "s": 0, "value": "5"}]
    result = run(runner, "check", "table", write_json("lines.json", data))
    assert result.exit_code == 1
    (line,) = [l for l in json.loads(result.stdout)["report"] if l["check"] == "vanishing"]
    assert line["status"] == "fail"
    assert line["detail"] == "r=2 but value 5 != 0"


def test_sign_violation_exits_with_one(runner, write_json):
    data = copy.deepcopy(TABLE)
    # no nodes, so the value must be nonnegative; 2 divides it
    data["entries"] = [{"class": [1, 2], "s": 2, "value": "-2"}]
    result = run(runner, "check", "table", write_json("signs.json", data))
    assert result.exit_code == 1
    statuses = {l["check"]: l["status"] for l in json.loads(result.stdout)["report"]}
    assert statuses == {"vanishing": "n/a", "divisibility": "pass", "sign": "fail"}


def test_tables_with_the_same_surface_name_are_checked_apart(runner, write_json):
    def declared(c1, value):
        data = copy.deepcopy(TABLE)
        data["meta"]["surface"] = "Z"
        data["meta"]["surface_model"] = {"rank": 1, "intersection_matrix": [[1]], "c1_row": [c1]}
        data["entries"] = [{"class": [1], "s": 0, "value": value}]
        return data

    a = write_json("a.json", declared(3, "0"))
    b = write_json("b.json", declared(2, "5"))
    alone = run(runner, "check", "table", b)
    assert alone.exit_code == 0, alone.output
    for files, expected in (((a, b), ["pass", "n/a"]), ((b, a), ["n/a", "pass"])):
        result = run(runner, "check", "table", *files)
        assert result.exit_code == 0, result.output
        lines = [l for l in json.loads(result.stdout)["report"] if l["check"] == "vanishing"]
        assert [l["status"] for l in lines] == expected


def test_declared_builtin_surface_is_rejected(runner, write_json):
    data = copy.deepcopy(TABLE)
    data["meta"]["surface"] = "cp2"
    data["meta"]["surface_model"] = {"rank": 1, "intersection_matrix": [[1]], "c1_row": [2]}
    data["entries"] = [{"class": [1], "s": 0, "value": "1"}]
    assert run(runner, "check", "table", write_json("cp2.json", data)).exit_code == 2
    result = run(runner, "compute", "gw", "--surface", "cp2", "--degree", "3", "--no-cache")
    assert value_of(result) == "12"


def test_computed_tables_pass_the_checks(runner, cache_dir, tmp_path):
    files = []
    for surface, cls in (("cp2", "3"), ("cp2", "4"), ("f0", "2,2"), ("f0", "1,3"), ("f2", "2,0"), ("f2", "1,2")):
        computed = run(runner, "compute", "welschinger", "--surface", surface, "--class", cls)
        assert computed.exit_code == 0, computed.output
        path = tmp_path / f"{surface}-{cls}.json"
        path.write_text(computed.stdout)
        files.append(str(path))
    result = run(runner, "check", "table", *files)
    assert result.exit_code == 0, result.output
    assert "fail" not in {l["status"] for l in json.loads(result.stdout)["report"]}


def test_unreadable_table_exits_with_two(runner, tmp_path):
    assert run(runner, "check", "table", str(tmp_path / "nope.json")).exit_code == 2


def test_monotonicity(runner, write_json):
    good = write_json("good.json", {"series": [{"chi": 0, "value": 8}, {"chi": 2, "value": 6}]})
    bad = write_json("bad.json", [{"chi": 0, "value": 6}, {"chi": 2, "value": 8}])
    assert run(runner, "check", "monotonicity", "--series", good).exit_code == 0
    assert run(runner, "check", "monotonicity", "--series", bad).exit_code == 1
    result = run(runner, "check", "monotonicity", "--quadric-degree", "2")
    assert result.exit_code == 0, result.output
    assert "decrement" in {l["check"] for l in json.loads(result.stdout)["report"]}
    assert run(runner, "check", "monotonicity").exit_code == 2


def test_homology(runner):
    result = run(runner, "check", "homology")
    assert result.exit_code == 0, result.output
    result = run(runner, "check", "homology", "--model", "dp2", "--nontrivial", "S3+S5", "--format", "text")
    assert result.exit_code == 0, result.output
    assert "S3+S5 is nonzero in H" in result.stdout
    result = run(runner, "check", "homology", "--model", "cp2", "--blowup", "conjugate_pair", "--blowup", "real_point_on_L")
    assert result.exit_code == 0, result.output
    assert run(runner, "check", "homology", "--model", "dp3").exit_code == 2


# ingest and cache
def test_ingest_stores_the_table(runner, cache_dir, write_json):
    result = run(runner, "ingest", write_json("table.json", TABLE))
    assert result.exit_code == 0, result.output
    stored = json.loads(result.stdout)
    assert stored["entries"] == 2
    listing = json.loads(run(runner, "cache", "ls").stdout)["records"]
    assert [r["key"] for r in listing] == [stored["stored"]]
    assert listing[0]["source"] == "hand computation"


def test_ingest_rejects_bad_tables(runner, cache_dir, write_json, tmp_path):
    duplicate = copy.deepcopy(TABLE)
    duplicate["entries"].append(duplicate["entries"][0])
    assert run(runner, "ingest", write_json("dup.json", duplicate)).exit_code == 2

    unsigned = copy.deepcopy(TABLE)
    del unsigned["meta"]["convention"]
    result = run(runner, "ingest", write_json("unsigned.json", unsigned))
    assert result.exit_code == 2
    assert "convention" in result.output

    assert run(runner, "ingest", str(tmp_path / "missing.json")).exit_code == 2
    assert not cache_dir.exists()


def test_computed_tables_can_be_ingested(runner, cache_dir, tmp_path):
    computed = run(runner, "compute", "gw", "--surface", "f0", "--class", "1,2")
    path = tmp_path / "computed.json"
    path.write_text(computed.stdout)
    result = run(runner, "ingest", str(path))
    assert result.exit_code == 0, result.output


def test_cache_clear(runner, cache_dir):
    run(runner, "compute", "gw", "--degree", "1")
    run(runner, "compute", "gw", "--degree", "2")
    result = run(runner, "cache", "clear")
    assert json.loads(result.stdout) == {"removed": 2}
    assert json.loads(run(runner, "cache", "ls").stdout)["records"] == []


def test_cache_ls_skips_foreign_files(runner, cache_dir):
    cache_dir.mkdir()
    (cache_dir / "x.json").write_text("[1, 2]")
    result = run(runner, "cache", "ls")
    assert result.exit_code == 0, result.output
    assert json.loads(result.stdout)["records"] == []
