import json
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

import pandas as pd
import typer

from app.core.checks import FAIL, PASS, Report, ReportLine, check_monotonicity, run_table_checks
from app.core.errors import InputError, RealEnumError, SchemaError
from app.core.floors import gw_toric, relative_complex_counts_f2, relative_real_counts_f2, welschinger_toric
from app.core.lattice import from_toric, get_surface
from app.core.mod2homology import (
    all_builtin_models,
    blowup_transform,
    builtin_model,
    is_nontrivial_class,
    model_from_dict,
    quotient_dimension,
    verify_claimed_basis,
)
from app.core.sumformula import (
    CALIBRATED_GAMMA,
    complex_via_strata,
    ellipsoid_via_strata,
    hyperboloid_via_strata,
    quadric_decrement,
    quadric_series,
    welschinger_ellipsoid,
)
from app.core.tables import (
    InvariantTable,
    TableEntry,
    TableMeta,
    dumps_table,
    frame_to_csv,
    load_table,
    table_frame,
    table_from_dict,
    table_to_dict,
    table_to_text,
)
from app.utils.cache import ResultCache, content_key, result_key
from app.utils.logger import configure_logging, get_logger
from app.utils.settings import load_user_settings, resolve_cache_dir, resolve_workers

log = get_logger(__name__)

app = typer.Typer(
    help="Floor-diagram counts of real and complex rational curves on toric surfaces.",
    no_args_is_help=True,
    add_completion=False,
)
compute_app = typer.Typer(help="Compute invariants and strata.", no_args_is_help=True)
check_app = typer.Typer(help="Check identities and theorems.", no_args_is_help=True)
cache_app = typer.Typer(help="Inspect or clear the result cache.", no_args_is_help=True)
app.add_typer(compute_app, name="compute")
app.add_typer(check_app, name="check")
app.add_typer(cache_app, name="cache")

COMPUTED_SOURCE = "realfloor floor-diagram enumeration"


class OutputFormat(str, Enum):
    json = "json"
    csv = "csv"
    text = "text"


@dataclass
class RunConfig:
    command: str
    surface: str = None
    coords: tuple = None
    k_max: int = None
    cache_dir: str = None
    output_format: OutputFormat = OutputFormat.json
    workers: int = 1
    use_cache: bool = True


_settings = {}


@app.callback()
def main(debug: bool = typer.Option(False, "--debug", help="Verbose logging to stderr.")):
    _settings.clear()
    _settings.update(load_user_settings())
    configure_logging(debug, _settings.get("log_level"))


@contextmanager
def _exit_codes():
    try:
        yield
    except RealEnumError as e:
        typer.echo(f"❌ {e}", err=True)
        raise typer.Exit(code=e.exit_code)
    except OSError as e:
        typer.echo(f"❌ Cannot read {e.filename}: {e.strerror}", err=True)
        raise typer.Exit(code=InputError.exit_code)


def _settings_or_load():
    return _settings or load_user_settings()


def _run_config(command, surface=None, coords=None, k_max=None, cache_dir=None,
                output_format=None, workers=None, no_cache=False):
    settings = _settings_or_load()
    fmt = output_format or OutputFormat(settings.get("default_format") or "json")
    return RunConfig(
        command=command,
        surface=surface,
        coords=coords,
        k_max=k_max,
        cache_dir=resolve_cache_dir(cache_dir, settings),
        output_format=fmt,
        workers=resolve_workers(workers, settings),
        use_cache=not no_cache,
    )


def _parse_ints(text, what):
    try:
        return tuple(int(part) for part in text.replace(" ", "").split(","))
    except ValueError:
        raise InputError(f"{what} must be comma-separated integers, got {text!r}")


def _class_from_options(surface, degree, class_text):
    model = get_surface(surface)
    if (degree is None) == (class_text is None):
        raise InputError("Give exactly one of --degree or --class")
    if degree is not None:
        if model.rank != 1:
            raise InputError(f"--degree is for CP2; use --class for {model.name}")
        return from_toric(model, (degree,))
    return from_toric(model, _parse_ints(class_text, "--class"))


def _emit(text):
    typer.echo(text, nl=False)


def _emit_table(record, fmt):
    table = table_from_dict(record)
    if fmt == OutputFormat.csv:
        _emit(frame_to_csv(table_frame(table)))
    elif fmt == OutputFormat.text:
        _emit(table_to_text(table))
    else:
        _emit(dumps_table(table))


def _emit_records(records, columns, fmt, key):
    if fmt == OutputFormat.csv:
        _emit(frame_to_csv(pd.DataFrame(records, columns=columns)))
    elif fmt == OutputFormat.text:
        _emit("".join(" ".join(str(r[c]) for c in columns) + "\n" for r in records))
    else:
        _emit(json.dumps({"schema": 1, key: records}, indent=2, sort_keys=True) + "\n")


def _cached_record(config, operation, build):
    cache = ResultCache(config.cache_dir)
    key = result_key(config.surface, config.coords, operation)
    if config.use_cache:
        record = cache.get(key)
        if record is not None:
            return record
    log.info(f"🔍 Computing {operation} for {config.surface} {list(config.coords)}")
    record = build()
    if config.use_cache:
        cache.put(key, record)
    return record


def _invariant_record(cls, value, kind, **meta):
    table = InvariantTable(
        TableMeta(surface=cls.surface_id, kind=kind, source=COMPUTED_SOURCE, **meta),
        (TableEntry(cls, 0, value),),
    )
    return table_to_dict(table)


# compute
SURFACE_OPTION = typer.Option("cp2", "--surface", help="cp2, f0 or f2.")
DEGREE_OPTION = typer.Option(None, "--degree", help="Degree (CP2).")
CLASS_OPTION = typer.Option(None, "--class", help="Toric coordinates a,b (F0: a*l1 + b*l2; F2: a floors, b = d.E).")
FORMAT_OPTION = typer.Option(None, "--format", help="json, csv or text.")
CACHE_OPTION = typer.Option(None, "--cache-dir", help="Result cache directory.")
NO_CACHE_OPTION = typer.Option(False, "--no-cache", help="Neither read nor write the cache.")
WORKERS_OPTION = typer.Option(None, "--workers", help="Processes for the enumeration.")


def _compute_toric(kind, surface, degree, class_text, fmt, cache_dir, no_cache, workers):
    cls = _class_from_options(surface, degree, class_text)
    config = _run_config(f"compute {kind}", cls.surface_id, cls.coords, None, cache_dir, fmt, workers, no_cache)
    count = gw_toric if kind == "gw" else welschinger_toric
    record = _cached_record(
        config, kind,
        lambda: _invariant_record(cls, count(cls.surface_id, cls, config.workers), kind),
    )
    _emit_table(record, config.output_format)


@compute_app.command("gw")
def compute_gw(
    surface: str = SURFACE_OPTION,
    degree: Optional[int] = DEGREE_OPTION,
    class_text: Optional[str] = CLASS_OPTION,
    fmt: Optional[OutputFormat] = FORMAT_OPTION,
    cache_dir: Optional[str] = CACHE_OPTION,
    no_cache: bool = NO_CACHE_OPTION,
    workers: Optional[int] = WORKERS_OPTION,
):
    """Gromov-Witten count of rational curves through c1.d - 1 points."""
    with _exit_codes():
        _compute_toric("gw", surface, degree, class_text, fmt, cache_dir, no_cache, workers)


@compute_app.command("welschinger")
def compute_welschinger(
    surface: str = SURFACE_OPTION,
    degree: Optional[int] = DEGREE_OPTION,
    class_text: Optional[str] = CLASS_OPTION,
    fmt: Optional[OutputFormat] = FORMAT_OPTION,
    cache_dir: Optional[str] = CACHE_OPTION,
    no_cache: bool = NO_CACHE_OPTION,
    workers: Optional[int] = WORKERS_OPTION,
):
    """Welschinger count, s = 0, standard real structure."""
    with _exit_codes():
        _compute_toric("welschinger", surface, degree, class_text, fmt, cache_dir, no_cache, workers)


@compute_app.command("ellipsoid")
def compute_ellipsoid(
    degree: int = typer.Option(..., "--degree", help="d for the class d(l1 + l2)."),
    fmt: Optional[OutputFormat] = FORMAT_OPTION,
    cache_dir: Optional[str] = CACHE_OPTION,
    no_cache: bool = NO_CACHE_OPTION,
    workers: Optional[int] = WORKERS_OPTION,
):
    """Welschinger count of d(l1 + l2) on the quadric ellipsoid."""
    with _exit_codes():
        if degree < 1:
            raise InputError(f"Degree must be positive, got {degree}")
        cls = from_toric("F0", (degree, degree))
        config = _run_config("compute ellipsoid", "F0", cls.coords, None, cache_dir, fmt, workers, no_cache)
        record = _cached_record(
            config, "ellipsoid",
            lambda: _invariant_record(
                cls, welschinger_ellipsoid(degree, config.workers), "ellipsoid",
                real_structure="ellipsoid", L="S2",
            ),
        )
        _emit_table(record, config.output_format)


@compute_app.command("strata")
def compute_strata(
    class_text: str = typer.Option(..., "--class", help="F2 toric coordinates a,b."),
    k_max: Optional[int] = typer.Option(None, "--k-max", help="Largest k; default the last effective one."),
    complex_counts: bool = typer.Option(False, "--complex", help="Gromov-Witten strata instead of real ones."),
    fmt: Optional[OutputFormat] = FORMAT_OPTION,
    cache_dir: Optional[str] = CACHE_OPTION,
    no_cache: bool = NO_CACHE_OPTION,
    workers: Optional[int] = WORKERS_OPTION,
):
    """Counts of d - kE on F2 split by their intersection with E."""
    with _exit_codes():
        cls = from_toric("F2", _parse_ints(class_text, "--class"))
        config = _run_config("compute strata", "F2", cls.coords, k_max, cache_dir, fmt, workers, no_cache)
        kind = "complex" if complex_counts else "real"

        def build():
            if complex_counts:
                d_e, counts = relative_complex_counts_f2(cls, k_max, config.workers)
                rows = [
                    {"k": k, "a": d_e + 2 * k, "b": 0, "value": str(v)} for k, v in sorted(counts.items())
                ]
            else:
                strata = relative_real_counts_f2(cls, k_max, config.workers)
                d_e = strata.d_dot_e
                rows = [{"k": k, "a": a, "b": b, "value": str(v)} for (k, a, b), v in strata.items()]
            return {
                "schema": 1,
                "meta": {"surface": "F2", "class": list(cls.coords), "d_dot_E": d_e, "kind": f"strata-{kind}"},
                "strata": rows,
            }

        record = _cached_record(config, f"strata-{kind}:{k_max}", build)
        if config.output_format == OutputFormat.json:
            _emit(json.dumps(record, indent=2, sort_keys=True) + "\n")
        else:
            _emit_records(record["strata"], ["k", "a", "b", "value"], config.output_format, "strata")


# check
def _emit_report(report, fmt):
    _emit_records(
        report.to_records(), ["entry", "check", "status", "detail"],
        fmt or OutputFormat(_settings_or_load().get("default_format") or "json"), "report",
    )
    if report.failed:
        raise typer.Exit(code=1)


def _equality_line(entry, check, direct, via):
    return ReportLine(entry, check, PASS if direct == via else FAIL, f"direct {direct}, via strata {via}")


def _f0_classes(max_total):
    return [
        from_toric("F0", (a, total - a))
        for total in range(1, max_total + 1)
        for a in range(total + 1)
    ]


@check_app.command("abv-complex")
def check_abv_complex(
    max_total: int = typer.Option(5, "--max-total", help="Check every F0 class (a, b) with a + b <= this."),
    fmt: Optional[OutputFormat] = FORMAT_OPTION,
    workers: Optional[int] = WORKERS_OPTION,
):
    """GW of F0 against the binomial combination of F2 strata."""
    with _exit_codes():
        n = resolve_workers(workers, _settings_or_load())
        lines = [
            _equality_line(str(c), "abv-complex", gw_toric("F0", c, n), complex_via_strata(c, n))
            for c in _f0_classes(max_total)
        ]
        _emit_report(Report(tuple(lines)), fmt)


@check_app.command("abv-real")
def check_abv_real(
    max_total: int = typer.Option(4, "--max-total", help="Check every F0 class (a, b) with a + b <= this."),
    gamma: int = typer.Option(CALIBRATED_GAMMA, "--gamma", help="The [F0 u L0] bit."),
    fmt: Optional[OutputFormat] = FORMAT_OPTION,
    workers: Optional[int] = WORKERS_OPTION,
):
    """Hyperboloid Welschinger counts against the real combination of F2 strata."""
    with _exit_codes():
        n = resolve_workers(workers, _settings_or_load())
        lines = [
            _equality_line(
                str(c), f"abv-real(gamma={gamma})",
                welschinger_toric("F0", c, n), hyperboloid_via_strata(c, gamma, n),
            )
            for c in _f0_classes(max_total)
        ]
        _emit_report(Report(tuple(lines)), fmt)


@check_app.command("class-trop")
def check_class_trop(
    max_degree: int = typer.Option(3, "--max-degree"),
    gamma: int = typer.Option(CALIBRATED_GAMMA, "--gamma"),
    fmt: Optional[OutputFormat] = FORMAT_OPTION,
    workers: Optional[int] = WORKERS_OPTION,
):
    """Ellipsoid counts against the F2 floor count of (d, 0)."""
    with _exit_codes():
        n = resolve_workers(workers, _settings_or_load())
        lines = [
            _equality_line(
                f"ellipsoid d={d}", "class-trop",
                welschinger_ellipsoid(d, n), ellipsoid_via_strata(d, gamma, n),
            )
            for d in range(1, max_degree + 1)
        ]
        _emit_report(Report(tuple(lines)), fmt)


@check_app.command("table")
def check_table(
    files: List[str] = typer.Argument(..., help="Table JSON files."),
    fmt: Optional[OutputFormat] = FORMAT_OPTION,
):
    """Vanishing, divisibility and sign checks on invariant tables."""
    with _exit_codes():
        report = Report()
        for path in files:
            report = report + run_table_checks(load_table(path))
        _emit_report(report, fmt)


def _load_series(path):
    with open(path, "r") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError(f"Not valid JSON: {e}") from e
    items = raw.get("series") if isinstance(raw, dict) else raw
    try:
        return [(int(item["chi"]), int(item["value"])) for item in items]
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"Series entries need integer chi and value: {e}") from e


@check_app.command("monotonicity")
def check_monotonicity_cmd(
    series_file: Optional[str] = typer.Option(None, "--series", help="JSON list of {chi, value}."),
    quadric_degree: Optional[int] = typer.Option(None, "--quadric-degree", help="Compare hyperboloid and ellipsoid."),
    fmt: Optional[OutputFormat] = FORMAT_OPTION,
    workers: Optional[int] = WORKERS_OPTION,
):
    """Welschinger counts must not increase with chi(RX)."""
    with _exit_codes():
        if (series_file is None) == (quadric_degree is None):
            raise InputError("Give exactly one of --series or --quadric-degree")
        if series_file is not None:
            report = check_monotonicity(_load_series(series_file))
        else:
            n = resolve_workers(workers, _settings_or_load())
            series = quadric_series(quadric_degree, n)
            report = check_monotonicity(series)
            gap = series[0][1] - series[1][1]
            decrement = quadric_decrement(quadric_degree, n)
            report = report + Report((ReportLine(
                f"quadric d={quadric_degree}", "decrement",
                PASS if gap == decrement else FAIL, f"{gap} = {decrement}",
            ),))
        _emit_report(report, fmt)


@check_app.command("homology")
def check_homology(
    models: Optional[List[str]] = typer.Option(None, "--model", help="Built-in model, e.g. dp2 or conic_bundle(3)."),
    model_file: Optional[str] = typer.Option(None, "--model-file", help="Model in the JSON model format."),
    blowups: Optional[List[str]] = typer.Option(None, "--blowup", help="real_point_on_L or conjugate_pair."),
    nontrivial: Optional[str] = typer.Option(None, "--nontrivial", help="Labels of a class to test, joined by '+'."),
    fmt: Optional[OutputFormat] = FORMAT_OPTION,
):
    """Quotient dimensions and claimed bases of H(X_R, L)."""
    with _exit_codes():
        if model_file:
            with open(model_file, "r") as f:
                try:
                    chosen = [model_from_dict(json.load(f))]
                except json.JSONDecodeError as e:
                    raise SchemaError(f"Not valid JSON: {e}") from e
            chosen[0].validate()
        elif models:
            chosen = [builtin_model(name) for name in models]
        else:
            chosen = all_builtin_models()
        lines = []
        for model in chosen:
            for kind in blowups or ():
                model = blowup_transform(model, kind)
            dim = quotient_dimension(model)
            lines.append(ReportLine(
                model.name, "quotient-dimension", PASS if dim == len(model.claimed_basis) else FAIL,
                f"dim H = {dim}, stated basis of {len(model.claimed_basis)}",
            ))
            lines.append(ReportLine(
                model.name, "claimed-basis", PASS if verify_claimed_basis(model) else FAIL,
                f"{len(model.claimed_basis)} vectors",
            ))
            if nontrivial:
                vector = model.vector(*nontrivial.split("+"))
                lines.append(ReportLine(
                    model.name, "nontrivial", PASS,
                    f"{nontrivial} is {'nonzero' if is_nontrivial_class(model, vector) else 'zero'} in H",
                ))
        _emit_report(Report(tuple(lines)), fmt)


# ingest
@app.command("ingest")
def ingest(
    path: str = typer.Argument(..., help="Table JSON file with meta.source and meta.convention."),
    cache_dir: Optional[str] = CACHE_OPTION,
):
    """Validate an external table and store it in the cache."""
    with _exit_codes():
        table = load_table(path, require_provenance=True)
        record = table_to_dict(table)
        cache = ResultCache(resolve_cache_dir(cache_dir, _settings_or_load()))
        key = content_key(record)
        cache.put(key, record)
        log.info(f"✅ Stored {len(table.entries)} entries for {table.meta.surface} as {key}")
        _emit(json.dumps({"stored": key, "entries": len(table.entries)}, sort_keys=True) + "\n")


# cache
@cache_app.command("ls")
def cache_ls(
    cache_dir: Optional[str] = CACHE_OPTION,
    fmt: Optional[OutputFormat] = FORMAT_OPTION,
):
    with _exit_codes():
        cache = ResultCache(resolve_cache_dir(cache_dir, _settings_or_load()))
        records = cache.ls()
        _emit_records(records, ["key", "surface", "kind", "entries", "source"], fmt or OutputFormat.json, "records")


@cache_app.command("clear")
def cache_clear(cache_dir: Optional[str] = CACHE_OPTION):
    with _exit_codes():
        cache = ResultCache(resolve_cache_dir(cache_dir, _settings_or_load()))
        removed = cache.clear()
        _emit(json.dumps({"removed": removed}) + "\n")
