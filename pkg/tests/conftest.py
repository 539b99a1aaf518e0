import json

import pytest
from typer.testing import CliRunner

from app.core.floors import FloorDiagram, enumerate_floor_diagrams
from app.core.lattice import from_toric, newton_polygon


@pytest.fixture(autouse=True)
def isolated_home(tmp_path, monkeypatch):
    # settings file and default cache live under a throwaway home
    monkeypatch.setenv("HOME", str(tmp_path / "home"))
    monkeypatch.delenv("REAL_ENUM_LOG_LEVEL", raising=False)
    (tmp_path / "home").mkdir()


@pytest.fixture
def cache_dir(tmp_path, monkeypatch):
    path = tmp_path / "cache"
    monkeypatch.setenv("REAL_ENUM_CACHE", str(path))
    return path


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def write_json(tmp_path):
    def write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)

    return write


def diagrams_of(surface, *toric):
    """Floor diagrams of the class with the given toric coordinates."""
    cls = from_toric(surface, toric)
    return enumerate_floor_diagrams(newton_polygon(surface, cls))


@pytest.fixture
def small_diagrams():
    cases = [("CP2", (1,)), ("CP2", (2,)), ("CP2", (3,)), ("F0", (1, 1)), ("F0", (2, 2)), ("F2", (2, 0)), ("F2", (1, 2))]
    out = []
    for surface, toric in cases:
        out.extend(diagrams_of(surface, *toric))
    assert all(isinstance(d, FloorDiagram) for d in out)
    return out
