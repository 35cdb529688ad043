"""Test the config file and the merged run configuration."""
from pathlib import Path
from typing import Any, Dict

import pytest

from partite.fracdecomp.config import (
    CONFIG_ENV,
    THREADS_ENV,
    FileConfig,
    RunConfig,
    load_file_config,
)
from partite.fracdecomp.errors import ConfigError
from partite.fracdecomp.transport import AnchorKind

REPO_CONFIG = Path(__file__).parent.parent / "fracdecomp.toml"


@pytest.fixture(autouse=True)
def clean_env(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    """Run every test in an empty directory without config variables."""
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    monkeypatch.delenv(THREADS_ENV, raising=False)
    monkeypatch.chdir(tmp_path)


def test_defaults_without_file() -> None:
    """Test that built-in defaults are used when no file is found."""
    config = load_file_config()
    assert config == FileConfig()
    assert config.run.backend == "exact"
    assert config.oracle.max_cliques == 2000


def test_repository_config_validates() -> None:
    """Test that the shipped fracdecomp.toml loads."""
    config = load_file_config(REPO_CONFIG)
    assert config.run.anchor_mode == "single"
    assert config.bench.sizes == [12, 24, 48]
    assert config.transport.eligible_cap is None


def test_config_from_env(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    """Test that FRACDECOMP_CONFIG names the file to load."""
    path = tmp_path / "other.toml"
    path.write_text('[run]\nbackend = "float"\n', encoding="utf-8")
    monkeypatch.setenv(CONFIG_ENV, str(path))
    assert load_file_config().run.backend == "float"


def test_config_in_working_directory(tmp_path: Path) -> None:
    """Test that ./fracdecomp.toml is picked up."""
    path = tmp_path / "fracdecomp.toml"
    path.write_text("[oracle]\nmax_edges = 7\n", encoding="utf-8")
    assert load_file_config().oracle.max_edges == 7


@pytest.mark.parametrize("text", [
    "[run\n",
    "[plot]\nwidth = 1\n",
    '[run]\nbackend = "decimal"\n',
    '[run]\nanchor_mode = "sample:0:1"\n',
    "[probe]\ntrials = \"many\"\n",
])
def test_invalid_file(tmp_path: Path, text: str) -> None:
    """Test that malformed or invalid files raise ConfigError."""
    path = tmp_path / "bad.toml"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError):
        load_file_config(path)


def test_missing_file(tmp_path: Path) -> None:
    """Test that an explicit missing file raises ConfigError."""
    with pytest.raises(ConfigError):
        load_file_config(tmp_path / "absent.toml")


def test_flags_override_file(tmp_path: Path) -> None:
    """Test that flags win and flags set to None fall back to the file."""
    graph = tmp_path / "g.txt"
    graph.touch()
    file_config = FileConfig.parse_obj({
        "run": {"backend": "float", "threads": 3},
        "transport": {"eligible_cap": 4},
    })
    config = RunConfig.build(
        {"command": "decompose", "graph": graph, "threads": None, "backend": "exact"},
        file_config,
    )
    assert config.backend == "exact"
    assert config.threads == 3
    assert config.transport_options.eligible_cap == 4
    assert config.mode.kind is AnchorKind.SINGLE


def test_threads_env(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    """Test that FRACDECOMP_THREADS beats the file but not the flag."""
    graph = tmp_path / "g.txt"
    graph.touch()
    monkeypatch.setenv(THREADS_ENV, "4")
    flags: Dict[str, Any] = {"command": "check", "graph": graph}
    assert RunConfig.build(flags, FileConfig()).threads == 4
    flags["threads"] = 2
    assert RunConfig.build(flags, FileConfig()).threads == 2


def test_command_sections() -> None:
    """Test that probe and bench take their grid from their own sections."""
    file_config = FileConfig.parse_obj({"probe": {"n": 6, "k_max": 3}})
    probe = RunConfig.build({"command": "probe"}, file_config)
    assert (probe.r, probe.n, probe.k_min, probe.k_max) == (3, 6, 0, 3)
    bench = RunConfig.build({"command": "bench"}, file_config)
    assert bench.sizes == [12, 24, 48]
    assert bench.matchings == 1


@pytest.mark.parametrize("flags", [
    {"command": "gen", "r": 3, "n": 4},
    {"command": "gen", "r": 2, "n": 4, "matchings": 1, "output": Path("g.txt")},
    {"command": "gen", "r": 3, "n": 4, "matchings": 5, "output": Path("g.txt")},
    {"command": "gen", "r": 3, "n": 4, "matchings": 1},
    {"command": "check", "graph": Path("missing.txt")},
    {"command": "decompose"},
    {"command": "probe", "r": 3, "n": 2, "k_max": 3},
    {"command": "probe", "r": 3, "n": 2, "trials": 0},
    {"command": "check", "graph": Path("."), "threads": 0},
    {"command": "check", "graph": Path("."), "time_limit": 0},
    {"command": "check", "graph": Path("."), "anchor_mode": "most"},
    {"command": "bench", "backends": ["exact", "decimal"]},
    {"command": "draw"},
])
def test_invalid_flags(flags: Dict[str, Any]) -> None:
    """Test that invalid invocations raise ConfigError."""
    with pytest.raises(ConfigError):
        RunConfig.build(flags, FileConfig())


def test_transport_options() -> None:
    """Test mapping the transport settings onto TransportOptions."""
    config = RunConfig.build(
        {
            "command": "bench",
            "eligible_cap": 8,
            "intermediate_size": 5,
            "diagnostics": False,
            "anchor_mode": "sample:2:9",
        },
        FileConfig(),
    )
    options = config.transport_options
    assert options.eligible_cap == 8
    assert options.size == 5
    assert not options.diagnostics
    assert options.exact_limit == 200_000
    assert config.mode.samples == 2
    assert config.mode.seed == 9
