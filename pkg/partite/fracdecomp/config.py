"""
Run configuration.

Defaults come from ``fracdecomp.toml``, found through the
``FRACDECOMP_CONFIG`` environment variable or in the working directory.
Command-line flags override the file. ``FRACDECOMP_THREADS`` overrides the
worker cap of both.
"""

import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ValidationError, root_validator, validator

from .backend import BACKENDS
from .errors import ConfigError, DomainError
from .transport import AnchorMode, TransportOptions

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

LOGGER = logging.getLogger(__name__)

__all__ = [
    "CONFIG_ENV",
    "COMMANDS",
    "FileConfig",
    "RunConfig",
    "THREADS_ENV",
    "load_file_config",
]

CONFIG_ENV = "FRACDECOMP_CONFIG"
THREADS_ENV = "FRACDECOMP_THREADS"
DEFAULT_CONFIG_NAME = "fracdecomp.toml"

COMMANDS = ("bench", "check", "decompose", "gen", "oracle", "probe", "verify")


class RunSection(BaseModel):
    """``[run]``: defaults shared by every command."""

    backend: str = "exact"
    anchor_mode: str = "single"
    threads: int = 1
    time_limit: Optional[int] = None

    @validator("backend")
    def _known_backend(cls, value: str) -> str:
        if value not in BACKENDS:
            raise ValueError(f"unknown backend {value!r}")
        return value

    @validator("anchor_mode")
    def _valid_anchor_mode(cls, value: str) -> str:
        try:
            AnchorMode.parse(value)
        except DomainError as e:
            raise ValueError(str(e)) from None
        return value


class TransportSection(BaseModel):
    """``[transport]``: tuning of the transport stages."""

    eligible_cap: Optional[int] = None
    exact_limit: int = 200_000
    intermediate_size: Optional[int] = None
    diagnostics: bool = True


class OracleSection(BaseModel):
    """``[oracle]``: size limits of the LP oracle."""

    max_cliques: int = 2000
    max_edges: int = 500


class ProbeSection(BaseModel):
    """``[probe]``: the feasibility sweep grid."""

    r: int = 3
    n: int = 4
    k_min: int = 0
    k_max: int = 2
    trials: int = 5
    seed: int = 0


class BenchSection(BaseModel):
    """``[bench]``: the benchmark grid."""

    r: int = 3
    sizes: List[int] = [12, 24, 48]
    matchings: int = 1
    seed: int = 0
    backends: List[str] = ["exact", "float"]
    decompose_limit: int = 24


class FileConfig(BaseModel):
    """The contents of ``fracdecomp.toml``."""

    run: RunSection = RunSection()
    transport: TransportSection = TransportSection()
    oracle: OracleSection = OracleSection()
    probe: ProbeSection = ProbeSection()
    bench: BenchSection = BenchSection()

    class Config:
        extra = "forbid"


def _config_path() -> Optional[Path]:
    explicit = os.environ.get(CONFIG_ENV)
    if explicit:
        return Path(explicit)
    local = Path.cwd() / DEFAULT_CONFIG_NAME
    return local if local.exists() else None


def load_file_config(path: Optional[Path] = None) -> FileConfig:
    """
    Load the config file.

    :param path: Explicit file; otherwise ``$FRACDECOMP_CONFIG``, then
        ``./fracdecomp.toml``, then built-in defaults.
    :raises ConfigError: The file is missing, is not TOML or does not
        validate.
    """
    path = path or _config_path()
    if path is None:
        LOGGER.debug("No config file, using defaults")
        return FileConfig()
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid TOML: {e}") from None
    try:
        config = FileConfig.parse_obj(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid config file {path}: {e}") from None
    LOGGER.debug(f"Loaded config from {path}")
    return config


class RunConfig(BaseModel):
    """One validated CLI invocation."""

    command: str
    graph: Optional[Path] = None
    output: Optional[Path] = None
    weighting: Optional[Path] = None
    certificate: Optional[Path] = None
    csv: Optional[Path] = None
    trace: Optional[Path] = None
    r: Optional[int] = None
    n: Optional[int] = None
    matchings: Optional[int] = None
    seed: int = 0
    anchor_mode: str = "single"
    backend: str = "exact"
    threads: int = 1
    time_limit: Optional[int] = None
    timings: bool = False
    force: bool = False
    eligible_cap: Optional[int] = None
    exact_limit: int = 200_000
    intermediate_size: Optional[int] = None
    diagnostics: bool = True
    max_cliques: int = 2000
    max_edges: int = 500
    k_min: int = 0
    k_max: int = 2
    trials: int = 5
    sizes: List[int] = [12, 24, 48]
    backends: List[str] = ["exact", "float"]
    decompose_limit: int = 24

    @validator("command")
    def _known_command(cls, value: str) -> str:
        if value not in COMMANDS:
            raise ValueError(f"unknown command {value!r}")
        return value

    @validator("backend")
    def _known_backend(cls, value: str) -> str:
        if value not in BACKENDS:
            raise ValueError(f"unknown backend {value!r}")
        return value

    @validator("backends", each_item=True)
    def _known_backends(cls, value: str) -> str:
        if value not in BACKENDS:
            raise ValueError(f"unknown backend {value!r}")
        return value

    @validator("anchor_mode")
    def _valid_anchor_mode(cls, value: str) -> str:
        try:
            AnchorMode.parse(value)
        except DomainError as e:
            raise ValueError(str(e)) from None
        return value

    @validator("threads")
    def _positive_threads(cls, value: int) -> int:
        if value < 1:
            raise ValueError("threads must be at least 1")
        return value

    @validator("time_limit")
    def _positive_time_limit(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value < 1:
            raise ValueError("time limit must be at least one second")
        return value

    @root_validator(skip_on_failure=True)
    def _command_requirements(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        command = values["command"]
        if command == "gen":
            r, n, k = values.get("r"), values.get("n"), values.get("matchings")
            if r is None or n is None or k is None:
                raise ValueError("gen needs --r, --n and --matchings")
            if r < 3 or n < 1:
                raise ValueError("gen needs r >= 3 and n >= 1")
            if not 0 <= k <= n:
                raise ValueError("gen needs 0 <= matchings <= n")
            if values.get("output") is None:
                raise ValueError("gen needs an output path")
        if command in ("check", "decompose", "verify", "oracle"):
            graph = values.get("graph")
            if graph is None or not graph.exists():
                raise ValueError(f"{command} needs an existing graph file")
        if command == "verify":
            weighting = values.get("weighting")
            if weighting is None or not weighting.exists():
                raise ValueError("verify needs an existing weighting file")
        if command == "probe":
            n = values.get("n")
            if n is None or values.get("r") is None:
                raise ValueError("probe needs --r and --n")
            if not 0 <= values["k_min"] <= values["k_max"] <= n:
                raise ValueError("probe needs 0 <= k_min <= k_max <= n")
            if values["trials"] < 1:
                raise ValueError("probe needs at least one trial")
        return values

    @classmethod
    def build(
            cls,
            flags: Dict[str, Any],
            file_config: Optional[FileConfig] = None,
    ) -> "RunConfig":
        """
        Merge file defaults, flags and the environment.

        Flags set to None fall back to the file.

        :raises ConfigError: The merged configuration is invalid.
        """
        file_config = file_config or load_file_config()
        command = flags.get("command")
        merged: Dict[str, Any] = {
            "backend": file_config.run.backend,
            "anchor_mode": file_config.run.anchor_mode,
            "threads": file_config.run.threads,
            "time_limit": file_config.run.time_limit,
            "eligible_cap": file_config.transport.eligible_cap,
            "exact_limit": file_config.transport.exact_limit,
            "intermediate_size": file_config.transport.intermediate_size,
            "diagnostics": file_config.transport.diagnostics,
            "max_cliques": file_config.oracle.max_cliques,
            "max_edges": file_config.oracle.max_edges,
        }
        if command == "probe":
            merged.update(
                r=file_config.probe.r,
                n=file_config.probe.n,
                k_min=file_config.probe.k_min,
                k_max=file_config.probe.k_max,
                trials=file_config.probe.trials,
                seed=file_config.probe.seed,
            )
        if command == "bench":
            merged.update(
                r=file_config.bench.r,
                sizes=file_config.bench.sizes,
                matchings=file_config.bench.matchings,
                seed=file_config.bench.seed,
                backends=file_config.bench.backends,
                decompose_limit=file_config.bench.decompose_limit,
            )

        threads = os.environ.get(THREADS_ENV)
        if threads:
            merged["threads"] = threads
        merged.update({key: value for key, value in flags.items() if value is not None})
        try:
            return cls.parse_obj(merged)
        except ValidationError as e:
            raise ConfigError(f"Invalid arguments: {e}") from None

    @property
    def mode(self) -> AnchorMode:
        """The parsed anchor mode."""
        return AnchorMode.parse(self.anchor_mode)

    @property
    def transport_options(self) -> TransportOptions:
        """Options for the transport stages."""
        return TransportOptions(
            eligible_cap=self.eligible_cap,
            exact_limit=self.exact_limit,
            size=self.intermediate_size,
            diagnostics=self.diagnostics,
        )
