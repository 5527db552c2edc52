"""Run configuration stored as a flat TOML file of key = value pairs."""

import errno
import json
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .network import NetworkParams
from .prestige import PrestigeParams


@dataclass(frozen=True)
class RunConfig:
    journals: Optional[str] = None
    documents: Optional[str] = None
    references: Optional[str] = None
    areas: Optional[str] = None
    edges: Optional[str] = None
    journal_stats: Optional[str] = None
    target_year: Optional[int] = None
    window_years: int = 3
    self_cite_cap: float = 0.33
    art_basis: str = "window"
    d: float = 0.9
    e: float = 0.0999
    convergence_tol: float = 1e-9
    max_iterations: int = 200
    c: float = 1.0
    output_dir: str = "out"
    grouping_level: str = "overall"
    threads: int = 1
    horizon: int = 12
    k: int = 10
    strict: bool = False
    base_dir: Path = field(default=Path("."), compare=False, repr=False)

    def __post_init__(self):
        self.network_params()
        self.prestige_params()
        if self.grouping_level not in ("overall", "area", "specific_area"):
            raise ConfigError(f"unknown grouping_level {self.grouping_level!r}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.horizon < 1 or self.k < 1:
            raise ConfigError("horizon and k must be >= 1")

    def network_params(self):
        try:
            return NetworkParams(self.window_years, self.self_cite_cap, self.art_basis)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def prestige_params(self):
        try:
            return PrestigeParams(
                self.d, self.e, self.convergence_tol, self.max_iterations, self.c
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def path(self, key) -> Optional[Path]:
        raw = getattr(self, key)
        if raw is None:
            return None
        p = Path(raw)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def output_path(self):
        p = Path(self.output_dir)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def document_level(self):
        return self.journals is not None

    def to_dict(self):
        return {
            f.name: getattr(self, f.name)
            for f in fields(self)
            if f.name != "base_dir" and getattr(self, f.name) is not None
        }

    def with_overrides(self, **overrides):
        clean = {k: v for k, v in overrides.items() if v is not None}
        unknown = set(clean) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return replace(self, **clean)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def _coerce(cfg_fields, data, source):
    out = {}
    for key, value in data.items():
        if isinstance(value, dict):
            raise ConfigError(f"{source}: config must be flat, {key!r} is a table")
        if key not in cfg_fields:
            raise ConfigError(f"{source}: unknown config key {key!r}")
        kind = cfg_fields[key]
        if kind in ("float", float) and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        out[key] = value
    return out


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(errno.ENOENT, "config file not found", str(path))
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    types = {f.name: f.type for f in fields(RunConfig)}
    return RunConfig(base_dir=path.parent, **_coerce(types, data, path))


def _toml_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    return json.dumps(str(value), ensure_ascii=False)


def dump_config(config) -> str:
    return "".join(f"{k} = {_toml_value(v)}\n" for k, v in config.to_dict().items())


def save_config(config, path):
    Path(path).write_text(dump_config(config), encoding="utf-8")
