"""Application configuration: file values overridden by CLI flags.

Precedence is flags > config file > built-in defaults. Paths left unset
fall back to the reference data bundled with the package.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .ingest import DEFAULT_BLOCKLIST


def data_path(name: str) -> Path:
    """Filesystem path of a bundled data file."""
    return Path(str(resources.files("vacobs.data").joinpath(name)))


@dataclass
class AppConfig:
    store_path: str = "vacobs.db"
    source: str = ""  # "live" or "fixture:<path>"
    live_base_url: str = ""
    model_path: str = "model.json"
    seeds_path: str = ""
    lemma_table_path: str = ""
    counties_path: str = ""
    gazetteer_path: str = ""
    regions_path: str = ""
    county_map_path: str = ""
    geocoder_url: str = ""
    blocklist: list[str] = field(default_factory=lambda: list(DEFAULT_BLOCKLIST))
    bind: str = "127.0.0.1:8080"
    cors_origins: list[str] = field(default_factory=lambda: ["*"])
    live_requests_per_second: float = 5.0
    geocoder_requests_per_second: float = 1.0
    retries: int = 3
    backoff_seconds: float = 1.0
    fetch_parallel: int = 1
    start_id: int | None = None
    end_id: int | None = None
    window_start: str = ""  # ISO date; empty means unbounded
    window_end: str = ""

    def resolved_path(self, attr: str, bundled: str) -> Path:
        value = getattr(self, attr)
        return Path(value) if value else data_path(bundled)

    def window(self) -> tuple[dt.date, dt.date] | None:
        if self.window_start and self.window_end:
            return (dt.date.fromisoformat(self.window_start), dt.date.fromisoformat(self.window_end))
        return None


def load_config(path: str | Path | None = None, **overrides) -> AppConfig:
    """Build an AppConfig from an optional JSON file plus overrides."""
    config = AppConfig()
    if path is not None:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        unknown = set(data) - {f.name for f in dataclasses.fields(AppConfig)}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for key, value in data.items():
            setattr(config, key, value)
    for key, value in overrides.items():
        if value is not None:
            setattr(config, key, value)
    return config
