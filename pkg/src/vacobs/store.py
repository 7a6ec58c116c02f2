"""Single-file embedded store for ads, geo cache and run bookkeeping.

One sqlite database per deployment. Writes go through a single handle
guarded by a lock; analytics and the API open read-only handles, so many
readers can run alongside the (single) pipeline writer.
"""

from __future__ import annotations

import datetime as dt
import json
import sqlite3
import threading
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Iterator

from .geoloc import GeoResolution, ResolutionKind, ResolutionSource
from .ingest import ContractType, EmploymentMode, IngestReport, JobAd

_SCHEMA = """
CREATE TABLE IF NOT EXISTS ads (
    ad_id INTEGER PRIMARY KEY,
    title TEXT NOT NULL,
    description TEXT NOT NULL DEFAULT '',
    employer TEXT NOT NULL DEFAULT '',
    location_name TEXT NOT NULL DEFAULT '',
    posted_date TEXT NOT NULL,
    yearly_min_salary REAL,
    yearly_max_salary REAL,
    contract_type TEXT NOT NULL DEFAULT 'Unknown',
    employment_mode TEXT NOT NULL DEFAULT 'Unknown',
    label TEXT,
    region_code TEXT,
    resolution_kind TEXT,
    ingest_run_id TEXT
);
CREATE INDEX IF NOT EXISTS idx_ads_date ON ads(posted_date);
CREATE INDEX IF NOT EXISTS idx_ads_label ON ads(label);
CREATE INDEX IF NOT EXISTS idx_ads_region ON ads(region_code);

CREATE TABLE IF NOT EXISTS geo_cache (
    location_key TEXT PRIMARY KEY,
    payload TEXT NOT NULL
);

CREATE TABLE IF NOT EXISTS ingest_runs (
    run_id TEXT PRIMARY KEY,
    started_at TEXT NOT NULL,
    total_fetched INTEGER NOT NULL,
    null_records INTEGER NOT NULL,
    parse_failures INTEGER NOT NULL,
    cross_posts_removed INTEGER NOT NULL,
    retained INTEGER NOT NULL
);

CREATE TABLE IF NOT EXISTS model_meta (
    key TEXT PRIMARY KEY,
    value TEXT NOT NULL
);
"""


class StorageFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class QueryFilter:
    """Conjunction of optional clauses; an empty filter matches everything."""

    labels: frozenset[str] | None = None
    region_codes: frozenset[str] | None = None
    date_range: tuple[dt.date, dt.date] | None = None  # half-open [start, end)
    contract_types: frozenset[str] | None = None
    modes: frozenset[str] | None = None
    employer_excludes: frozenset[str] | None = None

    @classmethod
    def match_all(cls) -> "QueryFilter":
        return cls()

    def to_dict(self) -> dict:
        return {
            "labels": sorted(self.labels) if self.labels is not None else None,
            "region_codes": sorted(self.region_codes) if self.region_codes is not None else None,
            "date_range": [self.date_range[0].isoformat(), self.date_range[1].isoformat()]
            if self.date_range
            else None,
            "contract_types": sorted(self.contract_types) if self.contract_types else None,
            "modes": sorted(self.modes) if self.modes else None,
            "employer_excludes": sorted(self.employer_excludes) if self.employer_excludes else None,
        }


@dataclass(frozen=True)
class AdRecordRow:
    ad_id: int
    title: str
    description: str
    employer: str
    location_name: str
    posted_date: dt.date
    yearly_min_salary: float | None
    yearly_max_salary: float | None
    contract_type: str
    employment_mode: str
    label: str | None = None
    region_code: str | None = None
    resolution_kind: str | None = None
    ingest_run_id: str | None = None

    @classmethod
    def from_ad(
        cls,
        ad: JobAd,
        *,
        label: str | None = None,
        region_code: str | None = None,
        resolution_kind: str | None = None,
        ingest_run_id: str | None = None,
    ) -> "AdRecordRow":
        return cls(
            ad_id=ad.ad_id,
            title=ad.title,
            description=ad.description,
            employer=ad.employer,
            location_name=ad.location_name,
            posted_date=ad.posted_date,
            yearly_min_salary=ad.yearly_min_salary,
            yearly_max_salary=ad.yearly_max_salary,
            contract_type=ad.contract_type.value,
            employment_mode=ad.employment_mode.value,
            label=label,
            region_code=region_code,
            resolution_kind=resolution_kind,
            ingest_run_id=ingest_run_id,
        )

    def to_ad(self) -> JobAd:
        return JobAd(
            ad_id=self.ad_id,
            title=self.title,
            description=self.description,
            employer=self.employer,
            location_name=self.location_name,
            posted_date=self.posted_date,
            yearly_min_salary=self.yearly_min_salary,
            yearly_max_salary=self.yearly_max_salary,
            contract_type=ContractType(self.contract_type),
            employment_mode=EmploymentMode(self.employment_mode),
        )

    def to_json(self) -> str:
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data["posted_date"] = self.posted_date.isoformat()
        return json.dumps(data, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "AdRecordRow":
        data = json.loads(text)
        data["posted_date"] = dt.date.fromisoformat(data["posted_date"])
        return cls(**data)


def _filter_clauses(flt: QueryFilter) -> tuple[str, list]:
    clauses: list[str] = []
    params: list = []

    def add_set(column: str, values: frozenset[str] | None, negate: bool = False):
        if values is None:
            return
        placeholders = ",".join("?" for _ in values)
        op = "NOT IN" if negate else "IN"
        clauses.append(f"{column} {op} ({placeholders})")
        params.extend(sorted(values))

    add_set("label", flt.labels)
    add_set("region_code", flt.region_codes)
    add_set("contract_type", flt.contract_types)
    add_set("employment_mode", flt.modes)
    if flt.employer_excludes:
        add_set("employer", flt.employer_excludes, negate=True)
    if flt.date_range is not None:
        clauses.append("posted_date >= ? AND posted_date < ?")
        params.extend([flt.date_range[0].isoformat(), flt.date_range[1].isoformat()])
    where = " AND ".join(clauses) if clauses else "1=1"
    return where, params


class Store:
    def __init__(self, path: str | Path, *, read_only: bool = False):
        self.path = Path(path)
        self.read_only = read_only
        self._write_lock = threading.Lock()
        if read_only:
            uri = f"file:{self.path}?mode=ro"
            self._conn = sqlite3.connect(uri, uri=True, check_same_thread=False)
        else:
            self._conn = sqlite3.connect(self.path, check_same_thread=False)
            with self._conn:
                self._conn.executescript(_SCHEMA)
        self._conn.row_factory = sqlite3.Row

    def close(self) -> None:
        self._conn.close()

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # --- ads ---------------------------------------------------------------

    def upsert_ads(self, rows: Iterable[AdRecordRow]) -> int:
        """Insert or update by ad_id; returns the number of rows written."""
        if self.read_only:
            raise StorageFailure("store opened read-only")
        sql = """
            INSERT INTO ads (ad_id, title, description, employer, location_name,
                             posted_date, yearly_min_salary, yearly_max_salary,
                             contract_type, employment_mode, label, region_code,
                             resolution_kind, ingest_run_id)
            VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
            ON CONFLICT(ad_id) DO UPDATE SET
                title=excluded.title, description=excluded.description,
                employer=excluded.employer, location_name=excluded.location_name,
                posted_date=excluded.posted_date,
                yearly_min_salary=excluded.yearly_min_salary,
                yearly_max_salary=excluded.yearly_max_salary,
                contract_type=excluded.contract_type,
                employment_mode=excluded.employment_mode,
                label=excluded.label, region_code=excluded.region_code,
                resolution_kind=excluded.resolution_kind,
                ingest_run_id=excluded.ingest_run_id
        """
        count = 0
        try:
            with self._write_lock, self._conn:
                for row in rows:
                    self._conn.execute(
                        sql,
                        (
                            row.ad_id, row.title, row.description, row.employer,
                            row.location_name, row.posted_date.isoformat(),
                            row.yearly_min_salary, row.yearly_max_salary,
                            row.contract_type, row.employment_mode, row.label,
                            row.region_code, row.resolution_kind, row.ingest_run_id,
                        ),
                    )
                    count += 1
        except sqlite3.Error as exc:
            raise StorageFailure(str(exc)) from exc
        return count

    @staticmethod
    def _row_to_record(row: sqlite3.Row) -> AdRecordRow:
        return AdRecordRow(
            ad_id=row["ad_id"],
            title=row["title"],
            description=row["description"],
            employer=row["employer"],
            location_name=row["location_name"],
            posted_date=dt.date.fromisoformat(row["posted_date"]),
            yearly_min_salary=row["yearly_min_salary"],
            yearly_max_salary=row["yearly_max_salary"],
            contract_type=row["contract_type"],
            employment_mode=row["employment_mode"],
            label=row["label"],
            region_code=row["region_code"],
            resolution_kind=row["resolution_kind"],
            ingest_run_id=row["ingest_run_id"],
        )

    def query(self, flt: QueryFilter = QueryFilter()) -> Iterator[AdRecordRow]:
        """Stream rows matching the conjunction of filter clauses."""
        where, params = _filter_clauses(flt)
        cursor = self._conn.execute(
            f"SELECT * FROM ads WHERE {where} ORDER BY ad_id", params
        )
        for row in cursor:
            yield self._row_to_record(row)

    def count(self, flt: QueryFilter = QueryFilter()) -> int:
        where, params = _filter_clauses(flt)
        (n,) = self._conn.execute(f"SELECT COUNT(*) FROM ads WHERE {where}", params).fetchone()
        return int(n)

    def daily_counts(self, flt: QueryFilter = QueryFilter()) -> dict[dt.date, int]:
        where, params = _filter_clauses(flt)
        cursor = self._conn.execute(
            f"SELECT posted_date, COUNT(*) AS n FROM ads WHERE {where} GROUP BY posted_date",
            params,
        )
        return {dt.date.fromisoformat(row["posted_date"]): int(row["n"]) for row in cursor}

    def existing_ids(self, ad_ids: Iterable[int]) -> set[int]:
        ids = list(ad_ids)
        found: set[int] = set()
        for i in range(0, len(ids), 500):
            chunk = ids[i : i + 500]
            placeholders = ",".join("?" for _ in chunk)
            cursor = self._conn.execute(
                f"SELECT ad_id FROM ads WHERE ad_id IN ({placeholders})", chunk
            )
            found.update(r["ad_id"] for r in cursor)
        return found

    def set_labels(self, labels: Iterable[tuple[int, str]]) -> int:
        if self.read_only:
            raise StorageFailure("store opened read-only")
        count = 0
        with self._write_lock, self._conn:
            for ad_id, label in labels:
                self._conn.execute("UPDATE ads SET label = ? WHERE ad_id = ?", (label, ad_id))
                count += 1
        return count

    def set_geo(self, updates: Iterable[tuple[int, str | None, str]]) -> int:
        """Apply (ad_id, region_code, resolution_kind) updates."""
        if self.read_only:
            raise StorageFailure("store opened read-only")
        count = 0
        with self._write_lock, self._conn:
            for ad_id, region_code, kind in updates:
                self._conn.execute(
                    "UPDATE ads SET region_code = ?, resolution_kind = ? WHERE ad_id = ?",
                    (region_code, kind, ad_id),
                )
                count += 1
        return count

    # --- geo cache -----------------------------------------------------------

    def geo_cache(self) -> "SqliteGeoCache":
        return SqliteGeoCache(self)

    # --- runs and metadata -----------------------------------------------------

    def record_ingest_run(self, run_id: str, report: IngestReport) -> None:
        if self.read_only:
            raise StorageFailure("store opened read-only")
        with self._write_lock, self._conn:
            self._conn.execute(
                """INSERT OR REPLACE INTO ingest_runs
                   (run_id, started_at, total_fetched, null_records, parse_failures,
                    cross_posts_removed, retained)
                   VALUES (?, ?, ?, ?, ?, ?, ?)""",
                (
                    run_id,
                    dt.datetime.now(dt.timezone.utc).isoformat(),
                    report.total_fetched,
                    report.null_records,
                    report.parse_failures,
                    report.cross_posts_removed,
                    report.retained,
                ),
            )

    def set_meta(self, key: str, value: str) -> None:
        if self.read_only:
            raise StorageFailure("store opened read-only")
        with self._write_lock, self._conn:
            self._conn.execute(
                "INSERT OR REPLACE INTO model_meta (key, value) VALUES (?, ?)", (key, value)
            )

    def get_meta(self, key: str) -> str | None:
        row = self._conn.execute("SELECT value FROM model_meta WHERE key = ?", (key,)).fetchone()
        return row["value"] if row else None

    # --- bulk exchange ------------------------------------------------------------

    def export_ndjson(self, path: str | Path, flt: QueryFilter = QueryFilter()) -> int:
        count = 0
        with open(path, "w", encoding="utf-8") as fh:
            for row in self.query(flt):
                fh.write(row.to_json() + "\n")
                count += 1
        return count

    def import_ndjson(self, path: str | Path) -> int:
        rows = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rows.append(AdRecordRow.from_json(line))
        return self.upsert_ads(rows)


class SqliteGeoCache:
    """GeoCache over the store's geo_cache table (write-through)."""

    def __init__(self, store: Store):
        self._store = store

    def get(self, key: str) -> GeoResolution | None:
        row = self._store._conn.execute(
            "SELECT payload FROM geo_cache WHERE location_key = ?", (key,)
        ).fetchone()
        if row is None:
            return None
        data = json.loads(row["payload"])
        return GeoResolution(
            kind=ResolutionKind(data["kind"]),
            county_name=data.get("county_name"),
            point=tuple(data["point"]) if data.get("point") else None,
            bbox=tuple(data["bbox"]) if data.get("bbox") else None,
            source=ResolutionSource(data["source"]) if data.get("source") else None,
        )

    def put(self, key: str, resolution: GeoResolution) -> None:
        if resolution.transient:
            raise ValueError("transient failures must not be cached")
        payload = json.dumps(
            {
                "kind": resolution.kind.value,
                "county_name": resolution.county_name,
                "point": resolution.point,
                "bbox": resolution.bbox,
                "source": resolution.source.value if resolution.source else None,
            }
        )
        with self._store._write_lock, self._store._conn:
            self._store._conn.execute(
                "INSERT OR REPLACE INTO geo_cache (location_key, payload) VALUES (?, ?)",
                (key, payload),
            )
