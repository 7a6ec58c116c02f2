"""End-to-end orchestration: ingest, classify, geolocate, persist.

Re-runs are idempotent: ids already in the store are not fetched again,
and a coarse lock file keeps concurrent pipeline runs (the only writers)
from interleaving.
"""

from __future__ import annotations

import datetime as dt
import os
import uuid
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .classify import ClassifierBundle
from .geoloc import (
    Gazetteer,
    GeoCache,
    GeoResolution,
    Region,
    RemoteGeocoder,
    ResolutionKind,
    assign_region,
    resolve,
)
from .ingest import (
    AdSource,
    IngestReport,
    JobAd,
    fetch_range,
    filter_cross_posts,
    is_null_record,
    parse_ad,
    ParseError,
)
from .store import AdRecordRow, Store
from .textprep import LemmaTable, build_document


class PipelineLocked(RuntimeError):
    """Another pipeline run holds the store's write lock."""


@contextmanager
def run_lock(store_path: str | Path):
    lock_path = Path(str(store_path) + ".lock")
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise PipelineLocked(f"lock file {lock_path} exists; another run in progress?")
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        lock_path.unlink(missing_ok=True)


@dataclass
class PipelineResult:
    run_id: str
    report: IngestReport
    skipped_existing: int
    classified: int
    geo_resolved: int
    geo_unresolved: int
    coverage: float | None
    rows_written: int


def _missing_runs(start_id: int, end_id: int, existing: set[int]) -> list[tuple[int, int]]:
    """Consecutive [start, end) runs of ids not yet in the store."""
    runs: list[tuple[int, int]] = []
    run_start: int | None = None
    for ad_id in range(start_id, end_id):
        if ad_id in existing:
            if run_start is not None:
                runs.append((run_start, ad_id))
                run_start = None
        elif run_start is None:
            run_start = ad_id
    if run_start is not None:
        runs.append((run_start, end_id))
    return runs


def run_pipeline(
    store: Store,
    source: AdSource,
    bundle: ClassifierBundle,
    table: LemmaTable,
    counties: Mapping[str, str],
    gazetteer: Gazetteer,
    geocoder: RemoteGeocoder | None,
    regions: Sequence[Region],
    county_map: Mapping[str, str],
    start_id: int,
    end_id: int,
    *,
    blocklist: Iterable[str] = (),
    window: tuple[dt.date, dt.date] | None = None,
    cache: GeoCache | None = None,
    parallel: int = 1,
    run_id: str | None = None,
) -> PipelineResult:
    """Run every stage over [start_id, end_id) and upsert the results."""
    run_id = run_id or uuid.uuid4().hex[:12]
    cache = cache if cache is not None else store.geo_cache()

    existing = store.existing_ids(range(start_id, end_id))
    report = IngestReport()
    ads: list[JobAd] = []
    for run_start, run_end in _missing_runs(start_id, end_id, existing):
        for record in fetch_range(source, run_start, run_end, parallel=parallel):
            report.total_fetched += 1
            if record.fetch_failed:
                report.parse_failures += 1
                continue
            if is_null_record(record):
                report.null_records += 1
                continue
            try:
                ads.append(parse_ad(record, window=window))
            except ParseError:
                report.parse_failures += 1

    retained, removed = filter_cross_posts(ads, blocklist)
    report.cross_posts_removed = removed
    report.retained = len(retained)

    rows: list[AdRecordRow] = []
    geo_resolved = 0
    geo_unresolved = 0
    for ad in retained:
        doc = build_document(ad, table)
        label = bundle.classify(doc)
        if ad.location_name.strip():
            resolution = resolve(ad.location_name, counties, gazetteer, geocoder, cache)
        else:
            resolution = GeoResolution.unresolved()
        region_code: str | None = None
        if resolution.resolved:
            geo_resolved += 1
            region = assign_region(resolution, regions, county_map)
            region_code = region.code if region else None
        else:
            geo_unresolved += 1
        rows.append(
            AdRecordRow.from_ad(
                ad,
                label=label,
                region_code=region_code,
                resolution_kind=resolution.kind.value,
                ingest_run_id=run_id,
            )
        )

    written = store.upsert_ads(rows)
    store.record_ingest_run(run_id, report)
    attempted = geo_resolved + geo_unresolved
    return PipelineResult(
        run_id=run_id,
        report=report,
        skipped_existing=len(existing),
        classified=len(rows),
        geo_resolved=geo_resolved,
        geo_unresolved=geo_unresolved,
        coverage=(geo_resolved / attempted) if attempted else None,
        rows_written=written,
    )
