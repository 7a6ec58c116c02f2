"""Read-only HTTP query API over a populated store.

Every endpoint echoes the effective filter, rejects unknown query
parameters outright, and opens its own read-only store handle so
concurrent requests never share sqlite state.
"""

from __future__ import annotations

import datetime as dt
import time
from pathlib import Path
from typing import Sequence

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import __version__
from .analytics import (
    ZeroBaseline,
    category_proportions,
    daily_counts,
    period_deficit,
    salary_distribution,
    top_terms_for,
)
from .classify import ALL_LABELS
from .config import data_path
from .geoloc import load_regions
from .store import QueryFilter, Store
from .textprep import LemmaTable, default_lemma_table, load_lemma_table

_FILTER_PARAMS = {"label", "region", "contract", "mode", "exclude_employer"}

MAX_LIMIT = 10_000
DEFAULT_LIMIT = 1_000


def _build_filter(
    label: list[str] | None,
    region: list[str] | None,
    contract: list[str] | None,
    mode: list[str] | None,
    exclude_employer: list[str] | None,
) -> QueryFilter:
    return QueryFilter(
        labels=frozenset(label) if label else None,
        region_codes=frozenset(region) if region else None,
        contract_types=frozenset(contract) if contract else None,
        modes=frozenset(mode) if mode else None,
        employer_excludes=frozenset(exclude_employer) if exclude_employer else None,
    )


def create_app(
    store_path: str | Path,
    *,
    cors_origins: Sequence[str] = ("*",),
    lemma_table_path: str | Path | None = None,
    regions_path: str | Path | None = None,
) -> FastAPI:
    store_path = Path(store_path)
    table: LemmaTable = (
        load_lemma_table(lemma_table_path) if lemma_table_path else default_lemma_table()
    )
    regions = load_regions(regions_path or data_path("nuts2_regions.geojson"))

    app = FastAPI(title="vacobs query API", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["GET"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def validation_to_400(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc.errors())})

    def open_store() -> Store:
        if not store_path.exists():
            raise HTTPException(status_code=500, detail=f"store not found: {store_path}")
        try:
            return Store(store_path, read_only=True)
        except Exception as exc:
            raise HTTPException(status_code=500, detail=f"storage failure: {exc}") from exc

    def reject_unknown_params(request: Request, allowed: set[str]) -> None:
        unknown = set(request.query_params.keys()) - allowed
        if unknown:
            raise HTTPException(
                status_code=400, detail=f"unknown query parameters: {sorted(unknown)}"
            )

    def timed(started: float) -> float:
        return round((time.perf_counter() - started) * 1000, 3)

    @app.get("/v1/series")
    def series(
        request: Request,
        from_: dt.date = Query(alias="from"),
        to: dt.date = Query(),
        label: list[str] | None = Query(None),
        region: list[str] | None = Query(None),
        contract: list[str] | None = Query(None),
        mode: list[str] | None = Query(None),
        exclude_employer: list[str] | None = Query(None),
        offset: int = 0,
        limit: int = DEFAULT_LIMIT,
    ):
        started = time.perf_counter()
        reject_unknown_params(request, _FILTER_PARAMS | {"from", "to", "offset", "limit"})
        if from_ > to:
            raise HTTPException(status_code=400, detail="'from' is after 'to'")
        if not 1 <= limit <= MAX_LIMIT:
            raise HTTPException(status_code=400, detail=f"limit must be in [1, {MAX_LIMIT}]")
        if offset < 0:
            raise HTTPException(status_code=400, detail="offset must be non-negative")
        flt = _build_filter(label, region, contract, mode, exclude_employer)
        with open_store() as store:
            result = daily_counts(store, flt, (from_, to))
        page = result.points[offset : offset + limit]
        return {
            "filter": flt.to_dict(),
            "from": from_.isoformat(),
            "to": to.isoformat(),
            "offset": offset,
            "limit": limit,
            "total_points": len(result.points),
            "points": [{"date": day.isoformat(), "count": count} for day, count in page],
            "timing_ms": timed(started),
        }

    @app.get("/v1/compare")
    def compare(
        request: Request,
        from_a: dt.date = Query(),
        to_a: dt.date = Query(),
        from_b: dt.date = Query(),
        to_b: dt.date = Query(),
        label: list[str] | None = Query(None),
        region: list[str] | None = Query(None),
        contract: list[str] | None = Query(None),
        mode: list[str] | None = Query(None),
        exclude_employer: list[str] | None = Query(None),
    ):
        started = time.perf_counter()
        reject_unknown_params(request, _FILTER_PARAMS | {"from_a", "to_a", "from_b", "to_b"})
        if from_a > to_a or from_b > to_b:
            raise HTTPException(status_code=400, detail="period start is after its end")
        flt = _build_filter(label, region, contract, mode, exclude_employer)
        with open_store() as store:
            try:
                cmp = period_deficit(store, flt, (from_a, to_a), (from_b, to_b))
            except ZeroBaseline as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {
            "filter": flt.to_dict(),
            "period_a": {"from": from_a.isoformat(), "to": to_a.isoformat(), "count": cmp.count_a},
            "period_b": {"from": from_b.isoformat(), "to": to_b.isoformat(), "count": cmp.count_b},
            "deficit_fraction": cmp.deficit_fraction,
            "timing_ms": timed(started),
        }

    @app.get("/v1/salary")
    def salary(
        request: Request,
        from_: dt.date | None = Query(None, alias="from"),
        to: dt.date | None = Query(None),
        label: list[str] | None = Query(None),
        region: list[str] | None = Query(None),
        contract: list[str] | None = Query(None),
        mode: list[str] | None = Query(None),
        exclude_employer: list[str] | None = Query(None),
        bucket_width: int = 2000,
    ):
        started = time.perf_counter()
        reject_unknown_params(request, _FILTER_PARAMS | {"from", "to", "bucket_width"})
        if bucket_width < 1:
            raise HTTPException(status_code=400, detail="bucket_width must be positive")
        flt = _build_filter(label, region, contract, mode, exclude_employer)
        if from_ is not None and to is not None:
            if from_ > to:
                raise HTTPException(status_code=400, detail="'from' is after 'to'")
            flt = QueryFilter(
                labels=flt.labels,
                region_codes=flt.region_codes,
                date_range=(from_, to),
                contract_types=flt.contract_types,
                modes=flt.modes,
                employer_excludes=flt.employer_excludes,
            )
        with open_store() as store:
            dist = salary_distribution(store, flt)
        buckets = []
        if dist.values:
            low = int(dist.values[0] // bucket_width) * bucket_width
            high = int(dist.values[-1] // bucket_width) * bucket_width + bucket_width
            edges = range(low, high + 1, bucket_width)
            counts = {edge: 0 for edge in edges}
            for value in dist.values:
                counts[int(value // bucket_width) * bucket_width] += 1
            buckets = [
                {"lo": edge, "hi": edge + bucket_width, "count": counts[edge]}
                for edge in edges
                if counts.get(edge)
            ]
        return {
            "filter": flt.to_dict(),
            "count": len(dist.values),
            "excluded_missing_salary": dist.excluded_count,
            "mean": dist.mean,
            "median": dist.median,
            "buckets": buckets,
            "timing_ms": timed(started),
        }

    @app.get("/v1/proportions")
    def proportions(
        request: Request,
        axis: str = Query(),
        from_: dt.date | None = Query(None, alias="from"),
        to: dt.date | None = Query(None),
        label: list[str] | None = Query(None),
        region: list[str] | None = Query(None),
        exclude_employer: list[str] | None = Query(None),
    ):
        started = time.perf_counter()
        reject_unknown_params(request, {"axis", "from", "to", "label", "region", "exclude_employer"})
        if axis not in ("contract", "mode"):
            raise HTTPException(status_code=400, detail="axis must be 'contract' or 'mode'")
        flt = _build_filter(label, region, None, None, exclude_employer)
        if from_ is not None and to is not None:
            flt = QueryFilter(
                labels=flt.labels,
                region_codes=flt.region_codes,
                date_range=(from_, to),
                employer_excludes=flt.employer_excludes,
            )
        with open_store() as store:
            dist = category_proportions(store, flt, axis)
        return {
            "filter": flt.to_dict(),
            "axis": axis,
            "counts": dist.categories,
            "proportions": dist.proportions,
            "unknown_count": dist.unknown_count,
            "total": dist.total,
            "timing_ms": timed(started),
        }

    @app.get("/v1/top-terms")
    def top_terms_endpoint(
        request: Request,
        n: int = 20,
        scope: str = "titles_only",
        from_: dt.date | None = Query(None, alias="from"),
        to: dt.date | None = Query(None),
        label: list[str] | None = Query(None),
        region: list[str] | None = Query(None),
        contract: list[str] | None = Query(None),
        mode: list[str] | None = Query(None),
        exclude_employer: list[str] | None = Query(None),
    ):
        started = time.perf_counter()
        reject_unknown_params(request, _FILTER_PARAMS | {"n", "scope", "from", "to"})
        if not 1 <= n <= 500:
            raise HTTPException(status_code=400, detail="n must be in [1, 500]")
        if scope not in ("titles_only", "full"):
            raise HTTPException(status_code=400, detail="scope must be 'titles_only' or 'full'")
        flt = _build_filter(label, region, contract, mode, exclude_employer)
        if from_ is not None and to is not None:
            flt = QueryFilter(
                labels=flt.labels,
                region_codes=flt.region_codes,
                date_range=(from_, to),
                contract_types=flt.contract_types,
                modes=flt.modes,
                employer_excludes=flt.employer_excludes,
            )
        with open_store() as store:
            terms = top_terms_for(store, flt, n, scope, table)
        return {
            "filter": flt.to_dict(),
            "n": n,
            "scope": scope,
            "terms": [{"term": term, "count": count} for term, count in terms],
            "timing_ms": timed(started),
        }

    @app.get("/v1/meta")
    def meta(request: Request):
        started = time.perf_counter()
        reject_unknown_params(request, set())
        with open_store() as store:
            by_day = store.daily_counts()
        days = sorted(by_day)
        return {
            "labels": list(ALL_LABELS),
            "regions": [
                {"code": r.code, "name": r.name, "population": r.population} for r in regions
            ],
            "date_range": [days[0].isoformat(), days[-1].isoformat()] if days else None,
            "total_ads": sum(by_day.values()),
            "timing_ms": timed(started),
        }

    return app
