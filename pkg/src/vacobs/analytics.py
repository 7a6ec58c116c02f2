"""Quantitative outputs: daily series, period deficits, distributions.

Everything here is a pure function over a store snapshot, so analytics
queries can run concurrently against read-only handles.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .geoloc import Region
from .ingest import ContractType, EmploymentMode
from .store import QueryFilter, Store
from .textprep import LemmaTable, build_document
from .tfidf import top_terms

UNKNOWN = "Unknown"


class ZeroBaseline(ValueError):
    pass


class MissingPopulation(ValueError):
    pass


@dataclass(frozen=True)
class DailySeries:
    filter: QueryFilter
    points: tuple[tuple[dt.date, int], ...]

    def counts(self) -> list[int]:
        return [count for _, count in self.points]


@dataclass(frozen=True)
class PeriodComparison:
    period_a: tuple[dt.date, dt.date]
    period_b: tuple[dt.date, dt.date]
    count_a: int
    count_b: int
    deficit_fraction: float


@dataclass(frozen=True)
class Distribution:
    values: tuple[float, ...] = ()
    categories: dict[str, int] | None = None
    proportions: dict[str, float] | None = None
    mean: float | None = None
    median: float | None = None
    unknown_count: int = 0
    excluded_count: int = 0
    total: int = 0


def _iter_days(start: dt.date, end: dt.date) -> Iterable[dt.date]:
    day = start
    while day < end:
        yield day
        day += dt.timedelta(days=1)


def daily_counts(
    store: Store,
    flt: QueryFilter,
    date_range: tuple[dt.date, dt.date],
) -> DailySeries:
    """Per-day ad counts over [start, end), zero-filled for missing days."""
    start, end = date_range
    if start > end:
        raise ValueError("date range start exceeds end")
    scoped = QueryFilter(
        labels=flt.labels,
        region_codes=flt.region_codes,
        date_range=(start, end),
        contract_types=flt.contract_types,
        modes=flt.modes,
        employer_excludes=flt.employer_excludes,
    )
    by_day = store.daily_counts(scoped)
    points = tuple((day, by_day.get(day, 0)) for day in _iter_days(start, end))
    return DailySeries(filter=flt, points=points)


def compare_counts(
    period_a: tuple[dt.date, dt.date],
    period_b: tuple[dt.date, dt.date],
    count_a: int,
    count_b: int,
) -> PeriodComparison:
    """Deficit of period b relative to period a: (a - b) / a."""
    if count_a <= 0:
        raise ZeroBaseline("baseline period has no ads")
    deficit = (count_a - count_b) / count_a
    return PeriodComparison(
        period_a=period_a,
        period_b=period_b,
        count_a=count_a,
        count_b=count_b,
        deficit_fraction=deficit,
    )


def period_deficit(
    store: Store,
    flt: QueryFilter,
    period_a: tuple[dt.date, dt.date],
    period_b: tuple[dt.date, dt.date],
) -> PeriodComparison:
    def count_in(period: tuple[dt.date, dt.date]) -> int:
        scoped = QueryFilter(
            labels=flt.labels,
            region_codes=flt.region_codes,
            date_range=period,
            contract_types=flt.contract_types,
            modes=flt.modes,
            employer_excludes=flt.employer_excludes,
        )
        return store.count(scoped)

    return compare_counts(period_a, period_b, count_in(period_a), count_in(period_b))


def per_capita(
    region_counts: Mapping[str, int],
    regions: Sequence[Region],
) -> dict[str, float]:
    """Ads per person for each region present in region_counts."""
    by_code = {region.code: region for region in regions}
    out: dict[str, float] = {}
    for code, count in region_counts.items():
        region = by_code.get(code)
        if region is None or region.population <= 0:
            raise MissingPopulation(f"no population for region {code!r}")
        out[code] = count / region.population
    return out


def category_proportions(store: Store, flt: QueryFilter, axis: str) -> Distribution:
    """Contract-type or employment-mode proportions over non-Unknown ads."""
    if axis == "contract":
        known = [c.value for c in ContractType if c is not ContractType.UNKNOWN]
        column = "contract_type"
    elif axis == "mode":
        known = [m.value for m in EmploymentMode if m is not EmploymentMode.UNKNOWN]
        column = "employment_mode"
    else:
        raise ValueError(f"unknown axis: {axis}")
    counts = {name: 0 for name in known}
    unknown = 0
    total = 0
    for row in store.query(flt):
        value = getattr(row, column)
        total += 1
        if value == UNKNOWN:
            unknown += 1
        else:
            counts[value] = counts.get(value, 0) + 1
    known_total = total - unknown
    proportions = {
        name: (count / known_total if known_total else 0.0) for name, count in counts.items()
    }
    return Distribution(
        categories=counts,
        proportions=proportions,
        unknown_count=unknown,
        total=total,
    )


def _median(sorted_values: Sequence[float]) -> float:
    n = len(sorted_values)
    mid = n // 2
    if n % 2 == 1:
        return sorted_values[mid]
    return (sorted_values[mid - 1] + sorted_values[mid]) / 2.0


def salary_distribution(store: Store, flt: QueryFilter) -> Distribution:
    """Yearly minimum salaries for matching ads; ads without one are
    excluded and counted."""
    values: list[float] = []
    excluded = 0
    total = 0
    for row in store.query(flt):
        total += 1
        if row.yearly_min_salary is None:
            excluded += 1
        else:
            values.append(float(row.yearly_min_salary))
    values.sort()
    mean = sum(values) / len(values) if values else None
    median = _median(values) if values else None
    return Distribution(
        values=tuple(values),
        mean=mean,
        median=median,
        excluded_count=excluded,
        total=total,
    )


def top_terms_for(
    store: Store,
    flt: QueryFilter,
    n: int,
    scope: str,
    table: LemmaTable,
) -> list[tuple[str, int]]:
    """Ranked terms over the documents of matching ads."""
    docs = [build_document(row.to_ad(), table) for row in store.query(flt)]
    return top_terms(docs, n, scope)
