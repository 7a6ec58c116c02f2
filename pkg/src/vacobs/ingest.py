"""Ad ingestion: sequential-ID sources, record parsing and cross-post removal.

Ads arrive from either a live HTTP job-board API or a newline-delimited
JSON replay fixture; both implement the same fetch-by-id contract so the
rest of the pipeline never knows which one it is talking to.
"""

from __future__ import annotations

import datetime as dt
import json
import os
import re
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Iterator, Protocol, Sequence

import requests

from .netutil import TokenBucket, TransientFailure, retry_call

API_KEY_ENV = "VACOBS_API_KEY"

# Employers whose ads are mirrored from other job boards in bulk; their
# posting spikes swamp the daily series, so they are dropped on ingest.
DEFAULT_BLOCKLIST = (
    "DWP Teaching",
    "Department of Work & Pensions",
    "NHS Business Services Authority",
)

WIRE_FIELDS = (
    "jobTitle",
    "jobDescription",
    "employerName",
    "locationName",
    "date",
    "minimumSalary",
    "maximumSalary",
    "currency",
    "fullTime",
    "partTime",
    "temporary",
    "permanent",
    "contract",
)

_WS_RE = re.compile(r"\s+")


class SourceUnavailable(RuntimeError):
    """The ad source could not be reached even after retries."""


class FixtureCorrupt(RuntimeError):
    """The replay fixture file is unreadable or malformed."""


class ParseError(ValueError):
    pass


class MissingTitle(ParseError):
    pass


class BadDate(ParseError):
    pass


class ContractType(str, Enum):
    TEMPORARY = "Temporary"
    PERMANENT = "Permanent"
    CONTRACT = "Contract"
    UNKNOWN = "Unknown"


class EmploymentMode(str, Enum):
    FULL_TIME = "FullTime"
    PART_TIME = "PartTime"
    BOTH = "Both"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class RawAdRecord:
    """One raw record from the source; payload values may all be null."""

    ad_id: int
    payload: dict
    fetch_failed: bool = False


@dataclass(frozen=True)
class JobAd:
    ad_id: int
    title: str
    description: str
    employer: str
    location_name: str
    posted_date: dt.date
    yearly_min_salary: float | None
    yearly_max_salary: float | None
    contract_type: ContractType
    employment_mode: EmploymentMode


@dataclass
class IngestReport:
    total_fetched: int = 0
    null_records: int = 0
    parse_failures: int = 0
    cross_posts_removed: int = 0
    retained: int = 0

    def conservation_holds(self) -> bool:
        return self.retained == (
            self.total_fetched - self.null_records - self.parse_failures - self.cross_posts_removed
        )


class AdSource(Protocol):
    def fetch(self, ad_id: int) -> dict:
        """Return the raw payload for one ad id (never including the id)."""
        ...


class FixtureSource:
    """Replay source over a newline-delimited JSON file keyed by jobId.

    Ids absent from the file behave like deleted ads: an empty payload,
    which is a null record by definition.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._records: dict[int, dict] = {}
        try:
            with open(self.path, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    try:
                        obj = json.loads(line)
                    except json.JSONDecodeError as exc:
                        raise FixtureCorrupt(f"{self.path}:{lineno}: {exc}") from exc
                    if not isinstance(obj, dict) or "jobId" not in obj:
                        raise FixtureCorrupt(f"{self.path}:{lineno}: record missing jobId")
                    payload = {k: v for k, v in obj.items() if k != "jobId"}
                    self._records[int(obj["jobId"])] = payload
        except OSError as exc:
            raise FixtureCorrupt(f"cannot read fixture {self.path}: {exc}") from exc

    def fetch(self, ad_id: int) -> dict:
        return dict(self._records.get(ad_id, {}))


class LiveSource:
    """HTTP client for the job-board API: one GET per sequential ad id.

    Authenticates with the key from VACOBS_API_KEY (HTTP basic auth,
    key as username), rate limits itself and retries transient failures
    with exponential backoff.
    """

    def __init__(
        self,
        base_url: str,
        api_key: str | None = None,
        *,
        requests_per_second: float = 5.0,
        retries: int = 3,
        backoff: float = 1.0,
        timeout: float = 30.0,
        session: requests.Session | None = None,
        sleep: Callable[[float], None] | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout
        self.session = session or requests.Session()
        self._sleep = sleep or __import__("time").sleep
        self._bucket = TokenBucket(requests_per_second, sleep=self._sleep)

    def _get(self, ad_id: int) -> dict:
        self._bucket.acquire()
        try:
            resp = self.session.get(
                f"{self.base_url}/{ad_id}",
                auth=(self.api_key, ""),
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise TransientFailure(str(exc)) from exc
        if resp.status_code in (429,) or resp.status_code >= 500:
            raise TransientFailure(f"HTTP {resp.status_code} for ad {ad_id}")
        if resp.status_code in (404, 410):
            # Deleted ads: the API's all-null shape, normalized to empty.
            return {}
        if resp.status_code != 200:
            raise PermanentFetchFailure(f"HTTP {resp.status_code} for ad {ad_id}")
        try:
            obj = resp.json()
        except ValueError as exc:
            raise PermanentFetchFailure(f"bad JSON for ad {ad_id}: {exc}") from exc
        if not isinstance(obj, dict):
            raise PermanentFetchFailure(f"unexpected body shape for ad {ad_id}")
        return {k: v for k, v in obj.items() if k != "jobId"}

    def fetch(self, ad_id: int) -> dict:
        try:
            return retry_call(
                lambda: self._get(ad_id),
                attempts=self.retries,
                base_delay=self.backoff,
                sleep=self._sleep,
            )
        except TransientFailure as exc:
            raise SourceUnavailable(f"ad source unreachable after {self.retries} attempts: {exc}") from exc


class PermanentFetchFailure(RuntimeError):
    """A non-retryable per-id failure; surfaces as a fetch-failed record."""


def fetch_range(
    source: AdSource,
    start_id: int,
    end_id: int,
    *,
    parallel: int = 1,
) -> Iterator[RawAdRecord]:
    """Yield one RawAdRecord per id in [start_id, end_id), in id order.

    Permanent per-id failures become records flagged fetch_failed rather
    than being skipped. With parallel > 1 a bounded window of requests is
    issued concurrently, but records are still delivered in order.
    """
    if start_id > end_id:
        raise ValueError("start_id must not exceed end_id")

    def fetch_one(ad_id: int) -> RawAdRecord:
        try:
            return RawAdRecord(ad_id=ad_id, payload=source.fetch(ad_id))
        except PermanentFetchFailure:
            return RawAdRecord(ad_id=ad_id, payload={}, fetch_failed=True)

    if parallel <= 1:
        for ad_id in range(start_id, end_id):
            yield fetch_one(ad_id)
        return

    ids = range(start_id, end_id)
    with ThreadPoolExecutor(max_workers=parallel) as pool:
        pending = []
        it = iter(ids)
        for ad_id in it:
            pending.append(pool.submit(fetch_one, ad_id))
            if len(pending) >= parallel:
                break
        next_ids = it
        while pending:
            done = pending.pop(0)
            record = done.result()
            try:
                nxt = next(next_ids)
                pending.append(pool.submit(fetch_one, nxt))
            except StopIteration:
                pass
            yield record


def is_null_record(record: RawAdRecord) -> bool:
    """True iff every payload value is absent (empty payloads count)."""
    return all(v is None for v in record.payload.values())


def _parse_date(value: object) -> dt.date:
    if isinstance(value, str):
        text = value.strip()
        for fmt in ("%d/%m/%Y", "%Y-%m-%d"):
            try:
                return dt.datetime.strptime(text, fmt).date()
            except ValueError:
                continue
    raise BadDate(f"unparseable date: {value!r}")


def _parse_salary(value: object) -> float | None:
    if value is None:
        return None
    try:
        return float(value)
    except (TypeError, ValueError):
        return None


def parse_ad(record: RawAdRecord, *, window: tuple[dt.date, dt.date] | None = None) -> JobAd:
    """Turn a non-null raw record into a JobAd.

    Absent contract/mode flags resolve to Unknown; salaries propagate
    nulls; non-GBP salaries are dropped. When a collection window is
    given, dates outside it raise BadDate.
    """
    payload = record.payload
    title = (payload.get("jobTitle") or "").strip()
    if not title:
        raise MissingTitle(f"ad {record.ad_id} has no title")
    date = _parse_date(payload.get("date"))
    if window is not None and not (window[0] <= date < window[1]):
        raise BadDate(f"ad {record.ad_id} dated {date} outside collection window")

    currency = payload.get("currency")
    if currency not in (None, "", "GBP"):
        min_salary = max_salary = None
    else:
        min_salary = _parse_salary(payload.get("minimumSalary"))
        max_salary = _parse_salary(payload.get("maximumSalary"))
    if min_salary is not None and max_salary is not None and min_salary > max_salary:
        min_salary, max_salary = max_salary, min_salary

    full_time = bool(payload.get("fullTime"))
    part_time = bool(payload.get("partTime"))
    if full_time and part_time:
        mode = EmploymentMode.BOTH
    elif full_time:
        mode = EmploymentMode.FULL_TIME
    elif part_time:
        mode = EmploymentMode.PART_TIME
    else:
        mode = EmploymentMode.UNKNOWN

    if payload.get("temporary"):
        contract = ContractType.TEMPORARY
    elif payload.get("permanent"):
        contract = ContractType.PERMANENT
    elif payload.get("contract"):
        contract = ContractType.CONTRACT
    else:
        contract = ContractType.UNKNOWN

    return JobAd(
        ad_id=record.ad_id,
        title=title,
        description=str(payload.get("jobDescription") or ""),
        employer=str(payload.get("employerName") or ""),
        location_name=str(payload.get("locationName") or ""),
        posted_date=date,
        yearly_min_salary=min_salary,
        yearly_max_salary=max_salary,
        contract_type=contract,
        employment_mode=mode,
    )


def normalize_employer(name: str) -> str:
    return _WS_RE.sub(" ", name.strip()).casefold()


def filter_cross_posts(
    ads: Sequence[JobAd] | Iterable[JobAd],
    blocklist: Iterable[str] = DEFAULT_BLOCKLIST,
) -> tuple[list[JobAd], int]:
    """Drop ads whose normalized employer is on the blocklist.

    Matching is case-insensitive and whitespace-collapsed; input order
    is preserved. Returns (retained, removed_count).
    """
    blocked = {normalize_employer(b) for b in blocklist}
    retained: list[JobAd] = []
    removed = 0
    for ad in ads:
        if normalize_employer(ad.employer) in blocked:
            removed += 1
        else:
            retained.append(ad)
    return retained, removed
