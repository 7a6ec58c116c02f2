"""Location inference: county list, gazetteer, cached remote geocoder.

Free-text location strings resolve through three stages tried strictly in
order; every remote answer (including definitive misses) is written
through to a cache keyed by the normalized string so a location is never
geocoded remotely twice. Resolved ads are then assigned to statistical
regions by point-in-polygon, with all London regions merged into one
Greater London region.
"""

from __future__ import annotations

import dataclasses
import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Mapping, Protocol, Sequence

import requests

from .netutil import TokenBucket, TransientFailure, retry_call

GREATER_LONDON_CODE = "UKI"
GREATER_LONDON_NAME = "Greater London"

_WS_RE = re.compile(r"\s+")


class ResolutionKind(str, Enum):
    COUNTY = "County"
    POINT = "Point"
    BOUNDING_BOX = "BoundingBox"
    UNRESOLVED = "Unresolved"


class ResolutionSource(str, Enum):
    COUNTY_LIST = "CountyList"
    GAZETTEER = "Gazetteer"
    REMOTE_GEOCODER = "RemoteGeocoder"
    CACHE = "Cache"


class GeocoderUnavailable(RuntimeError):
    """The remote geocoder failed transiently; the miss must not be cached."""


@dataclass(frozen=True)
class GeoResolution:
    kind: ResolutionKind
    county_name: str | None = None
    point: tuple[float, float] | None = None  # (lat, lon), WGS84
    bbox: tuple[float, float, float, float] | None = None  # min_lat, min_lon, max_lat, max_lon
    source: ResolutionSource | None = None
    transient: bool = False

    def __post_init__(self):
        expected = {
            ResolutionKind.COUNTY: (self.county_name is not None, self.point is None, self.bbox is None),
            ResolutionKind.POINT: (self.county_name is None, self.point is not None, self.bbox is None),
            ResolutionKind.BOUNDING_BOX: (self.county_name is None, self.point is None, self.bbox is not None),
            ResolutionKind.UNRESOLVED: (self.county_name is None, self.point is None, self.bbox is None),
        }[self.kind]
        if not all(expected):
            raise ValueError(f"fields inconsistent with kind {self.kind}")
        if self.bbox is not None:
            min_lat, min_lon, max_lat, max_lon = self.bbox
            if min_lat > max_lat or min_lon > max_lon:
                raise ValueError("bounding box is not well-ordered")
        if self.transient and self.kind is not ResolutionKind.UNRESOLVED:
            raise ValueError("only unresolved results can be transient")

    @property
    def resolved(self) -> bool:
        return self.kind is not ResolutionKind.UNRESOLVED

    def centroid(self) -> tuple[float, float]:
        if self.point is not None:
            return self.point
        if self.bbox is not None:
            min_lat, min_lon, max_lat, max_lon = self.bbox
            return ((min_lat + max_lat) / 2.0, (min_lon + max_lon) / 2.0)
        raise ValueError(f"{self.kind} resolution has no coordinates")

    @classmethod
    def county(cls, name: str, source: ResolutionSource = ResolutionSource.COUNTY_LIST):
        return cls(kind=ResolutionKind.COUNTY, county_name=name, source=source)

    @classmethod
    def at_point(cls, lat: float, lon: float, source: ResolutionSource):
        return cls(kind=ResolutionKind.POINT, point=(lat, lon), source=source)

    @classmethod
    def bounding_box(cls, bbox: tuple[float, float, float, float], source: ResolutionSource):
        return cls(kind=ResolutionKind.BOUNDING_BOX, bbox=bbox, source=source)

    @classmethod
    def unresolved(cls, source: ResolutionSource | None = None, transient: bool = False):
        return cls(kind=ResolutionKind.UNRESOLVED, source=source, transient=transient)


def normalize_location(raw: str) -> str:
    return _WS_RE.sub(" ", raw.strip()).casefold()


def load_county_list(path: str | Path) -> dict[str, str]:
    """County file: one name per line. Returns normalized -> canonical."""
    counties: dict[str, str] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        name = line.strip()
        if name and not name.startswith("#"):
            counties[normalize_location(name)] = name
    return counties


class Gazetteer:
    """Local place-name lookup from tab-delimited name/lat/lon/country rows.

    Only UK rows (country GB or UK) are kept, matching the corpus.
    """

    def __init__(self, entries: Mapping[str, tuple[float, float]]):
        self._entries = dict(entries)

    @classmethod
    def from_file(cls, path: str | Path) -> "Gazetteer":
        entries: dict[str, tuple[float, float]] = {}
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 tab-separated fields")
            name, lat, lon, country = parts
            if country.strip().upper() not in ("GB", "UK"):
                continue
            key = normalize_location(name)
            entries.setdefault(key, (float(lat), float(lon)))
        return cls(entries)

    def lookup(self, normalized_name: str) -> tuple[float, float] | None:
        return self._entries.get(normalized_name)

    def __len__(self) -> int:
        return len(self._entries)


class GeoCache(Protocol):
    def get(self, key: str) -> GeoResolution | None: ...
    def put(self, key: str, resolution: GeoResolution) -> None: ...


class InMemoryGeoCache:
    def __init__(self):
        self._entries: dict[str, GeoResolution] = {}

    def get(self, key: str) -> GeoResolution | None:
        return self._entries.get(key)

    def put(self, key: str, resolution: GeoResolution) -> None:
        if resolution.transient:
            raise ValueError("transient failures must not be cached")
        self._entries[key] = resolution

    def __len__(self) -> int:
        return len(self._entries)


class RemoteGeocoder:
    """Client for an HTTP search endpoint returning candidate locations.

    The endpoint takes ``?q=<query>`` and returns a JSON list of
    candidates with ``lat``/``lon`` and optionally ``boundingbox`` as
    [min_lat, max_lat, min_lon, max_lon]. The first candidate wins; an
    empty list is a definitive miss (returned as None).
    """

    def __init__(
        self,
        base_url: str,
        *,
        requests_per_second: float = 1.0,
        retries: int = 3,
        backoff: float = 1.0,
        timeout: float = 30.0,
        session: requests.Session | None = None,
        sleep: Callable[[float], None] | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout
        self.session = session or requests.Session()
        self._sleep = sleep or __import__("time").sleep
        self._bucket = TokenBucket(requests_per_second, sleep=self._sleep)

    def _get(self, query: str) -> GeoResolution | None:
        self._bucket.acquire()
        try:
            resp = self.session.get(
                f"{self.base_url}/search",
                params={"q": query, "format": "json"},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise TransientFailure(str(exc)) from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransientFailure(f"HTTP {resp.status_code} from geocoder")
        if resp.status_code != 200:
            raise GeocoderUnavailable(f"geocoder returned HTTP {resp.status_code}")
        try:
            candidates = resp.json()
        except ValueError as exc:
            raise GeocoderUnavailable(f"geocoder returned bad JSON: {exc}") from exc
        if not candidates:
            return None
        first = candidates[0]
        if "lat" in first and "lon" in first and first["lat"] is not None:
            return GeoResolution.at_point(
                float(first["lat"]), float(first["lon"]), ResolutionSource.REMOTE_GEOCODER
            )
        box = first.get("boundingbox")
        if box and len(box) == 4:
            min_lat, max_lat, min_lon, max_lon = (float(v) for v in box)
            return GeoResolution.bounding_box(
                (min_lat, min_lon, max_lat, max_lon), ResolutionSource.REMOTE_GEOCODER
            )
        return None

    def search(self, query: str) -> GeoResolution | None:
        try:
            return retry_call(
                lambda: self._get(query),
                attempts=self.retries,
                base_delay=self.backoff,
                sleep=self._sleep,
            )
        except TransientFailure as exc:
            raise GeocoderUnavailable(str(exc)) from exc


def resolve(
    location_name: str,
    counties: Mapping[str, str],
    gazetteer: Gazetteer,
    geocoder: RemoteGeocoder | None,
    cache: GeoCache,
) -> GeoResolution:
    """Run the three-stage cascade for one location string.

    Stage order is strict: county list, then gazetteer, then cache
    backed by the remote geocoder. Definitive remote answers (hits and
    misses alike) are written through to the cache; transient remote
    failures come back as unresolved-transient and are never cached.
    """
    key = normalize_location(location_name)
    if not key:
        raise ValueError("location name is empty after normalization")

    county = counties.get(key)
    if county is not None:
        return GeoResolution.county(county)

    coords = gazetteer.lookup(key)
    if coords is not None:
        return GeoResolution.at_point(coords[0], coords[1], ResolutionSource.GAZETTEER)

    cached = cache.get(key)
    if cached is not None:
        return dataclasses.replace(cached, source=ResolutionSource.CACHE)

    if geocoder is None:
        return GeoResolution.unresolved(source=None, transient=True)
    try:
        remote = geocoder.search(key)
    except GeocoderUnavailable:
        return GeoResolution.unresolved(source=ResolutionSource.REMOTE_GEOCODER, transient=True)
    if remote is None:
        miss = GeoResolution.unresolved(source=ResolutionSource.REMOTE_GEOCODER)
        cache.put(key, miss)
        return miss
    cache.put(key, remote)
    return remote


# --- regions -----------------------------------------------------------------

Ring = tuple[tuple[float, float], ...]  # (lat, lon) vertices, implicitly closed


@dataclass(frozen=True)
class Region:
    code: str
    name: str
    polygons: tuple[Ring, ...]
    population: int


def point_in_ring(lat: float, lon: float, ring: Ring) -> bool:
    """Even-odd ray casting; the ray runs in +lon direction."""
    inside = False
    n = len(ring)
    j = n - 1
    for i in range(n):
        lat_i, lon_i = ring[i]
        lat_j, lon_j = ring[j]
        if (lat_i > lat) != (lat_j > lat):
            cross = (lon_j - lon_i) * (lat - lat_i) / (lat_j - lat_i) + lon_i
            if lon < cross:
                inside = not inside
        j = i
    return inside


def region_contains(region: Region, lat: float, lon: float) -> bool:
    return any(point_in_ring(lat, lon, ring) for ring in region.polygons)


def _geojson_rings(geometry: dict) -> list[Ring]:
    gtype = geometry.get("type")
    coords = geometry.get("coordinates", [])
    polygons = []
    if gtype == "Polygon":
        polygons = [coords]
    elif gtype == "MultiPolygon":
        polygons = coords
    else:
        raise ValueError(f"unsupported geometry type: {gtype}")
    rings: list[Ring] = []
    for poly in polygons:
        if not poly:
            continue
        outer = poly[0]  # holes are ignored: regions here have none
        rings.append(tuple((float(lat), float(lon)) for lon, lat in outer))
    return rings


def load_regions(path: str | Path) -> list[Region]:
    """Load region polygons from a GeoJSON feature collection.

    Features need ``code``, ``name`` and ``population`` properties. All
    features whose code starts with the London prefix are merged into a
    single Greater London region, preserving file order otherwise.
    """
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    regions: list[Region] = []
    london_rings: list[Ring] = []
    london_population = 0
    london_slot: int | None = None
    for feature in data.get("features", []):
        props = feature.get("properties", {})
        code = str(props["code"])
        rings = tuple(_geojson_rings(feature.get("geometry", {})))
        population = int(props.get("population", 0))
        if code.startswith(GREATER_LONDON_CODE):
            london_rings.extend(rings)
            london_population += population
            if london_slot is None:
                london_slot = len(regions)
                regions.append(None)  # type: ignore[arg-type]
            continue
        regions.append(Region(code=code, name=str(props.get("name", code)),
                              polygons=rings, population=population))
    if london_slot is not None:
        regions[london_slot] = Region(
            code=GREATER_LONDON_CODE,
            name=GREATER_LONDON_NAME,
            polygons=tuple(london_rings),
            population=london_population,
        )
    return [r for r in regions if r is not None]


def merge_region_code(code: str) -> str:
    return GREATER_LONDON_CODE if code.startswith(GREATER_LONDON_CODE) else code


def assign_region(
    res: GeoResolution,
    regions: Sequence[Region],
    county_map: Mapping[str, str],
) -> Region | None:
    """Map a resolved location onto a region, or None when outside them all.

    Points use point-in-polygon in region order (first match wins on
    shared boundaries); bounding boxes resolve by centroid; county
    matches go through the county -> region-code map.
    """
    if res.kind is ResolutionKind.UNRESOLVED:
        raise ValueError("cannot assign a region to an unresolved location")
    by_code = {region.code: region for region in regions}
    if res.kind is ResolutionKind.COUNTY:
        assert res.county_name is not None
        code = county_map.get(normalize_location(res.county_name))
        if code is None:
            return None
        return by_code.get(merge_region_code(code))
    lat, lon = res.centroid()
    for region in regions:
        if region_contains(region, lat, lon):
            return region
    return None


def load_county_map(path: str | Path) -> dict[str, str]:
    """County -> region-code map from a JSON object; keys are normalized."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return {normalize_location(k): str(v) for k, v in data.items()}


class EmptyStore(ValueError):
    pass


def coverage(resolution_kinds: Iterable[str | ResolutionKind]) -> float:
    """Fraction of non-null ads whose location resolved."""
    total = 0
    resolved = 0
    for kind in resolution_kinds:
        total += 1
        # str-valued enum members compare equal to their value
        if kind != ResolutionKind.UNRESOLVED.value:
            resolved += 1
    if total == 0:
        raise EmptyStore("no resolutions to report coverage over")
    return resolved / total
