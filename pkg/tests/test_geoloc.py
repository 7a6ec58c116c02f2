import json
import math

import pytest

from vacobs.geoloc import (
    EmptyStore,
    Gazetteer,
    GeoResolution,
    GeocoderUnavailable,
    InMemoryGeoCache,
    Region,
    RemoteGeocoder,
    ResolutionKind,
    ResolutionSource,
    assign_region,
    coverage,
    load_county_list,
    load_county_map,
    load_regions,
    normalize_location,
    point_in_ring,
    resolve,
)
from vacobs.mockgeo import MockGeocoderServer


def make_geocoder(url, **kwargs):
    kwargs.setdefault("requests_per_second", 10_000)
    kwargs.setdefault("sleep", lambda s: None)
    kwargs.setdefault("backoff", 0.0)
    return RemoteGeocoder(url, **kwargs)


class CountingGazetteer(Gazetteer):
    def __init__(self, entries):
        super().__init__(entries)
        self.lookups = 0

    def lookup(self, name):
        self.lookups += 1
        return super().lookup(name)


COUNTIES = {"devon": "Devon", "kent": "Kent", "cornwall": "Cornwall"}
GAZ = {"exeter": (50.72, -3.53), "leeds": (53.8, -1.55)}


# --- normalize_location ------------------------------------------------------


def test_normalize_collapses_and_casefolds():
    assert normalize_location("  Greater   LONDON ") == "greater london"


def test_normalize_simple():
    assert normalize_location("Leeds") == "leeds"


def test_normalize_empty():
    assert normalize_location("") == ""


# --- resolve cascade ----------------------------------------------------------


def test_resolve_county_short_circuits():
    gaz = CountingGazetteer(GAZ)
    with MockGeocoderServer() as server:
        geocoder = make_geocoder(server.url)
        res = resolve("Devon", COUNTIES, gaz, geocoder, InMemoryGeoCache())
        assert res.kind is ResolutionKind.COUNTY
        assert res.county_name == "Devon"
        assert res.source is ResolutionSource.COUNTY_LIST
        assert gaz.lookups == 0
        assert server.call_count() == 0


def test_resolve_gazetteer_hit():
    with MockGeocoderServer() as server:
        geocoder = make_geocoder(server.url)
        res = resolve("Exeter", COUNTIES, Gazetteer(GAZ), geocoder, InMemoryGeoCache())
        assert res.kind is ResolutionKind.POINT
        assert res.point == (50.72, -3.53)
        assert res.source is ResolutionSource.GAZETTEER
        assert server.call_count() == 0


def test_resolve_remote_then_cache():
    answers = {
        "blackburn with darwen": {"boundingbox": [53.69, 53.81, -2.56, -2.36]}
    }
    cache = InMemoryGeoCache()
    with MockGeocoderServer(answers, strict=True) as server:
        geocoder = make_geocoder(server.url)
        first = resolve("Blackburn with Darwen", COUNTIES, Gazetteer(GAZ), geocoder, cache)
        assert first.kind is ResolutionKind.BOUNDING_BOX
        assert first.source is ResolutionSource.REMOTE_GEOCODER
        second = resolve("Blackburn  with  Darwen", COUNTIES, Gazetteer(GAZ), geocoder, cache)
        assert second.kind is ResolutionKind.BOUNDING_BOX
        assert second.source is ResolutionSource.CACHE
        assert second.bbox == first.bbox
        assert server.call_count() == 1


def test_resolve_definitive_miss_is_cached():
    cache = InMemoryGeoCache()
    with MockGeocoderServer({"atlantis": None}, strict=True) as server:
        geocoder = make_geocoder(server.url)
        first = resolve("Atlantis", COUNTIES, Gazetteer(GAZ), geocoder, cache)
        assert first.kind is ResolutionKind.UNRESOLVED
        assert not first.transient
        second = resolve("Atlantis", COUNTIES, Gazetteer(GAZ), geocoder, cache)
        assert second.source is ResolutionSource.CACHE
        assert server.call_count() == 1


def test_resolve_transient_failure_not_cached():
    cache = InMemoryGeoCache()
    with MockGeocoderServer({"leicester city": "fail"}) as server:
        geocoder = make_geocoder(server.url, retries=2)
        res = resolve("Leicester City", COUNTIES, Gazetteer(GAZ), geocoder, cache)
        assert res.kind is ResolutionKind.UNRESOLVED
        assert res.transient
        assert len(cache) == 0
        # a later attempt reaches the remote again
        resolve("Leicester City", COUNTIES, Gazetteer(GAZ), geocoder, cache)
        assert server.call_count() == 4


def test_resolve_remote_retry_then_success():
    with MockGeocoderServer({"truro": {"lat": 50.26, "lon": -5.05}}, fail_first=2) as server:
        geocoder = make_geocoder(server.url, retries=3)
        res = resolve("Truro", COUNTIES, Gazetteer(GAZ), geocoder, InMemoryGeoCache())
        assert res.kind is ResolutionKind.POINT
        assert server.call_count() == 3


def test_resolve_rejects_empty_location():
    with pytest.raises(ValueError):
        resolve("   ", COUNTIES, Gazetteer(GAZ), None, InMemoryGeoCache())


def test_cache_rejects_transient_entries():
    cache = InMemoryGeoCache()
    with pytest.raises(ValueError):
        cache.put("x", GeoResolution.unresolved(transient=True))


def test_geocoder_unavailable_exception_surface():
    with MockGeocoderServer({"anywhere": "fail"}) as server:
        geocoder = make_geocoder(server.url, retries=2)
        with pytest.raises(GeocoderUnavailable):
            geocoder.search("anywhere")


def test_resolution_invariants_enforced():
    with pytest.raises(ValueError):
        GeoResolution(kind=ResolutionKind.COUNTY)
    with pytest.raises(ValueError):
        GeoResolution(kind=ResolutionKind.POINT, point=(1.0, 2.0), county_name="x")
    with pytest.raises(ValueError):
        GeoResolution.bounding_box((2.0, 0.0, 1.0, 1.0), ResolutionSource.REMOTE_GEOCODER)


# --- regions -------------------------------------------------------------------

SOUTH_WEST_RING = ((49.9, -6.5), (49.9, -2.2), (51.4, -2.2), (51.4, -6.5))
NORTH_RING = ((53.0, -3.2), (53.0, -0.8), (55.0, -0.8), (55.0, -3.2))

REGIONS = [
    Region(code="UKK", name="South West", polygons=(SOUTH_WEST_RING,), population=5_700_000),
    Region(code="UKD", name="North West", polygons=(NORTH_RING,), population=7_300_000),
]


def winding_number_contains(lat, lon, ring):
    # Independent oracle: sum of signed angles is ~2*pi inside, ~0 outside.
    total = 0.0
    n = len(ring)
    for i in range(n):
        a_lat, a_lon = ring[i]
        b_lat, b_lon = ring[(i + 1) % n]
        ang_a = math.atan2(a_lat - lat, a_lon - lon)
        ang_b = math.atan2(b_lat - lat, b_lon - lon)
        delta = ang_b - ang_a
        while delta > math.pi:
            delta -= 2 * math.pi
        while delta < -math.pi:
            delta += 2 * math.pi
        total += delta
    return abs(total) > math.pi


def test_point_in_ring_against_winding_oracle():
    probes = [
        (50.72, -3.53),  # inside the south-west box
        (54.0, -2.0),
        (52.0, -3.0),
        (0.0, 0.0),
        (51.39, -2.21),
        (49.95, -6.45),
    ]
    for ring in (SOUTH_WEST_RING, NORTH_RING):
        for lat, lon in probes:
            assert point_in_ring(lat, lon, ring) == winding_number_contains(lat, lon, ring)


def test_assign_region_point_in_south_west():
    res = GeoResolution.at_point(50.72, -3.53, ResolutionSource.GAZETTEER)
    region = assign_region(res, REGIONS, {})
    assert region is not None and region.code == "UKK"


def test_assign_region_county_via_map():
    res = GeoResolution.county("Devon")
    region = assign_region(res, REGIONS, {"devon": "UKK"})
    assert region is not None and region.code == "UKK"


def test_assign_region_outside_all_boundaries():
    res = GeoResolution.at_point(0.0, 0.0, ResolutionSource.GAZETTEER)
    assert assign_region(res, REGIONS, {}) is None


def test_assign_region_bbox_centroid():
    res = GeoResolution.bounding_box((50.0, -4.0, 51.0, -3.0), ResolutionSource.REMOTE_GEOCODER)
    region = assign_region(res, REGIONS, {})
    assert region is not None and region.code == "UKK"


def test_assign_region_unresolved_rejected():
    with pytest.raises(ValueError):
        assign_region(GeoResolution.unresolved(), REGIONS, {})


def test_assign_region_shared_boundary_first_match():
    shared = ((50.0, -3.0), (50.0, -1.0), (52.0, -1.0), (52.0, -3.0))
    a = Region(code="A", name="A", polygons=(shared,), population=1)
    b = Region(code="B", name="B", polygons=(shared,), population=1)
    res = GeoResolution.at_point(51.0, -2.0, ResolutionSource.GAZETTEER)
    hits = [assign_region(res, order, {}) for order in ([a, b], [b, a])]
    assert hits[0].code == "A" and hits[1].code == "B"


def test_load_regions_merges_london(tmp_path):
    def feature(code, name, population, lon0, lat0):
        return {
            "type": "Feature",
            "properties": {"code": code, "name": name, "population": population},
            "geometry": {
                "type": "Polygon",
                "coordinates": [[[lon0, lat0], [lon0 + 0.5, lat0], [lon0 + 0.5, lat0 + 0.5], [lon0, lat0 + 0.5]]],
            },
        }

    collection = {
        "type": "FeatureCollection",
        "features": [
            feature("UKK4", "Devon area", 1_200_000, -4.0, 50.3),
            feature("UKI3", "Inner London West", 1_100_000, -0.3, 51.45),
            feature("UKI4", "Inner London East", 1_300_000, 0.2, 51.45),
        ],
    }
    path = tmp_path / "regions.geojson"
    path.write_text(json.dumps(collection), encoding="utf-8")
    regions = load_regions(path)
    codes = [r.code for r in regions]
    assert codes == ["UKK4", "UKI"]
    london = regions[1]
    assert london.name == "Greater London"
    assert london.population == 2_400_000
    assert len(london.polygons) == 2
    # any London point assigns to the merged region, never a UKI? code
    res = GeoResolution.at_point(51.5, -0.1, ResolutionSource.GAZETTEER)
    region = assign_region(res, regions, {})
    assert region is not None and region.code == "UKI"


def test_county_map_remaps_london(tmp_path):
    regions = [
        Region(code="UKI", name="Greater London", polygons=(), population=9_000_000),
    ]
    region = assign_region(GeoResolution.county("Middlesex"), regions, {"middlesex": "UKI5"})
    assert region is not None and region.code == "UKI"


# --- data file loaders -----------------------------------------------------------


def test_load_county_list(tmp_path):
    path = tmp_path / "counties.txt"
    path.write_text("Devon\nKent\n# comment\n\nCornwall\n", encoding="utf-8")
    counties = load_county_list(path)
    assert counties == {"devon": "Devon", "kent": "Kent", "cornwall": "Cornwall"}


def test_gazetteer_filters_to_uk(tmp_path):
    path = tmp_path / "gaz.tsv"
    path.write_text(
        "Exeter\t50.72\t-3.53\tGB\nParis\t48.86\t2.35\tFR\nLeeds\t53.80\t-1.55\tGB\n",
        encoding="utf-8",
    )
    gaz = Gazetteer.from_file(path)
    assert len(gaz) == 2
    assert gaz.lookup("exeter") == (50.72, -3.53)
    assert gaz.lookup("paris") is None


def test_load_county_map(tmp_path):
    path = tmp_path / "map.json"
    path.write_text('{"Devon": "UKK4", "Kent": "UKJ4"}', encoding="utf-8")
    assert load_county_map(path) == {"devon": "UKK4", "kent": "UKJ4"}


# --- coverage ---------------------------------------------------------------------


def test_coverage_fraction():
    kinds = ["Point"] * 97 + ["Unresolved"] * 3
    assert coverage(kinds) == pytest.approx(0.97)


def test_coverage_all_resolved():
    assert coverage([ResolutionKind.COUNTY, ResolutionKind.POINT]) == 1.0


def test_coverage_empty_store_guard():
    with pytest.raises(EmptyStore):
        coverage([])
