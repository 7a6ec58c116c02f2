"""Command line interface binding the pipeline stages and analytics."""

from __future__ import annotations

import csv
import datetime as dt
import json
import sys
from pathlib import Path

import click

from .analytics import (
    ZeroBaseline,
    category_proportions,
    daily_counts,
    period_deficit,
    salary_distribution,
    top_terms_for,
)
from .classify import (
    ClassifierBundle,
    SeedCorpus,
    build_seed_corpus,
    load_seed_phrases,
    train_classifier,
)
from .config import AppConfig, data_path, load_config
from .geoloc import (
    Gazetteer,
    GeoResolution,
    RemoteGeocoder,
    assign_region,
    load_county_list,
    load_county_map,
    load_regions,
    resolve,
)
from .ingest import (
    DEFAULT_BLOCKLIST,
    FixtureSource,
    IngestReport,
    LiveSource,
    ParseError,
    fetch_range,
    filter_cross_posts,
    is_null_record,
    parse_ad,
)
from .pipeline import run_lock, run_pipeline
from .store import AdRecordRow, QueryFilter, Store
from .textprep import Document, build_document, default_lemma_table, load_lemma_table
from .tree import TreeParams


def _parse_date(value: str) -> dt.date:
    try:
        return dt.date.fromisoformat(value)
    except ValueError as exc:
        raise click.BadParameter(str(exc))


def _make_source(spec: str, config: AppConfig):
    if spec.startswith("fixture:"):
        return FixtureSource(spec[len("fixture:"):])
    if spec == "live":
        if not config.live_base_url:
            raise click.UsageError("live source requires live_base_url in config")
        return LiveSource(
            config.live_base_url,
            requests_per_second=config.live_requests_per_second,
            retries=config.retries,
            backoff=config.backoff_seconds,
        )
    raise click.UsageError(f"source must be 'live' or 'fixture:<path>', got {spec!r}")


def _load_table(path: str | None):
    return load_lemma_table(path) if path else default_lemma_table()


def _region_code_resolver(regions_path: str | None):
    regions = load_regions(regions_path or data_path("nuts2_regions.geojson"))
    by_name = {r.name.casefold(): r.code for r in regions}
    codes = {r.code for r in regions}

    def to_code(value: str) -> str:
        if value in codes:
            return value
        return by_name.get(value.casefold(), value)

    return regions, to_code


def _build_filter(label, region, contract, mode, exclude_employer, to_code=None):
    region_codes = None
    if region:
        region_codes = frozenset(to_code(r) if to_code else r for r in region)
    return QueryFilter(
        labels=frozenset(label) if label else None,
        region_codes=region_codes,
        contract_types=frozenset(contract) if contract else None,
        modes=frozenset(mode) if mode else None,
        employer_excludes=frozenset(exclude_employer) if exclude_employer else None,
    )


def filter_options(fn):
    fn = click.option("--exclude-employer", multiple=True, help="Employers to exclude.")(fn)
    fn = click.option("--mode", multiple=True, help="Employment modes to include.")(fn)
    fn = click.option("--contract", multiple=True, help="Contract types to include.")(fn)
    fn = click.option("--region", multiple=True, help="Region codes or names.")(fn)
    fn = click.option("--label", multiple=True, help="Sector labels to include.")(fn)
    return fn


def _echo_json(data) -> None:
    click.echo(json.dumps(data, indent=2, sort_keys=True))


@click.group()
@click.version_option()
def main():
    """Job-vacancy observatory: ingest, classify, locate, analyse."""


@main.command()
@click.option("--source", required=True, help="'live' or 'fixture:<path>'.")
@click.option("--start-id", type=int, required=True)
@click.option("--end-id", type=int, required=True)
@click.option("--out", "store_path", required=True, help="Store database path.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--window-start", default=None, help="Reject ads dated before this ISO date.")
@click.option("--window-end", default=None, help="Reject ads dated on/after this ISO date.")
def ingest(source, start_id, end_id, store_path, config_path, window_start, window_end):
    """Fetch ads by id range into a store (no classification or geocoding)."""
    config = load_config(config_path)
    src = _make_source(source, config)
    window = None
    if window_start and window_end:
        window = (_parse_date(window_start), _parse_date(window_end))
    report = IngestReport()
    ads = []
    for record in fetch_range(src, start_id, end_id, parallel=config.fetch_parallel):
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
    retained, removed = filter_cross_posts(ads, config.blocklist)
    report.cross_posts_removed = removed
    report.retained = len(retained)
    with Store(store_path) as store:
        store.upsert_ads([AdRecordRow.from_ad(ad) for ad in retained])
        store.record_ingest_run("cli-ingest", report)
    _echo_json(
        {
            "total_fetched": report.total_fetched,
            "null_records": report.null_records,
            "parse_failures": report.parse_failures,
            "cross_posts_removed": report.cross_posts_removed,
            "retained": report.retained,
        }
    )


@main.command("build-seeds")
@click.option("--seeds", "seeds_path", default=None, help="Seed phrases JSON (bundled default).")
@click.option("--corpus", "store_path", required=True, help="Store with the labelled-window ads.")
@click.option("--out", "out_path", required=True, help="Seed corpus JSON output.")
@click.option("--start-id", type=int, default=None)
@click.option("--end-id", type=int, default=None)
@click.option("--lemma-table", default=None)
@click.option("--threshold", type=float, default=0.04, show_default=True)
def build_seeds(seeds_path, store_path, out_path, start_id, end_id, lemma_table, threshold):
    """Mine per-label seed documents from ads by title phrase matching."""
    phrases = load_seed_phrases(seeds_path or data_path("seeds.json"))
    table = _load_table(lemma_table)
    with Store(store_path, read_only=True) as store:
        ads = [row.to_ad() for row in store.query()]
    if start_id is not None:
        ads = [ad for ad in ads if ad.ad_id >= start_id]
    if end_id is not None:
        ads = [ad for ad in ads if ad.ad_id < end_id]
    corpus = build_seed_corpus(ads, table, phrases, threshold=threshold)
    payload = {
        label: [
            {"ad_id": d.ad_id, "tokens": list(d.tokens), "boundary": d.boundary}
            for d in docs
        ]
        for label, docs in corpus.seed_sets.items()
    }
    Path(out_path).write_text(json.dumps(payload), encoding="utf-8")
    _echo_json({label: len(docs) for label, docs in sorted(corpus.seed_sets.items())})


def _load_seed_corpus_file(path: str) -> SeedCorpus:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    seed_sets = {
        label: [
            Document(ad_id=d["ad_id"], tokens=tuple(d["tokens"]), boundary=d["boundary"])
            for d in docs
        ]
        for label, docs in data.items()
    }
    return SeedCorpus(seed_sets=seed_sets)


@main.command()
@click.option("--seeds", "seeds_path", default=None, help="Seed phrases JSON (bundled default).")
@click.option("--seed-corpus", "seed_corpus_path", default=None,
              help="Prebuilt seed corpus from build-seeds; skips mining.")
@click.option("--corpus", "store_path", default=None, help="Store with the labelled-window ads.")
@click.option("--out", "model_path", required=True, help="Model artifact output path.")
@click.option("--start-id", type=int, default=None)
@click.option("--end-id", type=int, default=None)
@click.option("--lemma-table", default=None)
@click.option("--threshold", type=float, default=0.04, show_default=True)
@click.option("--max-depth", type=int, default=None)
@click.option("--min-samples-leaf", type=int, default=1, show_default=True)
@click.option("--rng-seed", type=int, default=0, show_default=True)
def train(seeds_path, seed_corpus_path, store_path, model_path, start_id, end_id,
          lemma_table, threshold, max_depth, min_samples_leaf, rng_seed):
    """Train the sector classifier and write the model artifact."""
    if seed_corpus_path:
        corpus = _load_seed_corpus_file(seed_corpus_path)
    else:
        if not store_path:
            raise click.UsageError("either --seed-corpus or --corpus is required")
        phrases = load_seed_phrases(seeds_path or data_path("seeds.json"))
        table = _load_table(lemma_table)
        with Store(store_path, read_only=True) as store:
            ads = [row.to_ad() for row in store.query()]
        if start_id is not None:
            ads = [ad for ad in ads if ad.ad_id >= start_id]
        if end_id is not None:
            ads = [ad for ad in ads if ad.ad_id < end_id]
        corpus = build_seed_corpus(ads, table, phrases, threshold=threshold)
    params = TreeParams(max_depth=max_depth, min_samples_leaf=min_samples_leaf)
    bundle, metrics = train_classifier(
        corpus, params=params, threshold=threshold, rng_seed=rng_seed
    )
    bundle.save(model_path)
    _echo_json(
        {
            "model": str(model_path),
            "subset_accuracy": metrics.subset_accuracy,
            "balanced_accuracy": metrics.balanced_accuracy,
            "cohens_kappa": metrics.cohens_kappa,
        }
    )


@main.command()
@click.option("--model", "model_path", required=True)
@click.option("--test", "test_path", required=True,
              help="Labelled documents in the build-seeds JSON format.")
def evaluate(model_path, test_path):
    """Score the classifier against a labelled document file."""
    from .classify import evaluate as evaluate_docs

    bundle = ClassifierBundle.load(model_path)
    corpus = _load_seed_corpus_file(test_path)
    pairs = [(doc, label) for label, docs in corpus.seed_sets.items() for doc in docs]
    metrics = evaluate_docs(
        bundle.tree, bundle.model, bundle.seed_vectors,
        pairs, threshold=bundle.threshold,
    )
    _echo_json(
        {
            "examples": len(pairs),
            "subset_accuracy": metrics.subset_accuracy,
            "balanced_accuracy": metrics.balanced_accuracy,
            "cohens_kappa": metrics.cohens_kappa,
        }
    )


@main.command("classify")
@click.option("--model", "model_path", required=True)
@click.option("--in", "store_path", required=True, help="Store whose ads get labels.")
@click.option("--relabel-all", is_flag=True, help="Also relabel rows that have a label.")
@click.option("--lemma-table", default=None)
def classify_cmd(model_path, store_path, relabel_all, lemma_table):
    """Label stored ads with the trained classifier."""
    bundle = ClassifierBundle.load(model_path)
    table = _load_table(lemma_table)
    with Store(store_path) as store:
        updates = []
        for row in store.query():
            if row.label is not None and not relabel_all:
                continue
            doc = build_document(row.to_ad(), table)
            updates.append((row.ad_id, bundle.classify(doc)))
        store.set_labels(updates)
    _echo_json({"labelled": len(updates)})


@main.command()
@click.option("--store", "store_path", required=True)
@click.option("--counties", default=None, help="County list file (bundled default).")
@click.option("--gazetteer", default=None, help="Gazetteer TSV (bundled default).")
@click.option("--regions", default=None, help="Region boundaries GeoJSON (bundled default).")
@click.option("--county-map", default=None, help="County to region-code JSON (bundled default).")
@click.option("--geocoder-url", default=None, help="Remote geocoder base URL; omit to stay offline.")
@click.option("--redo-unresolved", is_flag=True, help="Retry rows that are currently unresolved.")
def geocode(store_path, counties, gazetteer, regions, county_map, geocoder_url, redo_unresolved):
    """Resolve stored ads' locations and assign regions."""
    county_index = load_county_list(counties or data_path("uk_counties.txt"))
    gaz = Gazetteer.from_file(gazetteer or data_path("gazetteer_uk.tsv"))
    region_list = load_regions(regions or data_path("nuts2_regions.geojson"))
    cmap = load_county_map(county_map or data_path("county_regions.json"))
    geocoder = RemoteGeocoder(geocoder_url) if geocoder_url else None
    resolved = 0
    unresolved = 0
    with Store(store_path) as store:
        cache = store.geo_cache()
        updates = []
        for row in store.query():
            if row.resolution_kind is not None and not (
                redo_unresolved and row.resolution_kind == "Unresolved"
            ):
                continue
            if row.location_name.strip():
                res = resolve(row.location_name, county_index, gaz, geocoder, cache)
            else:
                res = GeoResolution.unresolved()
            code = None
            if res.resolved:
                resolved += 1
                region = assign_region(res, region_list, cmap)
                code = region.code if region else None
            else:
                unresolved += 1
            updates.append((row.ad_id, code, res.kind.value))
        store.set_geo(updates)
    total = resolved + unresolved
    _echo_json(
        {
            "geocoded": total,
            "resolved": resolved,
            "unresolved": unresolved,
            "coverage": (resolved / total) if total else None,
        }
    )


@main.command()
@filter_options
@click.option("--store", "store_path", required=True)
@click.option("--from", "from_", required=True, help="Series start date (inclusive).")
@click.option("--to", required=True, help="Series end date (exclusive).")
@click.option("--out", "out_path", default="-", help="CSV output path, '-' for stdout.")
@click.option("--regions-file", default=None, help="Region boundaries for name lookups.")
def series(label, region, contract, mode, exclude_employer, store_path, from_, to, out_path, regions_file):
    """Daily ad counts as CSV (date,count)."""
    _, to_code = _region_code_resolver(regions_file)
    flt = _build_filter(label, region, contract, mode, exclude_employer, to_code)
    with Store(store_path, read_only=True) as store:
        result = daily_counts(store, flt, (_parse_date(from_), _parse_date(to)))
    out = sys.stdout if out_path == "-" else open(out_path, "w", newline="", encoding="utf-8")
    try:
        writer = csv.writer(out)
        writer.writerow(["date", "count"])
        for day, count in result.points:
            writer.writerow([day.isoformat(), count])
    finally:
        if out is not sys.stdout:
            out.close()


@main.command()
@filter_options
@click.option("--store", "store_path", required=True)
@click.option("--period-a-from", required=True)
@click.option("--period-a-to", required=True)
@click.option("--period-b-from", required=True)
@click.option("--period-b-to", required=True)
def compare(label, region, contract, mode, exclude_employer, store_path,
            period_a_from, period_a_to, period_b_from, period_b_to):
    """Deficit of period B relative to period A."""
    flt = _build_filter(label, region, contract, mode, exclude_employer)
    with Store(store_path, read_only=True) as store:
        try:
            cmp = period_deficit(
                store,
                flt,
                (_parse_date(period_a_from), _parse_date(period_a_to)),
                (_parse_date(period_b_from), _parse_date(period_b_to)),
            )
        except ZeroBaseline as exc:
            raise click.ClickException(str(exc))
    _echo_json(
        {
            "count_a": cmp.count_a,
            "count_b": cmp.count_b,
            "deficit_fraction": cmp.deficit_fraction,
        }
    )


@main.command("salary-stats")
@filter_options
@click.option("--store", "store_path", required=True)
@click.option("--from", "from_", default=None)
@click.option("--to", default=None)
def salary_stats(label, region, contract, mode, exclude_employer, store_path, from_, to):
    """Mean and median yearly minimum salary for matching ads."""
    flt = _build_filter(label, region, contract, mode, exclude_employer)
    if from_ and to:
        flt = QueryFilter(
            labels=flt.labels,
            region_codes=flt.region_codes,
            date_range=(_parse_date(from_), _parse_date(to)),
            contract_types=flt.contract_types,
            modes=flt.modes,
            employer_excludes=flt.employer_excludes,
        )
    with Store(store_path, read_only=True) as store:
        dist = salary_distribution(store, flt)
    _echo_json(
        {
            "count": len(dist.values),
            "excluded_missing_salary": dist.excluded_count,
            "mean": dist.mean,
            "median": dist.median,
        }
    )


@main.command()
@click.option("--store", "store_path", required=True)
@click.option("--axis", type=click.Choice(["contract", "mode"]), required=True)
@click.option("--label", multiple=True)
@click.option("--region", multiple=True)
@click.option("--from", "from_", default=None)
@click.option("--to", default=None)
def proportions(store_path, axis, label, region, from_, to):
    """Contract-type or employment-mode proportions."""
    flt = _build_filter(label, region, None, None, None)
    if from_ and to:
        flt = QueryFilter(
            labels=flt.labels,
            region_codes=flt.region_codes,
            date_range=(_parse_date(from_), _parse_date(to)),
        )
    with Store(store_path, read_only=True) as store:
        dist = category_proportions(store, flt, axis)
    _echo_json(
        {
            "axis": axis,
            "counts": dist.categories,
            "proportions": dist.proportions,
            "unknown_count": dist.unknown_count,
        }
    )


@main.command("top-terms")
@filter_options
@click.option("--store", "store_path", required=True)
@click.option("--n", type=int, default=20, show_default=True)
@click.option("--scope", type=click.Choice(["titles_only", "full"]), default="titles_only",
              show_default=True)
@click.option("--lemma-table", default=None)
def top_terms_cmd(label, region, contract, mode, exclude_employer, store_path, n, scope, lemma_table):
    """Most frequent terms for matching ads as CSV (term,count)."""
    flt = _build_filter(label, region, contract, mode, exclude_employer)
    table = _load_table(lemma_table)
    with Store(store_path, read_only=True) as store:
        terms = top_terms_for(store, flt, n, scope, table)
    writer = csv.writer(sys.stdout)
    writer.writerow(["term", "count"])
    for term, count in terms:
        writer.writerow([term, count])


@main.command()
@click.option("--store", "store_path", required=True)
@click.option("--bind", default="127.0.0.1:8080", show_default=True)
@click.option("--cors-origin", multiple=True, help="Allowed dashboard origins.")
@click.option("--regions", "regions_path", default=None)
@click.option("--lemma-table", default=None)
def serve(store_path, bind, cors_origin, regions_path, lemma_table):
    """Serve the read-only query API."""
    import uvicorn

    from .api import create_app

    host, _, port = bind.partition(":")
    app = create_app(
        store_path,
        cors_origins=list(cors_origin) or ["*"],
        lemma_table_path=lemma_table,
        regions_path=regions_path,
    )
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or "8080"))


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--start-id", type=int, default=None)
@click.option("--end-id", type=int, default=None)
def pipeline(config_path, start_id, end_id):
    """Run ingest, classification and geolocation end to end."""
    config = load_config(config_path, start_id=start_id, end_id=end_id)
    if config.start_id is None or config.end_id is None:
        raise click.UsageError("start_id and end_id must come from flags or config")
    if not config.source:
        raise click.UsageError("config must set 'source'")
    source = _make_source(config.source, config)
    bundle = ClassifierBundle.load(config.model_path)
    table = (
        load_lemma_table(config.lemma_table_path)
        if config.lemma_table_path
        else default_lemma_table()
    )
    counties = load_county_list(config.resolved_path("counties_path", "uk_counties.txt"))
    gaz = Gazetteer.from_file(config.resolved_path("gazetteer_path", "gazetteer_uk.tsv"))
    regions = load_regions(config.resolved_path("regions_path", "nuts2_regions.geojson"))
    cmap = load_county_map(config.resolved_path("county_map_path", "county_regions.json"))
    geocoder = (
        RemoteGeocoder(
            config.geocoder_url,
            requests_per_second=config.geocoder_requests_per_second,
            retries=config.retries,
            backoff=config.backoff_seconds,
        )
        if config.geocoder_url
        else None
    )
    with run_lock(config.store_path), Store(config.store_path) as store:
        result = run_pipeline(
            store,
            source,
            bundle,
            table,
            counties,
            gaz,
            geocoder,
            regions,
            cmap,
            config.start_id,
            config.end_id,
            blocklist=config.blocklist,
            window=config.window(),
            parallel=config.fetch_parallel,
        )
    _echo_json(
        {
            "run_id": result.run_id,
            "total_fetched": result.report.total_fetched,
            "null_records": result.report.null_records,
            "parse_failures": result.report.parse_failures,
            "cross_posts_removed": result.report.cross_posts_removed,
            "retained": result.report.retained,
            "skipped_existing": result.skipped_existing,
            "classified": result.classified,
            "geo_resolved": result.geo_resolved,
            "geo_unresolved": result.geo_unresolved,
            "coverage": result.coverage,
            "rows_written": result.rows_written,
        }
    )


if __name__ == "__main__":
    main()
