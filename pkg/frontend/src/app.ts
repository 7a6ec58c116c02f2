// Dashboard assembly: the query form drives four analytics panels plus an
// optional period comparison, and every submitted query is mirrored into
// the URL hash as a shareable link.

import { ApiClient } from "./api";
import { lineChart, proportionBars, salaryHistogram, termGrid, type ChartPoint } from "./charts";
import { eventsInRange, loadEvents } from "./events";
import { QueryForm, validate } from "./form";
import { Panel } from "./panels";
import { stateFromLocation, stateToHash } from "./urlState";
import type { EventMarker, MetaResponse, QueryFormState, SeriesResponse } from "./types";

export interface App {
  form: QueryForm;
  submit(state: QueryFormState): Promise<void>;
  currentState(): QueryFormState;
  root: HTMLElement;
}

function perCapitaDivisor(state: QueryFormState, meta: MetaResponse): number {
  const selected = state.regions.length
    ? meta.regions.filter((r) => state.regions.includes(r.code))
    : meta.regions;
  const population = selected.reduce((sum, r) => sum + r.population, 0);
  return population > 0 ? population : 1;
}

export function seriesToChartPoints(
  body: SeriesResponse,
  state: QueryFormState,
  meta: MetaResponse,
): ChartPoint[] {
  const divisor = state.countMode === "per-capita" ? perCapitaDivisor(state, meta) : 1;
  return body.points.map((p) => ({ date: p.date, value: p.count / divisor }));
}

export async function createApp(
  root: HTMLElement,
  client: ApiClient,
  options: { events?: EventMarker[]; updateUrl?: boolean } = {},
): Promise<App> {
  const events = options.events ?? loadEvents();
  const updateUrl = options.updateUrl ?? true;
  const meta = await client.meta();

  const seriesPanel = new Panel("Daily postings", "series-panel");
  const comparePanel = new Panel("Period comparison", "compare-panel");
  const salaryPanel = new Panel("Salary distribution", "salary-panel");
  const proportionsPanel = new Panel("Contract / mode split", "proportions-panel");
  const termsPanel = new Panel("Common title terms", "terms-panel");

  let lastState = stateFromLocation(window.location.hash);

  const form = new QueryForm(meta, (state) => void submit(state));
  form.writeState(lastState);

  async function submit(state: QueryFormState): Promise<void> {
    const problems = validate(state);
    if (problems.length) {
      form.showErrors(problems);
      return;
    }
    lastState = state;
    form.writeState(state);
    if (updateUrl) {
      history.replaceState(null, "", stateToHash(state));
    }
    const markers = eventsInRange(events, state.range.from, state.range.to);
    const jobs = [
      seriesPanel.load(
        () => client.series(state),
        (body) =>
          lineChart(
            seriesToChartPoints(body, state, meta),
            markers,
            state.countMode === "per-capita" ? "ads per person per day" : "ads per day",
          ),
      ),
      salaryPanel.load(
        () => client.salary(state),
        (body) => {
          const wrap = document.createElement("div");
          const summary = document.createElement("p");
          summary.className = "salary-summary";
          summary.textContent =
            body.mean === null
              ? `no salaried ads in this filter (${body.excluded_missing_salary} without a salary)`
              : `mean ${Math.round(body.mean)} GBP, median ${Math.round(body.median ?? 0)} GBP ` +
                `over ${body.count} ads (${body.excluded_missing_salary} without a salary)`;
          wrap.append(summary, salaryHistogram(body.buckets));
          return wrap;
        },
      ),
      proportionsPanel.load(
        () => client.proportions(state),
        (body) => proportionBars(body.proportions),
      ),
      termsPanel.load(
        () => client.topTerms(state),
        (body) => termGrid(body.terms),
      ),
    ];
    if (state.compareA && state.compareB) {
      const a = state.compareA;
      const b = state.compareB;
      jobs.push(
        comparePanel.load(
          () => client.compare(state, a, b),
          (body) => {
            const out = document.createElement("p");
            out.className = "deficit";
            const pct = (body.deficit_fraction * 100).toFixed(1);
            out.textContent =
              `${body.period_a.count} ads in ${body.period_a.from}..${body.period_a.to} vs ` +
              `${body.period_b.count} in ${body.period_b.from}..${body.period_b.to}: ` +
              `deficit ${pct}%`;
            return out;
          },
        ),
      );
    }
    await Promise.all(jobs);
  }

  const header = document.createElement("header");
  const title = document.createElement("h1");
  title.textContent = "Job vacancy observatory";
  const subtitle = document.createElement("p");
  subtitle.className = "subtitle";
  subtitle.textContent = `${meta.total_ads} ads indexed`;
  header.append(title, subtitle);

  root.replaceChildren(
    header,
    form.root,
    seriesPanel.root,
    comparePanel.root,
    salaryPanel.root,
    proportionsPanel.root,
    termsPanel.root,
  );

  window.addEventListener("popstate", () => {
    const state = stateFromLocation(window.location.hash);
    form.writeState(state);
    void submit(state);
  });

  return {
    form,
    submit,
    currentState: () => lastState,
    root,
  };
}
