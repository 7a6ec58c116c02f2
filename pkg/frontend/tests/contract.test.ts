// Contract tests: the dashboard replays API responses recorded from a
// real backend run and snapshot-checks the rendered state. No live
// server is involved.

import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { createApp } from "../src/app";
import { defaultState, type QueryFormState } from "../src/types";
import { RECORDINGS, recordedFetch, type Recorded } from "./replay";
import { stateFromLocation } from "../src/urlState";

import seriesFig16 from "./fixtures/series_fig16.json";
import seriesAll from "./fixtures/series_all.json";
import compareFixture from "./fixtures/compare.json";
import metaFixture from "./fixtures/meta.json";

const RANGE = { from: "2020-03-01", to: "2020-04-19" };

function fig16State(): QueryFormState {
  // The flagship query: software and data jobs in the south west.
  return {
    ...defaultState(),
    labels: ["software", "data"],
    regions: ["UKK4"],
    range: { ...RANGE },
  };
}

function matchAllState(): QueryFormState {
  return { ...defaultState(), range: { ...RANGE } };
}

async function mount(fetchFn: typeof fetch) {
  const root = document.createElement("div");
  document.body.replaceChildren(root);
  const app = await createApp(root, new ApiClient("", fetchFn), { updateUrl: true });
  return { root, app };
}

beforeEach(() => {
  history.replaceState(null, "", "#");
  document.body.replaceChildren();
});

describe("recorded-API replay", () => {
  it("renders one series panel for the software+data south-west query", async () => {
    const { fetchFn } = recordedFetch();
    const { root, app } = await mount(fetchFn);
    await app.submit(fig16State());

    const panels = root.querySelectorAll(".series-panel");
    expect(panels.length).toBe(1);
    const charts = panels[0].querySelectorAll("svg.line-chart");
    expect(charts.length).toBe(1);
    const polyline = charts[0].querySelector("polyline.series-line");
    expect(polyline).not.toBeNull();
    const coords = polyline!.getAttribute("points")!.trim().split(/\s+/);
    expect(coords.length).toBe(seriesFig16.body.total_points);
    expect(panels[0].outerHTML).toMatchSnapshot();
  });

  it("renders the whole-corpus series for the match-all query", async () => {
    const { fetchFn } = recordedFetch();
    const { root, app } = await mount(fetchFn);
    await app.submit(matchAllState());

    const polyline = root.querySelector(".series-panel polyline.series-line");
    expect(polyline).not.toBeNull();
    const coords = polyline!.getAttribute("points")!.trim().split(/\s+/);
    expect(coords.length).toBe(seriesAll.body.total_points);
    // the lockdown-era annotations inside the range are drawn
    const markers = root.querySelectorAll(".series-panel .event-marker");
    expect(markers.length).toBeGreaterThan(0);
  });

  it("renders salary, proportions and term panels from the same replay", async () => {
    const { fetchFn } = recordedFetch();
    const { root, app } = await mount(fetchFn);
    await app.submit(fig16State());

    expect(root.querySelector(".salary-panel .salary-summary")).not.toBeNull();
    expect(root.querySelectorAll(".proportions-panel rect.bar").length).toBe(3);
    const tags = root.querySelectorAll(".terms-panel .term-tag");
    expect(tags.length).toBeGreaterThan(0);
    const sizes = Array.from(tags).map((t) => parseFloat((t as HTMLElement).style.fontSize));
    const sorted = [...sizes].sort((a, b) => b - a);
    expect(sizes).toEqual(sorted); // size-weighted grid in descending order
  });

  it("shows the deficit figure from the compare endpoint", async () => {
    const { fetchFn } = recordedFetch();
    const { root, app } = await mount(fetchFn);
    const state = fig16State();
    state.compareA = { from: "2020-03-01", to: "2020-03-26" };
    state.compareB = { from: "2020-03-26", to: "2020-04-19" };
    await app.submit(state);

    const text = root.querySelector(".compare-panel .deficit")!.textContent!;
    const pct = (compareFixture.body.deficit_fraction * 100).toFixed(1);
    expect(text).toContain(`deficit ${pct}%`);
    expect(text).toContain(String(compareFixture.body.period_a.count));
  });

  it("only issues documented /v1 calls", async () => {
    const { fetchFn, calls } = recordedFetch();
    const { app } = await mount(fetchFn);
    const state = fig16State();
    state.compareA = { from: "2020-03-01", to: "2020-03-26" };
    state.compareB = { from: "2020-03-26", to: "2020-04-19" };
    await app.submit(state);
    const documented = ["/v1/meta", "/v1/series", "/v1/salary", "/v1/proportions", "/v1/top-terms", "/v1/compare"];
    expect(calls.length).toBeGreaterThan(0);
    for (const call of calls) {
      expect(documented.some((d) => call.startsWith(`${d}?`) || call === d)).toBe(true);
    }
  });
});

describe("url state round trip", () => {
  it("reproduces the submitted form state from a shared link", async () => {
    const { fetchFn } = recordedFetch();
    const first = await mount(fetchFn);
    const state = fig16State();
    state.countMode = "per-capita";
    await first.app.submit(state);
    expect(window.location.hash.length).toBeGreaterThan(1);

    // the URL alone decodes back to the identical state
    expect(stateFromLocation(window.location.hash)).toEqual(state);

    // a fresh app booted on the shared URL shows the same form state
    // (multi-select boxes carry no selection order, so compare as sets)
    const second = await mount(fetchFn);
    const restored = second.app.form.readState();
    expect(new Set(restored.labels)).toEqual(new Set(state.labels));
    expect(new Set(restored.regions)).toEqual(new Set(state.regions));
    expect({ ...restored, labels: [], regions: [] }).toEqual({ ...state, labels: [], regions: [] });
  });
});

describe("error states", () => {
  it("rejects an invalid date range before any request", async () => {
    const { fetchFn, calls } = recordedFetch();
    const { root, app } = await mount(fetchFn);
    const callsBefore = calls.length;
    const state = fig16State();
    state.range = { from: "2020-04-19", to: "2020-03-01" };
    await app.submit(state);
    expect(calls.length).toBe(callsBefore);
    expect(root.querySelector(".form-error")!.textContent).toContain("after");
  });

  it("surfaces a server-side 400 on the affected panel", async () => {
    const rejected: Recorded = {
      status: 400,
      path: `/v1/series?from=${RANGE.from}&to=${RANGE.to}`,
      body: { detail: "malformed filter" },
    };
    const recordings = RECORDINGS.filter(
      (r) => !(r.path.startsWith("/v1/series?") && !r.path.includes("label")),
    ).concat([rejected]);
    const { fetchFn } = recordedFetch(recordings);
    const { root, app } = await mount(fetchFn);
    await app.submit(matchAllState());
    const status = root.querySelector(".series-panel .panel-status")!;
    expect(status.className).toContain("error");
    expect(status.textContent).toContain("malformed filter");
    // the other panels still rendered
    expect(root.querySelector(".salary-panel .salary-summary")).not.toBeNull();
  });

  it("shows a retryable banner when the API is unreachable, and retries", async () => {
    let down = true;
    const { fetchFn } = recordedFetch();
    const flaky = (async (input: RequestInfo | URL) => {
      const url = String(input);
      if (down && !url.includes("/v1/meta")) {
        throw new TypeError("network down");
      }
      return fetchFn(input);
    }) as typeof fetch;

    const { root, app } = await mount(flaky);
    await app.submit(matchAllState());
    const banner = root.querySelector(".series-panel .panel-status.banner")!;
    expect(banner.textContent).toContain("API unreachable");

    down = false;
    (banner.querySelector("button.retry") as HTMLButtonElement).click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(root.querySelector(".series-panel polyline.series-line")).not.toBeNull();
  });
});

describe("stale responses", () => {
  it("discards a slow response that was superseded", async () => {
    const { fetchFn } = recordedFetch();
    let release: (() => void) | null = null;
    const gated = (async (input: RequestInfo | URL) => {
      const url = String(input);
      const isMatchAllSeries = url.includes("/v1/series?") && !url.includes("label");
      if (isMatchAllSeries && release === null) {
        await new Promise<void>((resolve) => {
          release = resolve;
        });
      }
      return fetchFn(input);
    }) as typeof fetch;

    const { root, app } = await mount(gated);
    const slow = app.submit(matchAllState()); // series call hangs
    const fast = app.submit(fig16State()); // supersedes it
    await fast;
    release!();
    await slow;

    const polyline = root.querySelector(".series-panel polyline.series-line")!;
    const coords = polyline.getAttribute("points")!.trim().split(/\s+/);
    // the fig16 body stays on screen even though the older call finished later
    expect(coords.length).toBe(seriesFig16.body.total_points);
    expect(app.currentState().labels).toEqual(["software", "data"]);
  });
});

describe("per-capita scaling", () => {
  it("divides series values by the selected regions' population", async () => {
    const { fetchFn } = recordedFetch();
    const { root, app } = await mount(fetchFn);
    const state = fig16State();
    state.countMode = "per-capita";
    await app.submit(state);
    const yMax = root.querySelector(".series-panel .y-max")!.textContent!;
    const ukk4 = metaFixture.body.regions.find((r: { code: string }) => r.code === "UKK4")!;
    const maxCount = Math.max(...seriesFig16.body.points.map((p: { count: number }) => p.count));
    expect(yMax).toBe((maxCount / ukk4.population).toExponential(2));
    const label = root.querySelector(".series-panel .y-label")!.textContent!;
    expect(label).toContain("per person");
  });
});
