import { describe, expect, it } from "vitest";

import { lineChart } from "../src/charts";
import { eventsInRange, loadEvents } from "../src/events";

const POINTS = [
  { date: "2020-03-15", value: 10 },
  { date: "2020-03-16", value: 12 },
  { date: "2020-03-17", value: 9 },
];

describe("event annotations", () => {
  it("bundled events file parses and is dated", () => {
    const events = loadEvents();
    expect(events.length).toBeGreaterThan(0);
    for (const event of events) {
      expect(event.date).toMatch(/^\d{4}-\d{2}-\d{2}$/);
      expect(event.caption.length).toBeGreaterThan(0);
    }
  });

  it("filters events to the queried range", () => {
    const events = loadEvents();
    const inside = eventsInRange(events, "2020-03-01", "2020-04-01");
    expect(inside.map((e) => e.date)).toContain("2020-03-16");
    expect(inside.every((e) => e.date >= "2020-03-01" && e.date < "2020-04-01")).toBe(true);
  });

  it("renders a marker for an event inside the range", () => {
    const svg = lineChart(POINTS, [{ date: "2020-03-16", caption: "travel advice" }], "ads");
    const markers = svg.querySelectorAll(".event-marker");
    expect(markers.length).toBe(1);
    expect(markers[0].getAttribute("data-caption")).toBe("travel advice");
  });

  it("hides events outside the charted dates", () => {
    const svg = lineChart(POINTS, [{ date: "2020-07-04", caption: "later" }], "ads");
    expect(svg.querySelectorAll(".event-marker").length).toBe(0);
  });

  it("renders no markers for an empty events list", () => {
    const svg = lineChart(POINTS, [], "ads");
    expect(svg.querySelectorAll(".event-marker").length).toBe(0);
  });
});
