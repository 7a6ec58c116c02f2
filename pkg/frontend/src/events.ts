// Chart annotations come from a bundled, editable JSON file.

import bundled from "./events.json";
import type { EventMarker } from "./types";

export function loadEvents(): EventMarker[] {
  return (bundled as EventMarker[]).slice();
}

export function eventsInRange(
  events: EventMarker[],
  from: string,
  to: string,
): EventMarker[] {
  return events.filter((e) => e.date >= from && e.date < to);
}
