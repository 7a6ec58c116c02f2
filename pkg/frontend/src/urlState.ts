// Shareable links: the full query form state lives in the URL hash.

import { defaultState, type QueryFormState } from "./types";

export function encodeState(state: QueryFormState): string {
  const params = new URLSearchParams();
  if (state.labels.length) params.set("labels", state.labels.join(","));
  if (state.regions.length) params.set("regions", state.regions.join(","));
  params.set("from", state.range.from);
  params.set("to", state.range.to);
  params.set("count", state.countMode);
  params.set("axis", state.categoryAxis);
  if (state.compareA && state.compareB) {
    params.set("ca", `${state.compareA.from}..${state.compareA.to}`);
    params.set("cb", `${state.compareB.from}..${state.compareB.to}`);
  }
  return params.toString();
}

function parseRange(value: string | null): { from: string; to: string } | null {
  if (!value) return null;
  const parts = value.split("..");
  if (parts.length !== 2 || !parts[0] || !parts[1]) return null;
  return { from: parts[0], to: parts[1] };
}

export function decodeState(encoded: string): QueryFormState {
  const params = new URLSearchParams(encoded);
  const state = defaultState();
  const labels = params.get("labels");
  if (labels) state.labels = labels.split(",").filter(Boolean);
  const regions = params.get("regions");
  if (regions) state.regions = regions.split(",").filter(Boolean);
  const from = params.get("from");
  const to = params.get("to");
  if (from) state.range.from = from;
  if (to) state.range.to = to;
  const count = params.get("count");
  if (count === "per-capita" || count === "raw") state.countMode = count;
  const axis = params.get("axis");
  if (axis === "contract" || axis === "mode") state.categoryAxis = axis;
  const a = parseRange(params.get("ca"));
  const b = parseRange(params.get("cb"));
  if (a && b) {
    state.compareA = a;
    state.compareB = b;
  }
  return state;
}

export function stateToHash(state: QueryFormState): string {
  return `#${encodeState(state)}`;
}

export function stateFromLocation(hash: string): QueryFormState {
  return decodeState(hash.startsWith("#") ? hash.slice(1) : hash);
}
