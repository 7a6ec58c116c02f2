// Shapes shared between the form, the API client and the panels.

export interface DateRange {
  from: string; // ISO date, inclusive
  to: string; // ISO date, exclusive
}

export interface QueryFormState {
  labels: string[];
  regions: string[];
  range: DateRange;
  countMode: "raw" | "per-capita";
  categoryAxis: "contract" | "mode";
  compareA: DateRange | null;
  compareB: DateRange | null;
}

export function defaultState(): QueryFormState {
  return {
    labels: [],
    regions: [],
    range: { from: "2019-01-11", to: "2021-01-11" },
    countMode: "raw",
    categoryAxis: "contract",
    compareA: null,
    compareB: null,
  };
}

export interface SeriesPoint {
  date: string;
  count: number;
}

export interface SeriesResponse {
  filter: unknown;
  from: string;
  to: string;
  total_points: number;
  points: SeriesPoint[];
}

export interface SalaryBucket {
  lo: number;
  hi: number;
  count: number;
}

export interface SalaryResponse {
  count: number;
  excluded_missing_salary: number;
  mean: number | null;
  median: number | null;
  buckets: SalaryBucket[];
}

export interface ProportionsResponse {
  axis: string;
  counts: Record<string, number>;
  proportions: Record<string, number>;
  unknown_count: number;
  total: number;
}

export interface TermEntry {
  term: string;
  count: number;
}

export interface TopTermsResponse {
  n: number;
  scope: string;
  terms: TermEntry[];
}

export interface CompareResponse {
  period_a: { from: string; to: string; count: number };
  period_b: { from: string; to: string; count: number };
  deficit_fraction: number;
}

export interface RegionInfo {
  code: string;
  name: string;
  population: number;
}

export interface MetaResponse {
  labels: string[];
  regions: RegionInfo[];
  date_range: [string, string] | null;
  total_ads: number;
}

export interface EventMarker {
  date: string;
  caption: string;
}
