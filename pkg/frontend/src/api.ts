// Typed client for the /v1 query API. The dashboard talks to the backend
// exclusively through this module, so the contract tests can replay
// recorded responses by stubbing one fetch function.

import type {
  CompareResponse,
  DateRange,
  MetaResponse,
  ProportionsResponse,
  QueryFormState,
  SalaryResponse,
  SeriesResponse,
  TopTermsResponse,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`API error ${status}: ${detail}`);
  }
}

export class ApiUnreachable extends Error {
  constructor(cause: unknown) {
    super(`API unreachable: ${String(cause)}`);
  }
}

function filterParams(state: QueryFormState): [string, string][] {
  const params: [string, string][] = [];
  for (const label of state.labels) params.push(["label", label]);
  for (const region of state.regions) params.push(["region", region]);
  return params;
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: typeof fetch = fetch,
  ) {}

  private async get<T>(path: string, params: [string, string][]): Promise<T> {
    const search = new URLSearchParams(params);
    const url = `${this.baseUrl}${path}?${search.toString()}`;
    let resp: Response;
    try {
      resp = await this.fetchFn(url);
    } catch (err) {
      throw new ApiUnreachable(err);
    }
    let body: unknown;
    try {
      body = await resp.json();
    } catch {
      body = {};
    }
    if (!resp.ok) {
      const detail = (body as { detail?: unknown }).detail;
      throw new ApiError(resp.status, typeof detail === "string" ? detail : JSON.stringify(detail));
    }
    return body as T;
  }

  series(state: QueryFormState): Promise<SeriesResponse> {
    const params = [
      ["from", state.range.from] as [string, string],
      ["to", state.range.to] as [string, string],
      ...filterParams(state),
    ];
    return this.get<SeriesResponse>("/v1/series", params);
  }

  salary(state: QueryFormState): Promise<SalaryResponse> {
    const params = [
      ["from", state.range.from] as [string, string],
      ["to", state.range.to] as [string, string],
      ...filterParams(state),
    ];
    return this.get<SalaryResponse>("/v1/salary", params);
  }

  proportions(state: QueryFormState): Promise<ProportionsResponse> {
    const params = [
      ["axis", state.categoryAxis] as [string, string],
      ["from", state.range.from] as [string, string],
      ["to", state.range.to] as [string, string],
      ...filterParams(state).filter(([k]) => k === "label" || k === "region"),
    ];
    return this.get<ProportionsResponse>("/v1/proportions", params);
  }

  topTerms(state: QueryFormState, n = 20): Promise<TopTermsResponse> {
    const params = [
      ["n", String(n)] as [string, string],
      ["scope", "titles_only"] as [string, string],
      ["from", state.range.from] as [string, string],
      ["to", state.range.to] as [string, string],
      ...filterParams(state),
    ];
    return this.get<TopTermsResponse>("/v1/top-terms", params);
  }

  compare(state: QueryFormState, a: DateRange, b: DateRange): Promise<CompareResponse> {
    const params = [
      ["from_a", a.from] as [string, string],
      ["to_a", a.to] as [string, string],
      ["from_b", b.from] as [string, string],
      ["to_b", b.to] as [string, string],
      ...filterParams(state),
    ];
    return this.get<CompareResponse>("/v1/compare", params);
  }

  meta(): Promise<MetaResponse> {
    return this.get<MetaResponse>("/v1/meta", []);
  }
}
