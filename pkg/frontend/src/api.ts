// Typed client for the audit service. Each tab keeps at most one request in
// flight: issuing a new one aborts the previous and stale responses are
// discarded by token.

import type {
  BenchmarkSummary,
  FacetCoverageReport,
  QueryResponse,
  RankAgreementReport,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private tokens = new Map<string, number>();
  private controllers = new Map<string, AbortController>();

  constructor(
    public baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  /** POST to one endpoint on behalf of a tab; stale responses resolve to null. */
  async post<T>(tab: string, path: string, body: unknown): Promise<T | null> {
    const token = (this.tokens.get(tab) ?? 0) + 1;
    this.tokens.set(tab, token);
    this.controllers.get(tab)?.abort();
    const controller = new AbortController();
    this.controllers.set(tab, controller);

    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
        signal: controller.signal,
      });
    } catch (err) {
      if (this.tokens.get(tab) !== token) return null; // superseded
      throw err;
    }
    if (this.tokens.get(tab) !== token) return null; // superseded
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const payload = (await response.json()) as { detail?: string };
        if (payload.detail) detail = payload.detail;
      } catch {
        // keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  query(body: {
    use_case: string;
    k: number;
    strategy: string;
    filter?: boolean;
    engine?: string;
  }): Promise<QueryResponse | null> {
    return this.post<QueryResponse>("evidence", "/v1/query", body);
  }

  auditFacets(body: {
    family: {
      family_id: string;
      base_capability?: string;
      axis: string;
      facets: Array<{ value: string; text: string }>;
    };
    k: number;
  }): Promise<FacetCoverageReport | null> {
    return this.post<FacetCoverageReport>("facets", "/v1/audit/facets", body);
  }

  auditConvergence(body: {
    use_case_id: string;
    retrieved: Record<string, string[]>;
    trials: number;
    seed: number;
  }): Promise<RankAgreementReport | null> {
    return this.post<RankAgreementReport>("convergence", "/v1/audit/convergence", body);
  }

  async benchmarks(): Promise<BenchmarkSummary[]> {
    const response = await this.fetchImpl(this.baseUrl + "/v1/benchmarks");
    if (!response.ok) throw new ApiError(response.status, response.statusText);
    const payload = (await response.json()) as { benchmarks: BenchmarkSummary[] };
    return payload.benchmarks;
  }
}
