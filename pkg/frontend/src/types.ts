// Response shapes of the audit service API. The console renders these
// verbatim; it never derives metrics of its own.

export interface StageTimings {
  anchor_ms: number;
  embed_ms: number;
  search_ms: number;
  filter_ms: number;
  total_ms: number;
}

export interface JudgedHit {
  item_id: string;
  benchmark: string;
  score: number;
  selection: number | null;
  label: string | null; // relevant | partially_relevant | irrelevant | judge_failed
  judge_id: string;
  rank: number;
  anchor_index: number;
  text: string;
}

export interface QuerySummary {
  k: number;
  method_precision: number | null;
  system_precision: number | null;
  judged: number;
  failed: number;
}

export interface QueryResponse {
  use_case: string;
  strategy: string;
  engine: string;
  anchors: string[];
  hits: JudgedHit[];
  timings: StageTimings;
  summary?: QuerySummary;
}

export interface FacetEntry {
  relevant_fraction: number;
  retrieved_count: number;
  relevant_count: number;
  error: string | null;
}

export interface FacetCoverageReport {
  family_id: string;
  axis: string;
  per_facet: Record<string, FacetEntry>;
  spread: number;
  chart: Array<{ facet: string; fraction: number }>;
}

export interface RankAgreementReport {
  use_case_id: string;
  tau_ret: number;
  tau_gold: number;
  tau_sanity: number;
  delta: number;
  trials: number;
  seed: number;
  retrieved_size: number;
  gold_size: number;
  skipped_trials: number;
}

export interface BenchmarkSummary {
  benchmark_id: string;
  name: string;
  metric_kind: string;
  item_count: number;
}
