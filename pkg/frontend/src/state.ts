// View state, round-tripped through the URL hash so audits are shareable.
// No other client-side persistence exists.

export type Tab = "evidence" | "facets" | "convergence";

export interface ViewState {
  query: string;
  strategy: string;
  k: number;
  tab: Tab;
}

export const DEFAULT_STATE: ViewState = {
  query: "",
  strategy: "example_synthesis",
  k: 20,
  tab: "evidence",
};

const TABS: Tab[] = ["evidence", "facets", "convergence"];

export function encodeState(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.query) params.set("q", state.query);
  params.set("strategy", state.strategy);
  params.set("k", String(state.k));
  params.set("tab", state.tab);
  return params.toString();
}

export function decodeState(hash: string): ViewState {
  const params = new URLSearchParams(hash.replace(/^#/, ""));
  const k = Number(params.get("k"));
  const tab = params.get("tab") as Tab | null;
  return {
    query: params.get("q") ?? DEFAULT_STATE.query,
    strategy: params.get("strategy") ?? DEFAULT_STATE.strategy,
    k: Number.isInteger(k) && k >= 1 ? k : DEFAULT_STATE.k,
    tab: tab && TABS.includes(tab) ? tab : DEFAULT_STATE.tab,
  };
}
