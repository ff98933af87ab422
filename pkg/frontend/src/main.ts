// Page wiring: three tabs (evidence / facets / convergence) over the audit
// service API. Every displayed number comes from a response field.

import { ApiClient, ApiError } from "./api.js";
import { renderConvergence } from "./render/convergence.js";
import { renderEvidence } from "./render/evidence.js";
import { renderFacetChart } from "./render/facets.js";
import { decodeState, encodeState, type Tab, type ViewState } from "./state.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showError(target: HTMLElement, err: unknown): void {
  const message =
    err instanceof ApiError ? err.message : err instanceof Error ? err.message : String(err);
  const banner = `<div class="error-banner">${message.replace(/</g, "&lt;")}</div>`;
  target.insertAdjacentHTML("afterbegin", banner);
}

function start(): void {
  const state: ViewState = decodeState(window.location.hash);
  const client = new ApiClient(
    (document.body.dataset.apiBase ?? "http://127.0.0.1:8080").replace(/\/$/, ""),
  );

  const apiBase = el<HTMLInputElement>("api-base");
  apiBase.value = client.baseUrl;
  apiBase.addEventListener("change", () => {
    client.baseUrl = apiBase.value.replace(/\/$/, "");
  });

  const queryInput = el<HTMLInputElement>("query-input");
  const strategySelect = el<HTMLSelectElement>("strategy-select");
  const kInput = el<HTMLInputElement>("k-input");
  queryInput.value = state.query;
  strategySelect.value = state.strategy;
  kInput.value = String(state.k);

  const panels: Record<Tab, HTMLElement> = {
    evidence: el("panel-evidence"),
    facets: el("panel-facets"),
    convergence: el("panel-convergence"),
  };

  function syncHash(): void {
    window.location.hash = encodeState(state);
  }

  function selectTab(tab: Tab): void {
    state.tab = tab;
    for (const [name, panel] of Object.entries(panels)) {
      panel.hidden = name !== tab;
      el(`tab-${name}`).classList.toggle("active", name === tab);
    }
    syncHash();
  }
  for (const tab of Object.keys(panels) as Tab[]) {
    el(`tab-${tab}`).addEventListener("click", () => selectTab(tab));
  }
  selectTab(state.tab);

  el("query-form").addEventListener("submit", (event) => {
    event.preventDefault();
    state.query = queryInput.value;
    state.strategy = strategySelect.value;
    state.k = Number(kInput.value) || 20;
    syncHash();
    const output = el("evidence-output");
    output.innerHTML = `<div class="loading">retrieving…</div>`;
    client
      .query({ use_case: state.query, k: state.k, strategy: state.strategy, filter: true })
      .then((response) => {
        if (response) output.innerHTML = renderEvidence(response);
      })
      .catch((err) => showError(output, err));
  });

  el("facet-form").addEventListener("submit", (event) => {
    event.preventDefault();
    const familyId = el<HTMLInputElement>("facet-family").value;
    const axis = el<HTMLInputElement>("facet-axis").value;
    const lines = el<HTMLTextAreaElement>("facet-lines").value.split("\n");
    const facets = lines
      .map((line) => line.split("|"))
      .filter((parts) => parts.length === 2)
      .map(([value, text]) => ({ value: value.trim(), text: text.trim() }));
    const output = el("facet-output");
    output.innerHTML = `<div class="loading">auditing facets…</div>`;
    client
      .auditFacets({ family: { family_id: familyId, axis, facets }, k: state.k })
      .then((report) => {
        if (report) output.innerHTML = renderFacetChart(report);
      })
      .catch((err) => showError(output, err));
  });

  el("convergence-form").addEventListener("submit", (event) => {
    event.preventDefault();
    const output = el("convergence-output");
    let retrieved: Record<string, string[]>;
    try {
      retrieved = JSON.parse(el<HTMLTextAreaElement>("retrieved-json").value);
    } catch (err) {
      showError(output, new Error(`retrieved sets must be JSON: ${err}`));
      return;
    }
    output.innerHTML = `<div class="loading">running trials…</div>`;
    client
      .auditConvergence({
        use_case_id: el<HTMLInputElement>("convergence-use-case").value,
        retrieved,
        trials: Number(el<HTMLInputElement>("trials-input").value) || 50,
        seed: Number(el<HTMLInputElement>("seed-input").value) || 0,
      })
      .then((report) => {
        if (report) output.innerHTML = renderConvergence(report);
      })
      .catch((err) => showError(output, err));
  });
}

document.addEventListener("DOMContentLoaded", start);
