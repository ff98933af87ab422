// Evidence view: the retrieved items grouped by source benchmark, with
// label badges, similarity scores, and the per-stage timing footer. All
// numbers come straight from the response (the precision readout is the
// server-computed summary, which already excludes judge_failed items).

import { esc, pct } from "../html.js";
import type { JudgedHit, QueryResponse } from "../types.js";

const BADGES: Record<string, string> = {
  relevant: "badge-relevant",
  partially_relevant: "badge-partial",
  irrelevant: "badge-irrelevant",
  judge_failed: "badge-failed",
};

function badge(hit: JudgedHit): string {
  const label = hit.label ?? "unjudged";
  const cls = BADGES[label] ?? "badge-unjudged";
  return `<span class="badge ${cls}">${esc(label.replace(/_/g, " "))}</span>`;
}

function hitRow(hit: JudgedHit): string {
  return [
    `<li class="hit">`,
    `<span class="hit-rank">#${hit.rank}</span>`,
    badge(hit),
    `<span class="hit-score">${hit.score.toFixed(4)}</span>`,
    `<span class="hit-id">${esc(hit.item_id)}</span>`,
    `<p class="hit-text">${esc(hit.text)}</p>`,
    `</li>`,
  ].join("");
}

export function renderEvidence(response: QueryResponse): string {
  if (response.hits.length === 0) {
    return `<div class="empty-state">No evidence retrieved for this use-case. Try a broader phrasing or another strategy.</div>`;
  }
  const groups = new Map<string, JudgedHit[]>();
  for (const hit of response.hits) {
    const bucket = groups.get(hit.benchmark);
    if (bucket) bucket.push(hit);
    else groups.set(hit.benchmark, [hit]);
  }
  const sections: string[] = [];
  for (const [benchmark, hits] of groups) {
    sections.push(
      `<section class="benchmark-group" data-benchmark="${esc(benchmark)}">` +
        `<h3>${esc(benchmark)} <span class="group-count">${hits.length}</span></h3>` +
        `<ul>${hits.map(hitRow).join("")}</ul>` +
        `</section>`,
    );
  }
  const summary = response.summary
    ? `<div class="precision-readout">` +
      `system precision ${response.summary.system_precision === null ? "–" : pct(response.summary.system_precision)}` +
      ` · judged ${response.summary.judged}` +
      (response.summary.failed > 0
        ? ` · <span class="warn">${response.summary.failed} judgment(s) failed</span>`
        : "") +
      `</div>`
    : "";
  const anchors = response.anchors
    .map((anchor) => `<li class="anchor">${esc(anchor)}</li>`)
    .join("");
  const t = response.timings;
  return [
    `<div class="anchors"><h3>anchors (${esc(response.strategy)})</h3><ul>${anchors}</ul></div>`,
    summary,
    sections.join(""),
    `<footer class="timings">anchor ${t.anchor_ms.toFixed(1)}ms · embed ${t.embed_ms.toFixed(1)}ms · ` +
      `search ${t.search_ms.toFixed(1)}ms · filter ${t.filter_ms.toFixed(1)}ms · total ${t.total_ms.toFixed(1)}ms</footer>`,
  ].join("\n");
}
