// Facet-coverage chart: one bar per facet in report order, bar height equal
// to the relevant fraction, with the spread annotated. Facets whose pipeline
// run failed are flagged instead of charted.

import { esc, pct } from "../html.js";
import type { FacetCoverageReport } from "../types.js";

export function renderFacetChart(report: FacetCoverageReport): string {
  const bars = report.chart
    .map(({ facet, fraction }) => {
      const entry = report.per_facet[facet];
      if (entry && entry.error) {
        return (
          `<div class="bar bar-error" data-facet="${esc(facet)}" title="${esc(entry.error)}">` +
          `<span class="bar-flag">!</span>` +
          `<span class="bar-label">${esc(facet)}</span>` +
          `</div>`
        );
      }
      const height = Math.max(1, fraction * 100).toFixed(2);
      return (
        `<div class="bar" data-facet="${esc(facet)}" data-fraction="${fraction}" ` +
        `style="height: ${height}%" title="${esc(facet)}: ${pct(fraction)}">` +
        `<span class="bar-value">${pct(fraction)}</span>` +
        `<span class="bar-label">${esc(facet)}</span>` +
        `</div>`
      );
    })
    .join("");
  const counts = report.chart
    .map(({ facet }) => {
      const entry = report.per_facet[facet];
      if (!entry) return "";
      const detail = entry.error
        ? `failed: ${esc(entry.error)}`
        : `${entry.relevant_count} relevant of ${entry.retrieved_count} retrieved`;
      return `<li><strong>${esc(facet)}</strong> · ${detail}</li>`;
    })
    .join("");
  return [
    `<h3>${esc(report.family_id)} <span class="axis">· varies ${esc(report.axis)}</span></h3>`,
    `<div class="spread-note">spread ${pct(report.spread)} between best and worst facet</div>`,
    `<div class="bar-chart">${bars}</div>`,
    `<ul class="facet-counts">${counts}</ul>`,
  ].join("\n");
}
