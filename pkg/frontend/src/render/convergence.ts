// Convergence view: tau_gold vs tau_ret on a shared [-1, 1] axis with the
// divergence band between them; trials and seed shown for reproducibility.

import { esc } from "../html.js";
import type { RankAgreementReport } from "../types.js";

function toAxis(tau: number): number {
  return ((tau + 1) / 2) * 100; // [-1, 1] -> [0, 100]
}

export function renderConvergence(report: RankAgreementReport): string {
  const left = Math.min(toAxis(report.tau_ret), toAxis(report.tau_gold));
  const width = Math.abs(toAxis(report.tau_gold) - toAxis(report.tau_ret));
  const skipped =
    report.skipped_trials > 0
      ? `<div class="warn skipped-note">${report.skipped_trials} degenerate trial(s) skipped</div>`
      : "";
  return [
    `<h3>rank agreement for ${esc(report.use_case_id)}</h3>`,
    `<div class="tau-axis">`,
    `<div class="divergence-band" style="left: ${left.toFixed(2)}%; width: ${width.toFixed(2)}%"></div>`,
    `<div class="tau-marker tau-ret" style="left: ${toAxis(report.tau_ret).toFixed(2)}%" title="tau_ret ${report.tau_ret.toFixed(3)}"></div>`,
    `<div class="tau-marker tau-gold" style="left: ${toAxis(report.tau_gold).toFixed(2)}%" title="tau_gold ${report.tau_gold.toFixed(3)}"></div>`,
    `</div>`,
    `<table class="tau-table"><tbody>`,
    `<tr><th>tau_ret</th><td>${report.tau_ret.toFixed(3)}</td><td>retrieved vs matched-budget gold</td></tr>`,
    `<tr><th>tau_gold</th><td>${report.tau_gold.toFixed(3)}</td><td>full gold vs subsampled gold</td></tr>`,
    `<tr><th>tau_sanity</th><td>${report.tau_sanity.toFixed(3)}</td><td>subset vs subset repeatability</td></tr>`,
    `<tr class="delta-row"><th>divergence Δ</th><td>${report.delta.toFixed(3)}</td><td>tau_gold − tau_ret</td></tr>`,
    `</tbody></table>`,
    skipped,
    `<footer class="repro">trials ${report.trials} · seed ${report.seed} · ` +
      `subsample ${report.retrieved_size} of ${report.gold_size} gold items</footer>`,
  ].join("\n");
}
