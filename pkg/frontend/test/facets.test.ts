import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { renderFacetChart } from "../src/render/facets.js";
import type { FacetCoverageReport } from "../src/types.js";

function fixture(name: string): FacetCoverageReport {
  return JSON.parse(readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf-8"));
}

describe("facet chart", () => {
  it("matches the recorded stub-mode snapshot", () => {
    expect(renderFacetChart(fixture("facet_report.json"))).toMatchSnapshot();
  });

  it("renders the six reference facets as bars with the reported heights in order", () => {
    const report = fixture("facet_report_table5.json");
    const html = renderFacetChart(report);
    expect(html).toMatchSnapshot();
    const bars = [...html.matchAll(/data-facet="([^"]+)" data-fraction="([^"]+)"/g)];
    expect(bars.map((m) => m[1])).toEqual(["Python", "C++", "Rust", "JavaScript", "Java", "Go"]);
    expect(bars.map((m) => Number(m[2]))).toEqual([0.867, 0.741, 0.478, 0.346, 0.286, 0.1]);
    const heights = [...html.matchAll(/style="height: ([0-9.]+)%"/g)].map((m) => Number(m[1]));
    expect(heights).toEqual([86.7, 74.1, 47.8, 34.6, 28.6, 10.0]);
    expect(html).toContain("spread 76.7%");
  });

  it("renders equal-height bars when the spread is zero", () => {
    const report: FacetCoverageReport = {
      family_id: "fam",
      axis: "axis",
      per_facet: {
        a: { relevant_fraction: 0.6, retrieved_count: 10, relevant_count: 6, error: null },
        b: { relevant_fraction: 0.6, retrieved_count: 10, relevant_count: 6, error: null },
      },
      spread: 0,
      chart: [
        { facet: "a", fraction: 0.6 },
        { facet: "b", fraction: 0.6 },
      ],
    };
    const html = renderFacetChart(report);
    const heights = [...html.matchAll(/style="height: ([0-9.]+)%"/g)].map((m) => m[1]);
    expect(heights).toEqual(["60.00", "60.00"]);
    expect(html).toContain("spread 0.0%");
  });

  it("flags facets whose pipeline run failed", () => {
    const report: FacetCoverageReport = {
      family_id: "fam",
      axis: "axis",
      per_facet: {
        ok: { relevant_fraction: 0.5, retrieved_count: 10, relevant_count: 5, error: null },
        broken: { relevant_fraction: 0, retrieved_count: 0, relevant_count: 0, error: "backend down" },
      },
      spread: 0,
      chart: [
        { facet: "ok", fraction: 0.5 },
        { facet: "broken", fraction: 0 },
      ],
    };
    const html = renderFacetChart(report);
    expect(html).toContain("bar-error");
    expect(html).toContain("failed: backend down");
  });
});
