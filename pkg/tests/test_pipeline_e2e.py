"""End-to-end stub pipeline over the committed 200-item fixture corpus."""

from __future__ import annotations

import json

import pytest

from benchaudit.anchors import AnchorStrategy, validate_shorthand
from benchaudit.corpus import UseCase, load_use_cases
from benchaudit.errors import ArgumentError, StateError
from benchaudit.retrieval.results import RetrievalHit, check_hit_ordering
from benchaudit.validity import SkillFamily, facet_coverage

from .conftest import FIXTURES


def snapshot(response) -> dict:
    return {
        "strategy": response.strategy.value,
        "anchors": list(response.anchors),
        "hits": [
            {
                "rank": j.hit.rank,
                "item_id": j.item_id,
                "benchmark": j.benchmark_id,
                "score": round(j.hit.score, 9),
                "selection": j.selection,
                "label": j.label.value if j.label else None,
            }
            for j in response.hits
        ],
        "summary": {
            "method_precision": response.summary.method_precision,
            "system_precision": response.summary.system_precision,
            "judged": response.summary.judged,
            "failed": response.summary.failed,
        },
    }


@pytest.fixture(scope="module")
def use_cases():
    return {c.use_case_id: c for c in load_use_cases(FIXTURES / "use_cases.jsonl")}


class TestGoldenQueries:
    @pytest.mark.parametrize("strategy", [s.value for s in AnchorStrategy])
    def test_matches_committed_golden(self, fixture_pipeline, use_cases, strategy):
        golden = json.loads((FIXTURES / "golden_queries.json").read_text())
        response = fixture_pipeline.query(
            use_cases["uc-python"], k=20, strategy=AnchorStrategy(strategy)
        )
        assert snapshot(response) == golden[strategy]

    @pytest.mark.parametrize("strategy", [s.value for s in AnchorStrategy])
    def test_invariants_every_strategy(self, fixture_pipeline, use_cases, strategy):
        strategy = AnchorStrategy(strategy)
        response = fixture_pipeline.query(use_cases["uc-python"], k=20, strategy=strategy)
        expected_anchors = 1 if strategy in (AnchorStrategy.ORIGINAL, AnchorStrategy.SHORTHAND) else 3
        assert len(response.anchors) == expected_anchors
        if strategy is AnchorStrategy.SHORTHAND:
            validate_shorthand(response.anchors[0])
        hits = [j.hit for j in response.hits]
        check_hit_ordering(hits)
        assert len(hits) <= 20
        assert all(j.selection in (1, 0) for j in response.hits)
        assert response.timings.total_ms > 0
        assert response.timings.anchor_ms > 0
        assert response.timings.search_ms > 0

    def test_repeat_run_identical(self, fixture_pipeline, use_cases):
        first = fixture_pipeline.query(use_cases["uc-python"], k=20, strategy="example_synthesis")
        second = fixture_pipeline.query(use_cases["uc-python"], k=20, strategy="example_synthesis")
        assert snapshot(first) == snapshot(second)


class TestEngines:
    def test_lexical_engine(self, fixture_pipeline, use_cases):
        response = fixture_pipeline.query(
            use_cases["uc-python"], k=10, strategy="original", engine="lexical"
        )
        assert response.hits
        assert all(j.benchmark_id == "pycode" for j in response.hits)

    def test_random_engine_seeded(self, fixture_pipeline, use_cases):
        first = fixture_pipeline.query(
            use_cases["uc-python"], k=10, strategy="original", engine="random", seed=5
        )
        second = fixture_pipeline.query(
            use_cases["uc-python"], k=10, strategy="original", engine="random", seed=5
        )
        assert [j.item_id for j in first.hits] == [j.item_id for j in second.hits]

    def test_unknown_engine(self, fixture_pipeline, use_cases):
        with pytest.raises(ArgumentError):
            fixture_pipeline.query(use_cases["uc-python"], k=5, engine="warp")

    def test_missing_index_is_state_error(self, fixture_pipeline, use_cases):
        import dataclasses

        bare = dataclasses.replace(fixture_pipeline, dense_shorthand=None)
        with pytest.raises(StateError):
            bare.query(use_cases["uc-python"], k=5, strategy="shorthand")


class TestFacetAudit:
    def test_planted_imbalance_ordering(self, fixture_pipeline, use_cases):
        family = SkillFamily(
            family_id="coding",
            base_capability="coding exercises",
            axis="language",
            facets=(
                ("python", use_cases["uc-python"]),
                ("golang", use_cases["uc-go"]),
            ),
        )
        report = facet_coverage(family, fixture_pipeline, k=20)
        python = report.per_facet["python"]
        golang = report.per_facet["golang"]
        # 60 python items vs 6 golang items in the corpus: the scarce facet
        # fills its top-k with partially relevant neighbours
        assert python.relevant_fraction > golang.relevant_fraction
        assert python.relevant_fraction == 1.0
        assert golang.relevant_count == 6
        assert report.spread == pytest.approx(
            python.relevant_fraction - golang.relevant_fraction
        )

    def test_no_filter_flag(self, fixture_pipeline, use_cases):
        response = fixture_pipeline.query(
            use_cases["uc-python"], k=10, strategy="original", apply_filter=False
        )
        assert all(j.selection is None and j.label is None for j in response.hits)
        assert response.summary is None


class TestDeadline:
    def test_exceeded_deadline_surfaces_as_gateway_error(self, fixture_pipeline, use_cases):
        import dataclasses

        from benchaudit.errors import GatewayError

        strict = dataclasses.replace(fixture_pipeline, deadline_seconds=0.0)
        with pytest.raises(GatewayError):
            strict.query(use_cases["uc-python"], k=5, strategy="original")

    def test_default_deadline_is_generous(self, fixture_pipeline):
        assert fixture_pipeline.deadline_seconds == 120.0
