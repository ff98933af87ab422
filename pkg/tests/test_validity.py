from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from benchaudit.corpus import BenchmarkItem, Corpus, ModelRunSet, UseCase
from benchaudit.errors import ArgumentError, DegenerateError, ShapeError
from benchaudit.judge import JudgedHit, RelevanceLabel
from benchaudit.retrieval.results import RetrievalHit
from benchaudit.validity import (
    FacetCoverageReport,
    RankAgreementReport,
    SkillFamily,
    aggregate_model_score,
    facet_coverage,
    fleiss_kappa,
    kendall_tau,
    paired_t_test,
    rank_divergence,
    select_best_prompt,
    spearman_rho,
    tau_gold,
    tau_ret,
    tau_sanity,
)

from .oracles import kendall_reference

REL = RelevanceLabel.RELEVANT
PART = RelevanceLabel.PARTIALLY_RELEVANT
IRREL = RelevanceLabel.IRRELEVANT


def make_run(per_model_scores: dict[str, list[float]]) -> tuple[ModelRunSet, list[str]]:
    """Build a run set over a synthetic single-benchmark corpus."""
    n = len(next(iter(per_model_scores.values())))
    items = [BenchmarkItem(f"g{i:05d}", "gold", f"gold item {i}") for i in range(n)]
    corpus = Corpus(items)
    scores = {
        (model, items[i].item_id): values[i]
        for model, values in per_model_scores.items()
        for i in range(n)
    }
    return ModelRunSet(scores, corpus), [item.item_id for item in items]


class TestKendallTau:
    def test_identical(self):
        assert kendall_tau([1, 2, 3], [10, 20, 30]) == 1.0

    def test_reversed(self):
        assert kendall_tau([1, 2, 3, 4], [4, 3, 2, 1]) == -1.0

    def test_enumerated_example(self):
        assert kendall_tau([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(4 / 6)

    def test_all_tied_degenerate(self):
        with pytest.raises(DegenerateError):
            kendall_tau([1.0, 1.0, 1.0], [1, 2, 3])
        with pytest.raises(DegenerateError):
            kendall_tau([1, 2, 3], [5.0, 5.0, 5.0])

    @given(
        st.lists(st.integers(min_value=0, max_value=5), min_size=2, max_size=10),
        st.data(),
    )
    @settings(max_examples=200, deadline=None)
    def test_matches_pair_enumeration(self, x, data):
        y = data.draw(
            st.lists(
                st.integers(min_value=0, max_value=5), min_size=len(x), max_size=len(x)
            )
        )
        try:
            want = kendall_reference(x, y)
        except ZeroDivisionError:
            with pytest.raises(DegenerateError):
                kendall_tau(x, y)
            return
        assert kendall_tau(x, y) == want

    @given(st.lists(st.integers(min_value=0, max_value=6), min_size=2, max_size=9), st.data())
    @settings(max_examples=100, deadline=None)
    def test_monotone_transform_invariance(self, x, data):
        y = data.draw(
            st.lists(st.integers(min_value=0, max_value=6), min_size=len(x), max_size=len(x))
        )
        fx = [v * v for v in x]  # strictly increasing on non-negative ints
        try:
            base = kendall_tau(x, y)
        except DegenerateError:
            return
        assert kendall_tau(fx, y) == base


class TestSpearman:
    def test_identical(self):
        assert spearman_rho([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)

    def test_reversed(self):
        assert spearman_rho([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_hand_case(self):
        assert spearman_rho([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5, abs=1e-12)

    def test_zero_variance(self):
        with pytest.raises(DegenerateError):
            spearman_rho([1, 1, 1], [1, 2, 3])

    @given(st.lists(st.integers(min_value=0, max_value=6), min_size=2, max_size=9), st.data())
    @settings(max_examples=60, deadline=None)
    def test_monotone_transform_invariance(self, x, data):
        y = data.draw(
            st.lists(st.integers(min_value=0, max_value=6), min_size=len(x), max_size=len(x))
        )
        try:
            base = spearman_rho(x, y)
        except DegenerateError:
            return
        assert spearman_rho([v * v for v in x], y) == pytest.approx(base, abs=1e-12)


class TestFleissKappa:
    def test_perfect_agreement(self):
        matrix = [[3, 0], [0, 3], [3, 0], [0, 3]]
        assert fleiss_kappa(matrix, 3) == pytest.approx(1.0)

    def test_two_by_two_plus_one(self):
        assert fleiss_kappa([[2, 0], [0, 2]], 2) == pytest.approx(1.0)

    def test_two_by_two_minus_one(self):
        assert fleiss_kappa([[1, 1], [1, 1]], 2) == pytest.approx(-1.0)

    def test_row_sum_violation(self):
        with pytest.raises(ShapeError):
            fleiss_kappa([[2, 0], [1, 2]], 2)

    def test_degenerate_single_category(self):
        with pytest.raises(DegenerateError):
            fleiss_kappa([[2], [2]], 2)

    def test_raters_validation(self):
        with pytest.raises(ArgumentError):
            fleiss_kappa([[1, 0]], 1)

    def test_category_permutation_invariance(self):
        matrix = [[2, 1, 0], [0, 2, 1], [1, 1, 1], [3, 0, 0]]
        swapped = [[row[2], row[0], row[1]] for row in matrix]
        assert fleiss_kappa(swapped, 3) == pytest.approx(fleiss_kappa(matrix, 3))


class TestPairedT:
    def test_equal_vectors_degenerate(self):
        with pytest.raises(DegenerateError):
            paired_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])

    def test_mean_zero_differences(self):
        t, p = paired_t_test([1.0, 0.0], [0.0, 1.0])
        assert t == 0.0
        assert p == pytest.approx(1.0, abs=1e-9)

    def test_worked_example_against_quadrature(self):
        x = [2.0, 2.0, 2.0, 3.0]
        y = [1.0, 1.0, 1.0, 1.0]  # d = [1, 1, 1, 2]
        t, p = paired_t_test(x, y)
        assert t == pytest.approx(5.0, abs=1e-12)
        # independent numeric oracle: integrate the t density (3 dof) directly
        dof = 3

        def density(u):
            return (
                special.gamma((dof + 1) / 2)
                / (math.sqrt(dof * math.pi) * special.gamma(dof / 2))
                * (1 + u * u / dof) ** (-(dof + 1) / 2)
            )

        tail, _ = integrate.quad(density, 5.0, np.inf)
        assert p == pytest.approx(2 * tail, abs=1e-6)


class TestAggregation:
    def test_mean(self):
        run, ids = make_run({"m": [1, 0, 1, 1], "n": [0, 0, 0, 0]})
        assert aggregate_model_score(run, "m", ids) == 0.75
        assert aggregate_model_score(run, "n", ids) == 0.0

    def test_mixed_scores(self):
        run, ids = make_run({"m": [1.0, 0.5], "n": [0.0, 0.0]})
        assert aggregate_model_score(run, "m", ids) == 0.75

    def test_empty_items(self):
        run, _ = make_run({"m": [1.0], "n": [0.0]})
        with pytest.raises(ArgumentError):
            aggregate_model_score(run, "m", set())

    def test_missing_score(self):
        run, _ = make_run({"m": [1.0], "n": [0.0]})
        with pytest.raises(KeyError):
            aggregate_model_score(run, "m", {"missing"})


class TestBestPrompt:
    def test_single_variant(self):
        run, ids = make_run({"m": [1.0, 0.0], "n": [0.0, 0.0]})
        assert select_best_prompt([("p1", ids)], run, "m") == "p1"

    def test_higher_mean_wins(self):
        run, ids = make_run({"m": [1.0, 1.0, 0.0, 0.0, 1.0], "n": [0.0] * 5})
        variants = [("p1", ids[:2]), ("p2", ids[2:4])]  # means 1.0 vs 0.0
        assert select_best_prompt(variants, run, "m") == "p1"

    def test_tie_breaks_lexicographically(self):
        run, ids = make_run({"m": [1.0, 1.0], "n": [0.0, 0.0]})
        assert select_best_prompt([("pz", [ids[0]]), ("pa", [ids[1]])], run, "m") == "pa"

    def test_empty_variants(self):
        run, _ = make_run({"m": [1.0], "n": [0.0]})
        with pytest.raises(ArgumentError):
            select_best_prompt([], run, "m")


def planted_run(n_gold: int, p_a: float, p_b: float, seed: int, invert_on: set[str] = frozenset()):
    rng = np.random.default_rng(seed)
    ids = [f"g{i:05d}" for i in range(n_gold)]
    a_scores, b_scores = [], []
    for item_id in ids:
        if item_id in invert_on:
            a_scores.append(0.0)
            b_scores.append(1.0)
        else:
            a_scores.append(float(rng.random() < p_a))
            b_scores.append(float(rng.random() < p_b))
    run, _ = make_run({"model_a": a_scores, "model_b": b_scores})
    return run, ids


class TestTauEstimators:
    def test_tau_ret_planted_alignment(self):
        run, ids = planted_run(500, 0.9, 0.1, seed=2024)
        rng = np.random.default_rng(7)
        retrieved_items = [ids[i] for i in rng.choice(500, size=50, replace=False)]
        retrieved = {"model_a": retrieved_items, "model_b": retrieved_items}
        estimate = tau_ret(run, retrieved, ids, trials=50, seed=11)
        assert estimate.value >= 0.9
        assert abs(estimate.value - 1.0) <= 0.05

    def test_tau_ret_inverted(self):
        rng = np.random.default_rng(8)
        ids_all = [f"g{i:05d}" for i in range(500)]
        inverted = {ids_all[i] for i in rng.choice(500, size=50, replace=False)}
        run, ids = planted_run(500, 0.9, 0.1, seed=2025, invert_on=inverted)
        retrieved = {"model_a": sorted(inverted), "model_b": sorted(inverted)}
        estimate = tau_ret(run, retrieved, ids, trials=50, seed=13)
        assert estimate.value <= -0.9

    def test_tau_ret_deterministic(self):
        run, ids = planted_run(100, 0.8, 0.2, seed=5)
        retrieved = {"model_a": ids[:20], "model_b": ids[10:30]}
        first = tau_ret(run, retrieved, ids, trials=20, seed=3)
        second = tau_ret(run, retrieved, ids, trials=20, seed=3)
        assert first == second

    def test_tau_ret_serial_parallel_identical(self):
        run, ids = planted_run(100, 0.7, 0.3, seed=6)
        retrieved = {"model_a": ids[:25], "model_b": ids[25:50]}
        serial = tau_ret(run, retrieved, ids, trials=24, seed=4, max_workers=1)
        parallel = tau_ret(run, retrieved, ids, trials=24, seed=4, max_workers=6)
        assert serial == parallel

    def test_tau_ret_validation(self):
        run, ids = planted_run(20, 0.9, 0.1, seed=9)
        with pytest.raises(ArgumentError):
            tau_ret(run, {"model_a": ids[:5]}, ids, trials=5, seed=0)
        with pytest.raises(ArgumentError):
            tau_ret(run, {"model_a": ids, "model_b": ids[:25]}, ids[:10], trials=5, seed=0)
        with pytest.raises(ArgumentError):
            tau_ret(run, {"model_a": ids[:5], "model_b": ids[:5]}, ids, trials=0, seed=0)

    def test_tau_gold_full_subsample_is_one(self):
        run, ids = planted_run(40, 0.8, 0.2, seed=10)
        estimate = tau_gold(run, ids, subsample_size=40, trials=10, seed=1)
        assert estimate.value == 1.0
        assert estimate.skipped == 0

    def test_tau_gold_planted_separated(self):
        run, ids = planted_run(500, 0.9, 0.1, seed=2026)
        estimate = tau_gold(run, ids, subsample_size=50, trials=50, seed=21)
        assert estimate.value >= 0.95

    def test_tau_gold_determinism(self):
        run, ids = planted_run(60, 0.7, 0.4, seed=12)
        assert tau_gold(run, ids, 10, trials=15, seed=2) == tau_gold(
            run, ids, 10, trials=15, seed=2
        )

    def test_tau_sanity_full_subsample_is_one(self):
        run, ids = planted_run(40, 0.8, 0.2, seed=14)
        estimate = tau_sanity(run, ids, subsample_size=40, trials=8, seed=3)
        assert estimate.value == 1.0

    def test_tau_sanity_planted_separated(self):
        run, ids = planted_run(500, 0.9, 0.1, seed=2027)
        estimate = tau_sanity(run, ids, subsample_size=50, trials=50, seed=31)
        assert estimate.value >= 0.95

    def test_delta_shrinks_with_gold_size(self):
        # retrieved sampled uniformly from gold with well-separated abilities:
        # divergence should vanish at |gold| = 500
        run, ids = planted_run(500, 0.9, 0.1, seed=2028)
        rng = np.random.default_rng(17)
        sample = [ids[i] for i in rng.choice(500, size=50, replace=False)]
        retrieved = {"model_a": sample, "model_b": sample}
        ret = tau_ret(run, retrieved, ids, trials=50, seed=41)
        gold = tau_gold(run, ids, subsample_size=50, trials=50, seed=41)
        assert abs(rank_divergence(gold.value, ret.value)) <= 0.1

    def test_doubling_trials_stability(self):
        # two models -> every non-degenerate trial tau is exactly +/-1, so the
        # trial standard error is sqrt(1 - mean^2) / sqrt(T)
        rng = np.random.default_rng(50)
        a = np.clip(rng.uniform(0.45, 0.60, size=200), 0, 1)
        b = np.clip(rng.uniform(0.40, 0.55, size=200), 0, 1)
        run, ids = make_run({"model_a": list(a), "model_b": list(b)})
        short = tau_gold(run, ids, subsample_size=12, trials=60, seed=5)
        long = tau_gold(run, ids, subsample_size=12, trials=120, seed=5)
        se = math.sqrt(max(1e-12, 1.0 - short.value**2)) / math.sqrt(60 - short.skipped)
        assert abs(long.value - short.value) <= 3 * se + 1e-9

    def test_shared_mode_deterministic_and_valid(self):
        run, ids = planted_run(100, 0.8, 0.2, seed=60)
        retrieved = {"model_a": ids[:20], "model_b": ids[20:40]}
        shared = tau_ret(run, retrieved, ids, trials=10, seed=6, shared=True)
        assert -1.0 <= shared.value <= 1.0
        with pytest.raises(ArgumentError):
            tau_ret(
                run,
                {"model_a": ids[:20], "model_b": ids[:30]},
                ids,
                trials=5,
                seed=6,
                shared=True,
            )


class TestRankDivergence:
    def test_values(self):
        assert rank_divergence(0.8, 0.3) == pytest.approx(0.5)
        assert rank_divergence(0.4, 0.4) == 0.0
        assert rank_divergence(0.9, -0.5) == pytest.approx(1.4)

    def test_report_invariant(self):
        with pytest.raises(ArgumentError):
            RankAgreementReport(
                use_case_id="u",
                tau_ret=0.2,
                tau_gold=0.9,
                tau_sanity=0.9,
                delta=0.5,  # inconsistent
                trials=50,
                seed=0,
                retrieved_size=20,
                gold_size=100,
            )


class FakePipeline:
    """Returns canned labels keyed by use-case text."""

    def __init__(self, plan: dict[str, list[RelevanceLabel]]):
        self.plan = plan

    def judged_hits(self, use_case, k):
        labels = self.plan[use_case.text][:k]
        return [
            JudgedHit(
                hit=RetrievalHit(item_id=f"i{n}", score=1.0 - n * 0.01, anchor_index=0, rank=n + 1),
                benchmark_id="b",
                selection=1,
                label=label,
            )
            for n, label in enumerate(labels)
        ]


class TestFacetCoverage:
    def family(self, values_and_texts):
        return SkillFamily(
            family_id="fam",
            base_capability="cap",
            axis="axis",
            facets=tuple(
                (value, UseCase(use_case_id=f"u-{value}", text=text))
                for value, text in values_and_texts
            ),
        )

    def test_identical_facets_zero_spread(self):
        plan = {"same query": [REL] * 10}
        family = self.family([("a", "same query"), ("b", "same query")])
        report = facet_coverage(family, FakePipeline(plan), k=10)
        entries = list(report.per_facet.values())
        assert entries[0].relevant_fraction == entries[1].relevant_fraction
        assert report.spread == pytest.approx(0.0, abs=1e-12)

    def test_planted_imbalance_ordering(self):
        plan = {
            "python": [REL] * 9 + [PART],
            "go": [REL] * 1 + [PART] * 9,
        }
        family = self.family([("python", "python"), ("go", "go")])
        report = facet_coverage(family, FakePipeline(plan), k=10)
        assert (
            report.per_facet["python"].relevant_fraction
            > report.per_facet["go"].relevant_fraction
        )

    def test_paper_style_spread(self):
        plan = {
            "python": [REL] * 867 + [IRREL] * 133,
            "go": [REL] * 100 + [IRREL] * 900,
        }
        family = self.family([("python", "python"), ("go", "go")])
        report = facet_coverage(family, FakePipeline(plan), k=1000)
        assert report.per_facet["python"].relevant_fraction == pytest.approx(0.867)
        assert report.per_facet["go"].relevant_fraction == pytest.approx(0.100)
        assert report.spread == pytest.approx(0.767, abs=1e-12)

    def test_spread_invariant_under_reordering(self):
        plan = {"a": [REL] * 5, "b": [PART] * 5, "c": [REL, IRREL, REL, IRREL, REL]}
        fam1 = self.family([("a", "a"), ("b", "b"), ("c", "c")])
        fam2 = self.family([("c", "c"), ("a", "a"), ("b", "b")])
        pipeline = FakePipeline(plan)
        assert facet_coverage(fam1, pipeline, 5).spread == pytest.approx(
            facet_coverage(fam2, pipeline, 5).spread
        )

    def test_family_validation(self):
        with pytest.raises(ArgumentError):
            self.family([("only", "one")])
        with pytest.raises(ArgumentError):
            self.family([("dup", "x"), ("dup", "y")])
        with pytest.raises(ArgumentError):
            self.family([(f"f{i}", "t") for i in range(7)])

    def test_pipeline_failure_partial_report(self):
        class FailingPipeline(FakePipeline):
            def judged_hits(self, use_case, k):
                if use_case.text == "bad":
                    from benchaudit.errors import GatewayError

                    raise GatewayError("backend down")
                return super().judged_hits(use_case, k)

        plan = {"good": [REL] * 5}
        family = self.family([("good", "good"), ("bad", "bad")])
        report = facet_coverage(family, FailingPipeline(plan), k=5)
        assert report.per_facet["bad"].error is not None
        assert report.per_facet["good"].error is None

    def test_chart_order(self):
        plan = {"a": [REL] * 2, "b": [IRREL] * 2}
        family = self.family([("a", "a"), ("b", "b")])
        chart = facet_coverage(family, FakePipeline(plan), 2).chart()
        assert [row["facet"] for row in chart] == ["a", "b"]
