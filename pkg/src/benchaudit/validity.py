"""Validity diagnostics: facet coverage, rank statistics, Monte Carlo taus.

Rank agreement uses tie-corrected Kendall's tau,

    tau_b = (C - D) / sqrt((C + D + Tx) * (C + D + Ty)),

where C / D count concordant / discordant pairs and Tx / Ty count pairs
tied only in x / only in y. The three Monte Carlo estimators draw gold
subsamples without replacement; every trial derives its RNG stream from
(seed, trial index, model index) so serial and parallel execution produce
identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Collection, Mapping, NamedTuple, Sequence

import numpy as np
from scipy import special as sps
from scipy import stats as sstats

from .errors import ArgumentError, BenchAuditError, DegenerateError, ShapeError
from .gateways import run_parallel
from .judge import JudgedHit, RelevanceLabel

if TYPE_CHECKING:
    from .corpus import ModelRunSet, UseCase


# ---------------------------------------------------------------------------
# rank statistics


def kendall_tau(x: Sequence[float], y: Sequence[float]) -> float:
    """Tie-corrected (tau-b) Kendall rank correlation."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1 or xa.shape[0] < 2:
        raise ArgumentError("kendall_tau needs two aligned vectors of length >= 2")
    iu = np.triu_indices(xa.shape[0], k=1)
    sx = np.sign(xa[:, None] - xa[None, :])[iu]
    sy = np.sign(ya[:, None] - ya[None, :])[iu]
    if not np.any(sx) or not np.any(sy):
        raise DegenerateError("a margin is fully tied")
    product = sx * sy
    concordant = int(np.sum(product > 0))
    discordant = int(np.sum(product < 0))
    tied_x_only = int(np.sum((sx == 0) & (sy != 0)))
    tied_y_only = int(np.sum((sy == 0) & (sx != 0)))
    denom = math.sqrt(
        (concordant + discordant + tied_x_only)
        * (concordant + discordant + tied_y_only)
    )
    return (concordant - discordant) / denom


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of mid-ranks (ties receive average ranks)."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1 or xa.shape[0] < 2:
        raise ArgumentError("spearman_rho needs two aligned vectors of length >= 2")
    rx = sstats.rankdata(xa, method="average")
    ry = sstats.rankdata(ya, method="average")
    if np.std(rx) == 0.0 or np.std(ry) == 0.0:
        raise DegenerateError("a margin has zero variance")
    return float(np.corrcoef(rx, ry)[0, 1])


def fleiss_kappa(assignments: Sequence[Sequence[int]], raters_per_item: int) -> float:
    """Fleiss's kappa over an item x category count matrix."""
    if raters_per_item < 2:
        raise ArgumentError("raters_per_item must be >= 2")
    matrix = np.asarray(assignments, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise ShapeError("assignments must be a non-empty 2-d count matrix")
    if np.any(matrix < 0):
        raise ShapeError("counts must be non-negative")
    row_sums = matrix.sum(axis=1)
    if np.any(row_sums != raters_per_item):
        raise ShapeError(
            f"every row must sum to raters_per_item={raters_per_item}"
        )
    n = float(raters_per_item)
    per_item = ((matrix**2).sum(axis=1) - n) / (n * (n - 1.0))
    observed = float(per_item.mean())
    proportions = matrix.sum(axis=0) / matrix.sum()
    expected = float((proportions**2).sum())
    if expected == 1.0:
        raise DegenerateError("expected agreement is 1; kappa undefined")
    return (observed - expected) / (1.0 - expected)


def paired_t_test(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Two-sided paired t-test on the differences x - y.

    Returns (t, p) with p from the Student-t CDF at n-1 degrees of freedom.
    """
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1 or xa.shape[0] < 2:
        raise ArgumentError("paired_t_test needs two aligned vectors of length >= 2")
    diff = xa - ya
    sd = float(diff.std(ddof=1))
    if sd == 0.0:
        raise DegenerateError("differences have zero variance")
    n = diff.shape[0]
    t = float(diff.mean()) / (sd / math.sqrt(n))
    p = 2.0 * float(sps.stdtr(n - 1, -abs(t)))
    return t, p


# ---------------------------------------------------------------------------
# model-score aggregation


def aggregate_model_score(
    run: "ModelRunSet", model: str, items: Collection[str]
) -> float:
    """Arithmetic mean of the model's per-item scores over ``items``."""
    if not items:
        raise ArgumentError("item set must be non-empty")
    ordered = sorted(items)
    return float(np.mean([run.score(model, item) for item in ordered]))


def select_best_prompt(
    variants: Sequence[tuple[str, Collection[str]]], run: "ModelRunSet", model: str
) -> str:
    """Variant whose retrieved set maximizes the model's mean score.

    Ties break toward the lexicographically smaller prompt_id.
    """
    if not variants:
        raise ArgumentError("variants must be non-empty")
    scored = [
        (prompt_id, aggregate_model_score(run, model, items))
        for prompt_id, items in variants
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[0][0]


# ---------------------------------------------------------------------------
# Monte Carlo rank agreement


class TauEstimate(NamedTuple):
    """Mean tau over the non-degenerate Monte Carlo trials."""

    value: float
    trials: int
    skipped: int


def _trial_rng(seed: int, trial: int, model_index: int, draw: int = 0):
    return np.random.default_rng([seed, trial, model_index, draw])


def _score_table(run: "ModelRunSet", models: Sequence[str], items: Sequence[str]) -> np.ndarray:
    return np.asarray(
        [[run.score(m, item) for item in items] for m in models], dtype=np.float64
    )


def _mc_mean(trial_values: list[float | None], trials: int) -> TauEstimate:
    kept = [v for v in trial_values if v is not None]
    if not kept:
        raise DegenerateError("every Monte Carlo trial was degenerate")
    return TauEstimate(value=float(np.mean(kept)), trials=trials, skipped=trials - len(kept))


def tau_ret(
    run: "ModelRunSet",
    retrieved: Mapping[str, Collection[str]],
    gold: Collection[str],
    trials: int,
    seed: int,
    shared: bool = False,
    max_workers: int = 1,
) -> TauEstimate:
    """Agreement between the retrieved-set ranking and matched-budget gold rankings.

    Per trial, each model's gold pool is subsampled at that model's retrieved
    cardinality; the induced ranking is correlated against the fixed ranking
    from the retrieved sets. Degenerate trials are skipped and counted.
    """
    if trials < 1:
        raise ArgumentError("trials must be >= 1")
    if seed < 0:
        raise ArgumentError("seed must be non-negative")
    models = sorted(retrieved)
    if len(models) < 2:
        raise ArgumentError("need at least two models")
    gold_list = sorted(gold)
    sizes = {m: len(set(retrieved[m])) for m in models}
    if min(sizes.values()) < 1:
        raise ArgumentError("every retrieved set must be non-empty")
    if max(sizes.values()) > len(gold_list):
        raise ArgumentError("gold pool smaller than a retrieved set")
    if shared and len(set(sizes.values())) != 1:
        raise ArgumentError("shared subsampling needs equal retrieved sizes")
    retrieved_vec = np.asarray(
        [aggregate_model_score(run, m, retrieved[m]) for m in models]
    )
    gold_scores = _score_table(run, models, gold_list)

    def one_trial(trial: int) -> float | None:
        sub = np.empty(len(models), dtype=np.float64)
        shared_idx = None
        for mi, m in enumerate(models):
            if shared:
                if shared_idx is None:
                    shared_idx = _trial_rng(seed, trial, 0).choice(
                        len(gold_list), size=sizes[m], replace=False
                    )
                idx = shared_idx
            else:
                idx = _trial_rng(seed, trial, mi).choice(
                    len(gold_list), size=sizes[m], replace=False
                )
            sub[mi] = gold_scores[mi, idx].mean()
        try:
            return kendall_tau(retrieved_vec, sub)
        except DegenerateError:
            return None

    values = run_parallel(one_trial, list(range(trials)), max_workers)
    return _mc_mean(values, trials)


def tau_gold(
    run: "ModelRunSet",
    gold: Collection[str],
    subsample_size: int,
    trials: int,
    seed: int,
    shared: bool = False,
    max_workers: int = 1,
) -> TauEstimate:
    """Stability of the full-gold ranking against subsampled gold rankings."""
    if trials < 1:
        raise ArgumentError("trials must be >= 1")
    if seed < 0:
        raise ArgumentError("seed must be non-negative")
    models = list(run.model_ids)
    if len(models) < 2:
        raise ArgumentError("need at least two models")
    gold_list = sorted(gold)
    if not (2 <= subsample_size <= len(gold_list)):
        raise ArgumentError("subsample_size must lie in [2, |gold|]")
    gold_scores = _score_table(run, models, gold_list)
    full_vec = gold_scores.mean(axis=1)

    def one_trial(trial: int) -> float | None:
        sub = np.empty(len(models), dtype=np.float64)
        shared_idx = None
        for mi in range(len(models)):
            if shared:
                if shared_idx is None:
                    shared_idx = _trial_rng(seed, trial, 0).choice(
                        len(gold_list), size=subsample_size, replace=False
                    )
                idx = shared_idx
            else:
                idx = _trial_rng(seed, trial, mi).choice(
                    len(gold_list), size=subsample_size, replace=False
                )
            sub[mi] = gold_scores[mi, idx].mean()
        try:
            return kendall_tau(full_vec, sub)
        except DegenerateError:
            return None

    values = run_parallel(one_trial, list(range(trials)), max_workers)
    return _mc_mean(values, trials)


def tau_sanity(
    run: "ModelRunSet",
    gold: Collection[str],
    subsample_size: int,
    trials: int,
    seed: int,
    shared: bool = False,
    max_workers: int = 1,
) -> TauEstimate:
    """Repeatability of rankings between two independent gold subsamples."""
    if trials < 1:
        raise ArgumentError("trials must be >= 1")
    if seed < 0:
        raise ArgumentError("seed must be non-negative")
    models = list(run.model_ids)
    if len(models) < 2:
        raise ArgumentError("need at least two models")
    gold_list = sorted(gold)
    if not (2 <= subsample_size <= len(gold_list)):
        raise ArgumentError("subsample_size must lie in [2, |gold|]")
    gold_scores = _score_table(run, models, gold_list)

    def one_trial(trial: int) -> float | None:
        first = np.empty(len(models), dtype=np.float64)
        second = np.empty(len(models), dtype=np.float64)
        shared_idx: dict[int, np.ndarray] = {}
        for mi in range(len(models)):
            for draw, out in ((0, first), (1, second)):
                if shared:
                    if draw not in shared_idx:
                        shared_idx[draw] = _trial_rng(seed, trial, 0, draw).choice(
                            len(gold_list), size=subsample_size, replace=False
                        )
                    idx = shared_idx[draw]
                else:
                    idx = _trial_rng(seed, trial, mi, draw).choice(
                        len(gold_list), size=subsample_size, replace=False
                    )
                out[mi] = gold_scores[mi, idx].mean()
        try:
            return kendall_tau(first, second)
        except DegenerateError:
            return None

    values = run_parallel(one_trial, list(range(trials)), max_workers)
    return _mc_mean(values, trials)


def rank_divergence(tau_gold_value: float, tau_ret_value: float) -> float:
    """Rank divergence: tau_gold minus tau_ret."""
    return tau_gold_value - tau_ret_value


@dataclass(frozen=True)
class RankAgreementReport:
    """Convergent-validity summary for one use-case."""

    use_case_id: str
    tau_ret: float
    tau_gold: float
    tau_sanity: float
    delta: float
    trials: int
    seed: int
    retrieved_size: int
    gold_size: int
    skipped_trials: int = 0

    def __post_init__(self):
        if abs(self.delta - (self.tau_gold - self.tau_ret)) > 1e-12:
            raise ArgumentError("delta must equal tau_gold - tau_ret")
        if self.trials < 1:
            raise ArgumentError("trials must be >= 1")


# ---------------------------------------------------------------------------
# content validity (facet coverage)


@dataclass(frozen=True)
class FacetEntry:
    relevant_fraction: float
    retrieved_count: int
    relevant_count: int
    error: str | None = None


@dataclass(frozen=True)
class SkillFamily:
    """A base capability plus 2-6 facets varying along one axis."""

    family_id: str
    base_capability: str
    axis: str
    facets: tuple[tuple[str, "UseCase"], ...]

    def __post_init__(self):
        if not (2 <= len(self.facets) <= 6):
            raise ArgumentError("a skill family needs between 2 and 6 facets")
        values = [value for value, _ in self.facets]
        if len(set(values)) != len(values):
            raise ArgumentError("facet values must be pairwise distinct")
        for _, use_case in self.facets:
            if use_case.facet_family is not None and use_case.facet_family != self.family_id:
                raise ArgumentError(
                    f"use case {use_case.use_case_id!r} belongs to family "
                    f"{use_case.facet_family!r}, not {self.family_id!r}"
                )
            if use_case.facet_axis is not None and use_case.facet_axis != self.axis:
                raise ArgumentError(
                    f"use case {use_case.use_case_id!r} varies axis "
                    f"{use_case.facet_axis!r}, not {self.axis!r}"
                )


@dataclass
class FacetCoverageReport:
    family_id: str
    axis: str
    per_facet: dict[str, FacetEntry]
    spread: float

    def chart(self) -> list[dict]:
        """Plot-ready (facet, fraction) table in facet order."""
        return [
            {"facet": facet, "fraction": entry.relevant_fraction}
            for facet, entry in self.per_facet.items()
        ]


def facet_coverage(family: SkillFamily, pipeline, k: int) -> FacetCoverageReport:
    """Run the retrieve-filter-judge pipeline per facet and compare yields.

    ``relevant_fraction`` counts only fully relevant labels. A facet whose
    pipeline run fails gets an error entry instead of aborting the report.
    """
    if k < 1:
        raise ArgumentError("k must be >= 1")
    per_facet: dict[str, FacetEntry] = {}
    for value, use_case in family.facets:
        try:
            judged: list[JudgedHit] = pipeline.judged_hits(use_case, k)
        except BenchAuditError as exc:
            per_facet[value] = FacetEntry(0.0, 0, 0, error=str(exc))
            continue
        labeled = [j for j in judged if not j.judge_failed and j.label is not None]
        retrieved = len(labeled)
        relevant = sum(1 for j in labeled if j.label is RelevanceLabel.RELEVANT)
        fraction = relevant / retrieved if retrieved else 0.0
        per_facet[value] = FacetEntry(fraction, retrieved, relevant)
    fractions = [e.relevant_fraction for e in per_facet.values() if e.error is None]
    spread = (max(fractions) - min(fractions)) if fractions else 0.0
    return FacetCoverageReport(
        family_id=family.family_id, axis=family.axis, per_facet=per_facet, spread=spread
    )
