"""Two-tier relevance judging of retrieved hits.

The coarse selection filter scores each hit 1 / 0 / -1 and drops only the
-1 ("obviously unrelated") items; the graded evaluation judge then labels
survivors relevant / partially relevant / irrelevant. Judgments whose output
cannot be parsed after one re-ask are flagged ``judge_failed`` and excluded
from metric denominators rather than being coerced to a label.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING, Sequence

from . import gateways
from .errors import ArgumentError, ResponseFormatError
from .retrieval.results import RetrievalHit

if TYPE_CHECKING:
    from .corpus import Corpus, UseCase
    from .gateways import CompletionGateway


class RelevanceLabel(str, Enum):
    RELEVANT = "relevant"
    PARTIALLY_RELEVANT = "partially_relevant"
    IRRELEVANT = "irrelevant"


LABEL_VALUES = {
    RelevanceLabel.RELEVANT: 1.0,
    RelevanceLabel.PARTIALLY_RELEVANT: 0.5,
    RelevanceLabel.IRRELEVANT: 0.0,
}


@dataclass(frozen=True)
class JudgedHit:
    """A retrieved hit plus its judgments."""

    hit: RetrievalHit
    benchmark_id: str
    selection: int | None = None  # 1, 0, or -1
    label: RelevanceLabel | None = None
    judge_failed: bool = False
    judge_id: str = ""

    @property
    def item_id(self) -> str:
        return self.hit.item_id


@dataclass
class FilterResult:
    """Outcome of the selection filter over one hit list.

    ``kept`` are the surviving hits in input order; ``judged`` is every hit
    with its selection (or ``judge_failed``), also in input order, for
    method-precision accounting; ``failed`` lists unparseable judgments.
    """

    kept: list[JudgedHit]
    judged: list[JudgedHit]
    failed: list[str]


def _judge_once(
    lm: "CompletionGateway", template_id: str, user_intent: str, test_case: str, parser
):
    variables = {"user_intent": user_intent, "test_case": test_case}
    for _ in range(2):
        text = lm.complete(template_id, variables)
        try:
            return parser(text)
        except ResponseFormatError:
            continue
    return None


def filter_hits(
    use_case: "UseCase",
    hits: Sequence[RetrievalHit],
    corpus: "Corpus",
    lm: "CompletionGateway",
) -> FilterResult:
    """Apply the selection judge to every hit and drop the -1 scores."""

    def judge(hit: RetrievalHit) -> JudgedHit:
        item = corpus.get(hit.item_id)
        score = _judge_once(
            lm,
            gateways.SELECTION_JUDGE,
            use_case.text,
            item.text,
            gateways.parse_selection_score,
        )
        if score is None:
            return JudgedHit(
                hit=hit,
                benchmark_id=item.benchmark_id,
                judge_failed=True,
                judge_id=lm.config.label,
            )
        return JudgedHit(
            hit=hit,
            benchmark_id=item.benchmark_id,
            selection=score,
            judge_id=lm.config.label,
        )

    judged = gateways.run_parallel(judge, list(hits), lm.config.max_parallel)
    kept = [j for j in judged if not j.judge_failed and j.selection in (1, 0)]
    failed = [j.item_id for j in judged if j.judge_failed]
    return FilterResult(kept=kept, judged=judged, failed=failed)


def judge_relevance(
    use_case: "UseCase",
    hits: Sequence[JudgedHit],
    corpus: "Corpus",
    lm: "CompletionGateway",
) -> list[JudgedHit]:
    """Grade each hit with the evaluation judge; order is preserved."""

    def judge(judged: JudgedHit) -> JudgedHit:
        item = corpus.get(judged.item_id)
        label = _judge_once(
            lm,
            gateways.EVALUATION_JUDGE,
            use_case.text,
            item.text,
            gateways.parse_relevance_label,
        )
        if label is None:
            return replace(judged, label=None, judge_failed=True)
        return replace(judged, label=RelevanceLabel(label))

    return gateways.run_parallel(judge, list(hits), lm.config.max_parallel)


def mean_relevance(labels: Sequence[RelevanceLabel]) -> float:
    """Mean of the 1 / 0.5 / 0 mapping over the labels."""
    if not labels:
        raise ArgumentError("mean_relevance requires at least one label")
    return sum(LABEL_VALUES[RelevanceLabel(l)] for l in labels) / len(labels)


def serialize_judged(judged: JudgedHit) -> dict:
    """Record form used by judged-result files and the HTTP payload."""
    return {
        "item_id": judged.item_id,
        "benchmark": judged.benchmark_id,
        "score": judged.hit.score,
        "selection": judged.selection,
        "label": "judge_failed" if judged.judge_failed and judged.label is None
        else (judged.label.value if judged.label is not None else None),
        "judge_id": judged.judge_id,
    }
