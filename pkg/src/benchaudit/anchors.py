"""Use-case rewriting into retrieval anchors, and the shorthand grammar.

Four strategies exist: ``original`` passes the use-case through untouched,
``rephrasing`` and ``example_synthesis`` ask the completion gateway for three
rewrites each, and ``shorthand`` rewrites into the bounded-vocabulary form
``skill & key1 & key2 & key3`` that the shorthand index space is built from.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Mapping

from . import gateways
from .errors import AnchorFormatError, ArgumentError, FormatError, ResponseFormatError

if TYPE_CHECKING:
    from .corpus import Corpus, UseCase
    from .gateways import CompletionGateway


class AnchorStrategy(str, Enum):
    ORIGINAL = "original"
    REPHRASING = "rephrasing"
    EXAMPLE_SYNTHESIS = "example_synthesis"
    SHORTHAND = "shorthand"


_ANCHOR_COUNTS = {
    AnchorStrategy.ORIGINAL: 1,
    AnchorStrategy.REPHRASING: 3,
    AnchorStrategy.EXAMPLE_SYNTHESIS: 3,
    AnchorStrategy.SHORTHAND: 1,
}

_TOKEN = re.compile(r"[a-z0-9_]+\Z")


@dataclass(frozen=True)
class Shorthand:
    """Parsed shorthand: a skill token plus up to three key tokens."""

    skill: str
    keys: tuple[str, ...] = ()

    def render(self) -> str:
        return " & ".join((self.skill, *self.keys))


def parse_shorthand(text: str) -> Shorthand:
    """Parse ``skill & key1 & key2 & key3`` (trailing keys optional).

    Tokens must match ``[a-z0-9_]+``; at most three keys. Raises
    ``FormatError`` otherwise.
    """
    parts = [p.strip() for p in text.split("&")]
    if not parts or not parts[0]:
        raise FormatError(f"shorthand {text!r}: empty skill")
    if len(parts) > 4:
        raise FormatError(f"shorthand {text!r}: more than 3 keys")
    for part in parts:
        if not _TOKEN.match(part):
            raise FormatError(f"shorthand {text!r}: illegal token {part!r}")
    return Shorthand(skill=parts[0], keys=tuple(parts[1:]))


def validate_shorthand(text: str) -> str:
    """Grammar-check a shorthand and return its canonical rendering."""
    return parse_shorthand(text).render()


@dataclass(frozen=True)
class AnchorSet:
    """The anchors one strategy produced for one use-case."""

    use_case_id: str
    strategy: AnchorStrategy
    anchors: tuple[str, ...]
    target_space: str  # raw | shorthand

    def __post_init__(self):
        expected = _ANCHOR_COUNTS[self.strategy]
        if len(self.anchors) != expected:
            raise ArgumentError(
                f"strategy {self.strategy.value} requires exactly {expected} "
                f"anchors, got {len(self.anchors)}"
            )
        if any(not a for a in self.anchors):
            raise ArgumentError("anchors must be non-empty")
        want_shorthand = self.strategy is AnchorStrategy.SHORTHAND
        if (self.target_space == "shorthand") != want_shorthand:
            raise ArgumentError(
                f"target_space {self.target_space!r} does not match strategy "
                f"{self.strategy.value}"
            )
        if want_shorthand:
            validate_shorthand(self.anchors[0])


def _ask_with_retry(lm: "CompletionGateway", template_id: str, variables, parser):
    """One dispatch plus a single re-ask when the output fails to parse."""
    last: Exception | None = None
    for _ in range(2):
        text = lm.complete(template_id, variables)
        try:
            return parser(text)
        except (ResponseFormatError, FormatError) as exc:
            last = exc
    raise AnchorFormatError(str(last))


def _normalized_shorthand(raw: str) -> str:
    """Lowercase an LM-produced shorthand, then validate the grammar."""
    return validate_shorthand(raw.strip().lower())


def generate_anchors(
    use_case: "UseCase", strategy: AnchorStrategy, lm: "CompletionGateway"
) -> AnchorSet:
    """Rewrite one use-case into retrieval anchors under ``strategy``."""
    if not use_case.text:
        raise ArgumentError("use case text must be non-empty")
    strategy = AnchorStrategy(strategy)
    if strategy is AnchorStrategy.ORIGINAL:
        anchors: tuple[str, ...] = (use_case.text,)
    elif strategy is AnchorStrategy.REPHRASING:
        anchors = tuple(
            _ask_with_retry(
                lm, gateways.REPHRASING, {"query": use_case.text}, gateways.parse_refinements
            )
        )
    elif strategy is AnchorStrategy.EXAMPLE_SYNTHESIS:
        anchors = tuple(
            _ask_with_retry(
                lm,
                gateways.EXAMPLE_SYNTHESIS,
                {"query": use_case.text},
                gateways.parse_testcases,
            )
        )
    else:
        rendered = _ask_with_retry(
            lm,
            gateways.SHORTHAND_REWRITE,
            {"query": use_case.text},
            lambda text: _normalized_shorthand(gateways.parse_shorthand_response(text)),
        )
        anchors = (rendered,)
    space = "shorthand" if strategy is AnchorStrategy.SHORTHAND else "raw"
    return AnchorSet(
        use_case_id=use_case.use_case_id,
        strategy=strategy,
        anchors=anchors,
        target_space=space,
    )


@dataclass
class TranslationResult:
    """Outcome of translating a corpus into shorthand space."""

    mapping: dict[str, str]
    rejects: list[str]


def translate_corpus_to_shorthand(
    corpus: "Corpus", lm: "CompletionGateway", parallelism: int | None = None
) -> TranslationResult:
    """Produce a grammar-valid shorthand for every corpus item.

    Items whose LM output stays malformed after the single re-ask land in
    ``rejects`` instead of being silently dropped.
    """
    workers = parallelism if parallelism is not None else lm.config.max_parallel

    def translate(item) -> tuple[str, str | None]:
        try:
            rendered = _ask_with_retry(
                lm,
                gateways.SHORTHAND_REWRITE,
                {"query": item.text},
                lambda text: _normalized_shorthand(gateways.parse_shorthand_response(text)),
            )
            return item.item_id, rendered
        except AnchorFormatError:
            return item.item_id, None

    results = gateways.run_parallel(translate, list(corpus), workers)
    mapping: dict[str, str] = {}
    rejects: list[str] = []
    for item_id, rendered in results:
        if rendered is None:
            rejects.append(item_id)
        else:
            mapping[item_id] = rendered
    return TranslationResult(mapping=mapping, rejects=rejects)
