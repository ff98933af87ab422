"""Model-service gateways: text completion and embeddings.

Both gateways run in one of two modes. ``remote`` POSTs to an HTTP backend
(with retries and a parallelism cap); ``stub`` computes a deterministic,
format-valid response locally so the whole pipeline runs offline. Stub
behaviour is part of the test contract: identical inputs always produce
identical outputs.

Environment variables: ``BB_MODE`` (remote|stub), ``BB_LM_URL``,
``BB_LM_KEY``, ``BB_EMBED_URL``, ``BB_EMBED_KEY``.
"""

from __future__ import annotations

import hashlib
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence, TypeVar

import httpx
import numpy as np

from .errors import (
    ArgumentError,
    GatewayError,
    ResponseFormatError,
    TemplateError,
)
from .text import tokenize

T = TypeVar("T")
U = TypeVar("U")

REPHRASING = "rephrasing"
EXAMPLE_SYNTHESIS = "example_synthesis"
SHORTHAND_REWRITE = "shorthand_rewrite"
SELECTION_JUDGE = "selection_judge"
EVALUATION_JUDGE = "evaluation_judge"

_REPHRASING_BODY = """Given a user query, create **three brief refinements** of that query that are appropriate for retrieving examples representing the interest highlighted in the query. Use the following rules:

- If the query is compositional, i.e., it contains multiple concepts, make different operationalizations of each concept. For example: if the query is `scientific visualizations for scientific papers` - each refinement should focus on a different sub-part of this query: like scientific visualizations, visualizations for scientific papers and tools for visualizations.
- If the query is about some broad capability, enlist different sub-topics that test for that capability. For example: if the query is `trivia` - each refinement can include common topics included in trivia questions like `celebrity history`, `geography`, `world history`, etc.
- If the query is about some broad topic, enlist different related domains and sub-topics that are related to that topic. For example: if the query is `biology` - each refinement can include different related domains like `genetics`, `ecology`, `dermatology`, etc.
- If the query is about a specific task, generate different contextual forms of that task. For example: if the query is `Creative Writing` - each refinement can include different types of creative writing like `poetry`, `short stories`, `novels`, etc.
- If the query describes a scenario - `Cooking indian food` - list different activities that can be performed in that scenario. For example: `indian spices`, `indian food recipes` and `indian desserts`.
- If the query is a proper Noun - `Harry Potter` - generate at least one query that highlights the broad task associated with that proper noun, for example: `fantasy literature` or `magic`, and one that lists the most popular form of that proper noun, for example, `Harry Potter Books`.
- If the query is a question - `What is the Capital of France ?` - generate at least one query that highlights the topic of that question. For example: `Capitals of different countries`, `Facts about France` and `Paris`.
- If it falls under neither of these categories, for example: `Can Elephants fly ?` - generate queries that cover reasonable aspects of that query: For example: `Animals that can fly`, `Elephant facts` and `Flying facts`.

* Make sure that one refinement is not a subset of another refinement.
* Make sure that at least one refinement highlights the broad domain of the query. For example, if the query is `chess` - one refinement should include `board games`.
* Avoid making overly complicated refinements by using simple words and phrases.
* Focus on what would attract different types of relevant test cases or documents from existing test benchmarks.
ALWAYS Return your responses in the following XML format; each refinement should be in a separate <refinement> tag:
<refinements>
    <refinement> </refinement>
</refinements>
DO NOT INCLUDE ANY OTHER TEXT IN YOUR RESPONSE or any reasoning in your response.
The user query is: {query}"""

_EXAMPLE_SYNTHESIS_BODY = """Given a user query, generate 3 testcases that is representative of the user's interest that can help evaluate an AI Model on its competence on the users intent. The rules for generating the testcases are as follows:
- The testcase should be STRICTLY between 1-2 lines and not very verbose.
- Each testcase can be of a different format (Long Form, MCQ, Fill in the blank, etc.)
- Only include the question/input for a testcase and not the expected output.
- Return each testcase wrapped in a separate <testcase> </testcase> tag. Your final outputs should be of the form:
<testcases>
    <testcase> Some question related to the query </testcase>
    <testcase> Some question related to the query </testcase>
    <testcase> Some question related to the query </testcase>
</testcases>
DO NOT INCLUDE ANY OTHER TEXT IN YOUR RESPONSE or any reasoning in your response.
- The user query is: {query}"""

_SHORTHAND_REWRITE_BODY = """You are tasked with converting natural language text into a concise shorthand format which can be used to identify other datapoints having similar capabilities.
The format for creating this shorthand is: <skill> & <key1> & <key2> & <key3> where:

- <skill> encodes the primary cognitive/technical ability needed to accomplish the task underlying the text. Ask yourself: "What is the primary cognitive/technical ability needed to accomplish the task underlying the text?"
Some examples (NOT EXHAUSTIVE): creative_writing, coding, equation_solving, coreference_resolution, strategy_planning, logical_reasoning, factual_recall, reading_comprehension, scientific_visualization, graphics, social_interaction, movie_trivia, statistical_analysis, etc.

- <key1>,<key2>, <key3> are 1-3 SPECIFIC and DISTINCTIVE features that maximize retrieval precision; For adding each feature/key, ask yourself:
  - "What are the specific document types, topics, and/or entities in this text" that need to be preserved for retrieving similar datapoints?
  - Is there any specific topic underlying being asked by the user query: "machine learning" "statistics" "poetry" etc - include that as a key.
  - Is there any specific output format mentioned in the query: "research papers", "clinical cases", "financial reports" "emails" etc - include that as a key.
  - Is the the query about a specific person, organization, or entity - include that as a key. If there are multiple entities, or placeholders like "X", "Y", "Z" - include the broad category of the entity (e.g., "actor", "writer", "sportsperson" "female") and number of entitites as a key.
  - Is the user looking for a specific task like: "sorting_ascending", "counting_3_objects", "implementing_neural_network"- include that as a key.  - If the text includes a mathematical formula: include the concept type of the formula (e.g., "differential_equations", "linear_algebra", "probability_distribution")
  - If the user has only specificed a single topic - use that as the key. DO NOT ADD A SKILL UNLESS ITS SPECIFIED.
  - If the user has only specified a single skill/task - use that skill/task as the key. DO NOT ADD A DIFFERENT TASK UNLESS ITS SPECIFIED.
  - Use underscores for multi-word concepts (e.g., "machine_learning", "social_skills", "new_york")
  - Make sure that no key adds a new generic domain/skill/topic to the query. STRICTLY FOLLOW THIS RULE.
  - Separate each key with an ampersand.
  - Return exactly 1 shorthand for a user query wrapped in XML tags: <shorthand></shorthand>.
- IMPORTANT: Only include keys, if they add unique, searchable value. If there are no more distinctive features, USE FEWER KEYS rather than padding with generic terms.Your final outputs should be of the form:
    <shorthand> </shorthand>
  Here are some examples of shorthands:
  equation_solving & quadratic_equations & solution_id
  factual_recall & historical_figures & mongols
  equation_solving & sequence_formula & nth_term

The user query is: {query}"""

_SELECTION_JUDGE_BODY = """You are evaluating whether a test case is relevant for assessing an AI model's ability to help with a specific user task. You are given:
- <user_intent> Some topic, a description of some scenario, a capability or an application that some user is interested in <user_intent>
- <test_case> Some question/test case that might be used to evaluate that system. </test_case>.

A test case is RELEVANT if correctly answering it would demonstrate capabilities that directly support the user's intent. Consider the following:
- Knowledge Overlap: Does the test require knowledge domains that overlap with what the user needs?
- Skill Transfer: Would the reasoning, analysis, or problem-solving skills needed for this test directly apply to the user's task?
- Practical Utility: If an AI can handle this test case well, would that increase confidence it can help the user with their specific goal?
Rate the relevance as one of the following:
- 1: Test case is relevant to the user's intent.
- 0: Test case maybe relevant to the user's intent but not directly relevant.
- -1: Test case is not relevant to the user's intent
Provide your rating (only 1,0 or -1) wrapped in the <score> and </score> tags.

<user_intent> {user_intent} </user_intent>
<test_case> {test_case} </test_case>"""

_EVALUATION_JUDGE_BODY = """You are evaluating whether a test case is relevant for assessing an AI model's ability to help with a specific user task. You are given:
- <user_intent> Some topic, a description of some scenario, a capability or an application that some user is interested in </user_intent>
- <test_case> Some question/test case that might be used to evaluate that system. </test_case>
Your evaluation criteria is:
A test case is RELEVANT if successfully answering it would demonstrate capabilities that directly support the user's intent. Consider the following:
- Knowledge Overlap: Does the test require knowledge domains that overlap with what the user needs?
- Skill Transfer: Would the reasoning, analysis, or problem-solving skills needed for this test directly apply to the user's task?
- Practical Utility: If an AI can handle this test case well, would that increase confidence it can help the user with their specific goal?
Rate the relevance as one of the following:
- RELEVANT: If an AI can answer this test case correctly, it would strongly imply that it can help the user with their specific goal.
- PARTIAL RELEVANT: If an AI can answer this test case correctly, it would somewhat imply that it can help the user with their broad goal i.e., with the topic or the skill needed by the user.
- IRRELEVANT: Answering this question, would not provide any useful indication about if the AI can fulfill the user's intent.
Provide your rating and wrapped in the <label> and </label> tags.

<user_intent> {user_intent} </user_intent>
<test_case> {test_case} </test_case>"""

TEMPLATES: dict[str, str] = {
    REPHRASING: _REPHRASING_BODY,
    EXAMPLE_SYNTHESIS: _EXAMPLE_SYNTHESIS_BODY,
    SHORTHAND_REWRITE: _SHORTHAND_REWRITE_BODY,
    SELECTION_JUDGE: _SELECTION_JUDGE_BODY,
    EVALUATION_JUDGE: _EVALUATION_JUDGE_BODY,
}


def render_template(template_id: str, variables: Mapping[str, str]) -> str:
    """Fill a template's placeholders; unbound placeholders are an error."""
    try:
        body = TEMPLATES[template_id]
    except KeyError:
        raise ArgumentError(f"unknown template {template_id!r}") from None
    try:
        return body.format_map(dict(variables))
    except KeyError as exc:
        raise TemplateError(
            f"template {template_id!r}: placeholder {exc.args[0]!r} not bound"
        ) from None


@dataclass
class GatewayConfig:
    """Connection and dispatch settings for one gateway."""

    mode: str = "stub"
    endpoint: str | None = None
    credential: str | None = None
    max_parallel: int = 8
    timeout: float = 30.0
    retries: int = 3
    backoff: float = 0.25
    max_tokens: int = 512
    temperature: float = 0.0
    embed_dim: int = 256
    label: str = ""

    def __post_init__(self):
        if self.mode not in ("remote", "stub"):
            raise ArgumentError(f"mode must be remote or stub, got {self.mode!r}")
        if self.mode == "remote" and not self.endpoint:
            raise ArgumentError("remote mode requires an endpoint")
        if self.max_parallel < 1:
            raise ArgumentError("max_parallel must be >= 1")
        if not self.label:
            self.label = self.mode


def config_from_env(kind: str, env: Mapping[str, str] | None = None) -> GatewayConfig:
    """Build a config from BB_* environment variables; ``kind`` is lm|embed."""
    env = os.environ if env is None else env
    prefix = {"lm": "BB_LM", "embed": "BB_EMBED"}[kind]
    mode = env.get("BB_MODE", "stub")
    return GatewayConfig(
        mode=mode,
        endpoint=env.get(f"{prefix}_URL"),
        credential=env.get(f"{prefix}_KEY"),
    )


def run_parallel(
    fn: Callable[[T], U], items: Sequence[T], max_parallel: int
) -> list[U]:
    """Apply ``fn`` to every item with at most ``max_parallel`` in flight.

    Results come back in input order; the first exception propagates.
    """
    if max_parallel < 1:
        raise ArgumentError("max_parallel must be >= 1")
    if not items:
        return []
    if max_parallel == 1 or len(items) == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=max_parallel) as pool:
        return list(pool.map(fn, items))


def _overlap(user_intent: str, test_case: str) -> float:
    intent = set(tokenize(user_intent))
    if not intent:
        return 0.0
    return len(intent & set(tokenize(test_case))) / len(intent)


def _stable_hash(token: str) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _stub_complete(template_id: str, variables: Mapping[str, str]) -> str:
    if template_id == REPHRASING:
        q = variables["query"].strip()
        return (
            "<refinements>\n"
            f"<refinement>{q} fundamentals</refinement>\n"
            f"<refinement>{q} practice problems</refinement>\n"
            f"<refinement>{q} common scenarios</refinement>\n"
            "</refinements>"
        )
    if template_id == EXAMPLE_SYNTHESIS:
        q = variables["query"].strip()
        return (
            "<testcases>\n"
            f"<testcase>Explain the key ideas behind {q} in a short paragraph.</testcase>\n"
            f"<testcase>Which option best demonstrates {q}? A) a definition B) a worked example C) a counterexample D) none of these</testcase>\n"
            f"<testcase>Fill in the blank: the central element of {q} is ____.</testcase>\n"
            "</testcases>"
        )
    if template_id == SHORTHAND_REWRITE:
        tokens = [re.sub(r"[^a-z0-9_]", "", t) for t in tokenize(variables["query"])]
        tokens = [t for t in tokens if t]
        skill = tokens[0] if tokens else "general"
        parts = [skill] + tokens[1:4]
        return "<shorthand>" + " & ".join(parts) + "</shorthand>"
    if template_id == SELECTION_JUDGE:
        overlap = _overlap(variables["user_intent"], variables["test_case"])
        score = "1" if overlap >= 0.5 else ("0" if overlap >= 0.2 else "-1")
        return f"<score>{score}</score>"
    if template_id == EVALUATION_JUDGE:
        overlap = _overlap(variables["user_intent"], variables["test_case"])
        label = (
            "RELEVANT"
            if overlap >= 0.5
            else ("PARTIAL RELEVANT" if overlap >= 0.2 else "IRRELEVANT")
        )
        return f"<label>{label}</label>"
    raise ArgumentError(f"unknown template {template_id!r}")


class CompletionGateway:
    """Text-completion service used for anchor generation and judging."""

    def __init__(self, config: GatewayConfig | None = None):
        self.config = config or GatewayConfig()
        self._client: httpx.Client | None = None

    def _post(self, body: dict) -> dict:
        cfg = self.config
        if self._client is None:
            headers = {}
            if cfg.credential:
                headers["Authorization"] = f"Bearer {cfg.credential}"
            self._client = httpx.Client(timeout=cfg.timeout, headers=headers)
        last: Exception | None = None
        for attempt in range(cfg.retries + 1):
            try:
                response = self._client.post(cfg.endpoint, json=body)
                response.raise_for_status()
                return response.json()
            except (httpx.HTTPError, ValueError) as exc:
                last = exc
                if attempt < cfg.retries:
                    time.sleep(cfg.backoff * (2**attempt))
        raise GatewayError(f"request failed after {cfg.retries} retries: {last}")

    def complete(self, template_id: str, variables: Mapping[str, str]) -> str:
        """Dispatch one prompt; returns the model's raw text."""
        prompt = render_template(template_id, variables)
        if self.config.mode == "stub":
            return _stub_complete(template_id, variables)
        payload = self._post(
            {
                "prompt": prompt,
                "max_tokens": self.config.max_tokens,
                "temperature": self.config.temperature,
            }
        )
        if not isinstance(payload, dict) or not isinstance(payload.get("text"), str):
            raise GatewayError("completion backend returned no 'text' field")
        return payload["text"]

    def complete_many(
        self, template_id: str, variable_sets: Sequence[Mapping[str, str]]
    ) -> list[str]:
        return run_parallel(
            lambda v: self.complete(template_id, v),
            variable_sets,
            self.config.max_parallel,
        )


def _stub_embed_one(text: str, dim: int) -> np.ndarray:
    vec = np.zeros(dim, dtype=np.float64)
    for token in tokenize(text):
        h = _stable_hash(token)
        bucket = h % dim
        sign = 1.0 if (h >> 32) & 1 == 0 else -1.0
        vec[bucket] += sign
    norm = float(np.linalg.norm(vec))
    if norm < 1e-12:
        # token-free or fully cancelled text: one-hot on the raw string
        vec[:] = 0.0
        vec[_stable_hash(text) % dim] = 1.0
        norm = 1.0
    return (vec / norm).astype(np.float32)


def normalize_vectors(matrix: np.ndarray) -> np.ndarray:
    """L2-normalize rows; zero rows are rejected as non-embeddable."""
    matrix = np.asarray(matrix, dtype=np.float32)
    norms = np.linalg.norm(matrix.astype(np.float64), axis=1)
    if np.any(norms < 1e-12):
        raise GatewayError("embedding backend returned a zero vector")
    return (matrix.astype(np.float64) / norms[:, None]).astype(np.float32)


class EmbeddingGateway:
    """Embedding service; returns one L2-normalized vector per input text."""

    instruction: str = (
        "Given an activity, retrieve relevant records that have the same "
        "underlying concepts and topics as the given activity"
    )

    def __init__(self, config: GatewayConfig | None = None):
        self.config = config or GatewayConfig()
        self._client: httpx.Client | None = None

    def embed(
        self,
        texts: Sequence[str],
        instruction: str | None = None,
        demonstrations: Sequence[tuple[str, str]] = (),
    ) -> np.ndarray:
        if not texts:
            raise ArgumentError("embed requires at least one text")
        if self.config.mode == "stub":
            rows = [_stub_embed_one(t, self.config.embed_dim) for t in texts]
            return np.stack(rows)
        return self._embed_remote(texts, instruction, demonstrations)

    def _embed_remote(
        self,
        texts: Sequence[str],
        instruction: str | None,
        demonstrations: Sequence[tuple[str, str]],
    ) -> np.ndarray:
        cfg = self.config
        if self._client is None:
            headers = {}
            if cfg.credential:
                headers["Authorization"] = f"Bearer {cfg.credential}"
            self._client = httpx.Client(timeout=cfg.timeout, headers=headers)
        body = {
            "inputs": list(texts),
            "instruction": instruction if instruction is not None else self.instruction,
            "demonstrations": [list(pair) for pair in demonstrations],
        }
        last: Exception | None = None
        for attempt in range(cfg.retries + 1):
            try:
                response = self._client.post(cfg.endpoint, json=body)
                response.raise_for_status()
                payload = response.json()
                break
            except (httpx.HTTPError, ValueError) as exc:
                last = exc
                if attempt < cfg.retries:
                    time.sleep(cfg.backoff * (2**attempt))
        else:
            raise GatewayError(f"request failed after {cfg.retries} retries: {last}")
        vectors = payload.get("vectors") if isinstance(payload, dict) else None
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise GatewayError("embedding backend returned a malformed 'vectors' field")
        matrix = np.asarray(vectors, dtype=np.float32)
        if matrix.ndim != 2 or not np.all(np.isfinite(matrix)):
            raise GatewayError("embedding backend returned non-finite or ragged vectors")
        return normalize_vectors(matrix)


_TAG_CACHE: dict[str, re.Pattern] = {}


def _tag_contents(name: str, text: str) -> list[str]:
    pattern = _TAG_CACHE.get(name)
    if pattern is None:
        pattern = re.compile(rf"<{name}>(.*?)</{name}>", re.DOTALL | re.IGNORECASE)
        _TAG_CACHE[name] = pattern
    return [m.strip() for m in pattern.findall(text)]


def parse_refinements(text: str) -> list[str]:
    """Extract exactly three non-empty ``<refinement>`` segments."""
    segments = [s for s in _tag_contents("refinement", text) if s]
    if len(segments) != 3:
        raise ResponseFormatError(
            REPHRASING, f"expected 3 refinements, found {len(segments)}", text
        )
    return segments


def parse_testcases(text: str) -> list[str]:
    """Extract exactly three non-empty ``<testcase>`` segments."""
    segments = [s for s in _tag_contents("testcase", text) if s]
    if len(segments) != 3:
        raise ResponseFormatError(
            EXAMPLE_SYNTHESIS, f"expected 3 testcases, found {len(segments)}", text
        )
    return segments


def parse_shorthand_response(text: str) -> str:
    """Extract the single ``<shorthand>`` segment (grammar checked by caller)."""
    segments = [s for s in _tag_contents("shorthand", text) if s]
    if len(segments) != 1:
        raise ResponseFormatError(
            SHORTHAND_REWRITE, f"expected 1 shorthand, found {len(segments)}", text
        )
    return segments[0]


def parse_selection_score(text: str) -> int:
    """Extract the ``<score>`` value; only 1, 0, and -1 are legal."""
    segments = _tag_contents("score", text)
    if len(segments) != 1 or segments[0] not in ("1", "0", "-1"):
        raise ResponseFormatError(SELECTION_JUDGE, "missing or illegal <score> tag", text)
    return int(segments[0])


_LABEL_ALIASES = {
    "RELEVANT": "relevant",
    "PARTIAL RELEVANT": "partially_relevant",
    "PARTIALLY RELEVANT": "partially_relevant",
    "PARTIAL_RELEVANT": "partially_relevant",
    "IRRELEVANT": "irrelevant",
}


def parse_relevance_label(text: str) -> str:
    """Extract the ``<label>`` value as one of the three canonical labels."""
    segments = _tag_contents("label", text)
    if len(segments) != 1:
        raise ResponseFormatError(EVALUATION_JUDGE, "missing <label> tag", text)
    label = _LABEL_ALIASES.get(segments[0].strip().upper())
    if label is None:
        raise ResponseFormatError(
            EVALUATION_JUDGE, f"illegal label {segments[0]!r}", text
        )
    return label
