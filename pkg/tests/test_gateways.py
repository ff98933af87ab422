from __future__ import annotations

import threading
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from benchaudit.errors import (
    ArgumentError,
    GatewayError,
    ResponseFormatError,
    TemplateError,
)
from benchaudit.gateways import (
    EVALUATION_JUDGE,
    EXAMPLE_SYNTHESIS,
    REPHRASING,
    SELECTION_JUDGE,
    SHORTHAND_REWRITE,
    CompletionGateway,
    EmbeddingGateway,
    GatewayConfig,
    parse_refinements,
    parse_relevance_label,
    parse_selection_score,
    parse_shorthand_response,
    parse_testcases,
    render_template,
    run_parallel,
)


class TestTemplates:
    def test_missing_placeholder(self):
        with pytest.raises(TemplateError):
            render_template(REPHRASING, {})

    def test_unknown_template(self):
        with pytest.raises(ArgumentError):
            render_template("nope", {})

    def test_placeholders_fill(self):
        rendered = render_template(SELECTION_JUDGE, {"user_intent": "chess", "test_case": "x"})
        assert "<user_intent> chess </user_intent>" in rendered


class TestStubCompletion:
    def test_rephrasing_emits_three_refinements(self, stub_lm):
        text = stub_lm.complete(REPHRASING, {"query": "chess"})
        assert len(parse_refinements(text)) == 3

    def test_selection_judge_emits_legal_scores(self, stub_lm):
        for case in ("chess opening theory", "completely unrelated words", "chess related maybe"):
            text = stub_lm.complete(SELECTION_JUDGE, {"user_intent": "chess", "test_case": case})
            assert text in ("<score>1</score>", "<score>0</score>", "<score>-1</score>")

    def test_evaluation_judge_thresholds(self, stub_lm):
        intent = "alpha beta gamma delta"
        full = stub_lm.complete(EVALUATION_JUDGE, {"user_intent": intent, "test_case": intent})
        assert parse_relevance_label(full) == "relevant"
        partial = stub_lm.complete(
            EVALUATION_JUDGE, {"user_intent": intent, "test_case": "alpha zzz yyy"}
        )
        assert parse_relevance_label(partial) == "partially_relevant"
        none = stub_lm.complete(EVALUATION_JUDGE, {"user_intent": intent, "test_case": "zzz"})
        assert parse_relevance_label(none) == "irrelevant"

    def test_shorthand_rewrite_grammar(self, stub_lm):
        text = stub_lm.complete(SHORTHAND_REWRITE, {"query": "Solve 2x+1=5"})
        assert parse_shorthand_response(text) == "solve & 2x & 1 & 5"

    def test_example_synthesis_three_formats(self, stub_lm):
        cases = parse_testcases(stub_lm.complete(EXAMPLE_SYNTHESIS, {"query": "chemistry"}))
        assert len(cases) == 3
        assert all("chemistry" in c for c in cases)

    @given(st.text(min_size=1, max_size=60))
    @settings(max_examples=50, deadline=None)
    def test_stub_determinism(self, query):
        lm = CompletionGateway(GatewayConfig(mode="stub"))
        for template in (REPHRASING, EXAMPLE_SYNTHESIS, SHORTHAND_REWRITE):
            assert lm.complete(template, {"query": query}) == lm.complete(
                template, {"query": query}
            )


class TestStubEmbedding:
    def test_identical_texts_identical_vectors(self, stub_embedder):
        vectors = stub_embedder.embed(["abc", "abc"])
        assert np.array_equal(vectors[0], vectors[1])

    def test_unit_norm(self, stub_embedder):
        vectors = stub_embedder.embed(["some words here", "x", ""])
        norms = np.linalg.norm(vectors.astype(np.float64), axis=1)
        assert np.all(np.abs(norms - 1.0) <= 1e-6)

    def test_disjoint_tokens_non_positive_cosine(self, stub_embedder):
        vectors = stub_embedder.embed(["alpha beta", "gamma delta"])
        cosine = float(vectors[0].astype(np.float64) @ vectors[1].astype(np.float64))
        assert cosine <= 1e-6

    def test_empty_input_rejected(self, stub_embedder):
        with pytest.raises(ArgumentError):
            stub_embedder.embed([])

    def test_order_insensitive_bag(self, stub_embedder):
        vectors = stub_embedder.embed(["alpha beta", "beta alpha"])
        assert np.array_equal(vectors[0], vectors[1])

    @given(st.text(max_size=40))
    @settings(max_examples=50, deadline=None)
    def test_embedding_determinism(self, text):
        embedder = EmbeddingGateway(GatewayConfig(mode="stub"))
        first = embedder.embed([text])
        second = embedder.embed([text])
        assert np.array_equal(first, second)


class TestRemote:
    def test_unreachable_endpoint_fails_after_retries(self):
        config = GatewayConfig(
            mode="remote",
            endpoint="http://127.0.0.1:1/v1",
            retries=2,
            backoff=0.001,
            timeout=0.2,
        )
        with pytest.raises(GatewayError):
            CompletionGateway(config).complete(REPHRASING, {"query": "x"})
        with pytest.raises(GatewayError):
            EmbeddingGateway(config).embed(["x"])

    def test_remote_requires_endpoint(self):
        with pytest.raises(ArgumentError):
            GatewayConfig(mode="remote")


class TestParsers:
    def test_refinement_count_enforced(self):
        with pytest.raises(ResponseFormatError):
            parse_refinements("<refinement>only one</refinement>")

    def test_selection_score_rejects_garbage(self):
        with pytest.raises(ResponseFormatError):
            parse_selection_score("<score>2</score>")
        with pytest.raises(ResponseFormatError):
            parse_selection_score("no tags at all")

    def test_label_aliases(self):
        assert parse_relevance_label("<label>PARTIALLY RELEVANT</label>") == "partially_relevant"
        assert parse_relevance_label("<label>relevant</label>") == "relevant"
        with pytest.raises(ResponseFormatError):
            parse_relevance_label("<label>SOMEWHAT</label>")

    def test_shorthand_single_tag(self):
        with pytest.raises(ResponseFormatError):
            parse_shorthand_response("<shorthand>a</shorthand><shorthand>b</shorthand>")


class TestParallelDispatch:
    def test_in_flight_never_exceeds_cap(self):
        lock = threading.Lock()
        in_flight = 0
        peak = 0

        def tracked(value):
            nonlocal in_flight, peak
            with lock:
                in_flight += 1
                peak = max(peak, in_flight)
            time.sleep(0.002)
            with lock:
                in_flight -= 1
            return value * 2

        results = run_parallel(tracked, list(range(40)), max_parallel=4)
        assert results == [v * 2 for v in range(40)]
        assert peak <= 4

    def test_order_preserved(self):
        results = run_parallel(lambda v: v, list(range(100)), max_parallel=8)
        assert results == list(range(100))

    def test_exception_propagates(self):
        def boom(value):
            if value == 3:
                raise RuntimeError("boom")
            return value

        with pytest.raises(RuntimeError):
            run_parallel(boom, list(range(8)), max_parallel=2)


class TestRemoteWireFormat:
    def completion_gateway(self, handler) -> CompletionGateway:
        import httpx

        gateway = CompletionGateway(
            GatewayConfig(mode="remote", endpoint="http://backend/v1/complete", retries=0)
        )
        gateway._client = httpx.Client(transport=httpx.MockTransport(handler))
        return gateway

    def embedding_gateway(self, handler) -> EmbeddingGateway:
        import httpx

        gateway = EmbeddingGateway(
            GatewayConfig(mode="remote", endpoint="http://backend/v1/embed", retries=0)
        )
        gateway._client = httpx.Client(transport=httpx.MockTransport(handler))
        return gateway

    def test_completion_request_and_response_bodies(self):
        import json as jsonlib

        import httpx

        seen = {}

        def handler(request):
            seen.update(jsonlib.loads(request.content))
            return httpx.Response(200, json={"text": "<score>1</score>"})

        gateway = self.completion_gateway(handler)
        text = gateway.complete(SELECTION_JUDGE, {"user_intent": "chess", "test_case": "x"})
        assert text == "<score>1</score>"
        assert set(seen) == {"prompt", "max_tokens", "temperature"}
        assert "chess" in seen["prompt"]

    def test_completion_missing_text_field(self):
        import httpx

        gateway = self.completion_gateway(lambda request: httpx.Response(200, json={"nope": 1}))
        with pytest.raises(GatewayError):
            gateway.complete(REPHRASING, {"query": "x"})

    def test_embedding_request_body_and_normalization(self):
        import json as jsonlib

        import httpx

        seen = {}

        def handler(request):
            seen.update(jsonlib.loads(request.content))
            return httpx.Response(200, json={"vectors": [[3.0, 4.0], [0.0, 2.0]]})

        gateway = self.embedding_gateway(handler)
        vectors = gateway.embed(["a", "b"], demonstrations=[("q", "d")])
        assert set(seen) == {"inputs", "instruction", "demonstrations"}
        assert seen["inputs"] == ["a", "b"]
        assert seen["demonstrations"] == [["q", "d"]]
        norms = np.linalg.norm(vectors.astype(np.float64), axis=1)
        assert np.all(np.abs(norms - 1.0) <= 1e-6)
        assert vectors[0] == pytest.approx([0.6, 0.8], abs=1e-6)

    def test_embedding_malformed_vectors(self):
        import httpx

        gateway = self.embedding_gateway(
            lambda request: httpx.Response(200, json={"vectors": [[1.0]]})
        )
        with pytest.raises(GatewayError):
            gateway.embed(["a", "b"])

    def test_embedding_zero_vector_rejected(self):
        import httpx

        gateway = self.embedding_gateway(
            lambda request: httpx.Response(200, json={"vectors": [[0.0, 0.0]]})
        )
        with pytest.raises(GatewayError):
            gateway.embed(["a"])
