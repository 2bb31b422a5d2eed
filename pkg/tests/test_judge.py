import json
import threading

import httpx
import pytest

from struct_reward.judge import (
    JudgeClient,
    JudgeConfig,
    JudgeTransportError,
    MockJudge,
    build_correctness_prompt,
    build_grading_prompt,
    parse_correctness_response,
    parse_grading_response,
)


class RecordedServer:
    """httpx.MockTransport backed by a scripted response queue with a hit counter."""

    def __init__(self, responses):
        self.responses = list(responses)
        self.hits = 0
        self.requests = []
        self.lock = threading.Lock()

    def transport(self):
        def handler(request: httpx.Request) -> httpx.Response:
            with self.lock:
                self.hits += 1
                self.requests.append(json.loads(request.content.decode("utf-8")))
                if not self.responses:
                    return httpx.Response(500, json={"error": "empty script"})
                content = self.responses.pop(0)
            if content is None:
                raise httpx.ConnectError("connection refused")
            return httpx.Response(200, json={
                "choices": [{"message": {"role": "assistant", "content": content}}]
            })

        return httpx.MockTransport(handler)


def cfg(**overrides):
    base = dict(endpoint_url="http://judge.test/v1/chat", model_name="test-judge",
                retry_backoff_secs=0.0, max_retries=2)
    base.update(overrides)
    return JudgeConfig(**base)


class TestPrompts:
    def test_grading_prompt_contains_gold_and_numbered_candidates(self):
        prompt = build_grading_prompt("SELECT 1", ["SELECT 1", "SELECT 2"], "SQL")
        assert "Correct Query: SELECT 1" in prompt
        assert "1. SELECT 1" in prompt and "2. SELECT 2" in prompt
        assert "'Very bad', 'Bad', 'Above average', 'Good', or 'Excellent'" in prompt

    def test_dialect_word_swap(self):
        prompt = build_grading_prompt("MATCH (a) RETURN a", ["MATCH (a) RETURN a"], "Cypher")
        assert "SQL" not in prompt
        assert "Cypher queries" in prompt

    def test_correctness_prompt(self):
        prompt = build_correctness_prompt("SELECT 1", "SELECT 2", "schema here", "SQL")
        assert "Schema: schema here" in prompt
        assert "Predicted query: SELECT 2" in prompt
        assert 'Return ONLY "Correct" or "Wrong"' in prompt
        assert "If no SQL query was found then the answer is Wrong" in prompt


class TestResponseParsing:
    def test_one_label_per_line(self):
        labels = parse_grading_response("1. Excellent\n2. Bad", 2)
        assert labels == [("excellent", True), ("bad", True)]

    def test_shuffled_numbered_lines(self):
        response = "3. Good\n1. Excellent\n2. Very bad"
        labels = parse_grading_response(response, 3)
        assert [l for l, _ in labels] == ["excellent", "very_bad", "good"]

    def test_unnumbered_lines_fill_sequentially(self):
        labels = parse_grading_response("Excellent\nAbove average", 2)
        assert [l for l, _ in labels] == ["excellent", "above_average"]

    def test_very_bad_not_confused_with_bad(self):
        labels = parse_grading_response("1. Very bad", 1)
        assert labels == [("very_bad", True)]

    def test_case_insensitive(self):
        labels = parse_grading_response("1. ABOVE AVERAGE", 1)
        assert labels == [("above_average", True)]

    def test_unparseable_falls_back_to_very_bad(self):
        labels = parse_grading_response("no grades here", 2)
        assert labels == [("very_bad", False), ("very_bad", False)]

    def test_correctness_variants(self):
        assert parse_correctness_response("Correct") == "correct"
        assert parse_correctness_response("correct.") == "correct"
        assert parse_correctness_response("  WRONG!") == "wrong"
        assert parse_correctness_response("The answer is Wrong") == "wrong"
        assert parse_correctness_response("Incorrect") == "wrong"
        assert parse_correctness_response("???") == "wrong"


class TestJudgeClient:
    def test_order_preserved_for_batch_of_five(self):
        server = RecordedServer(["5. Excellent\n4. Good\n3. Above average\n2. Bad\n1. Very bad"])
        client = JudgeClient(cfg(), transport=server.transport())
        verdicts = client.grade("SELECT 1", [f"SELECT {i}" for i in range(5)], "")
        assert [v.class_label for v in verdicts] == [
            "very_bad", "bad", "above_average", "good", "excellent"]
        assert [v.score for v in verdicts] == [0.0, 0.25, 0.5, 0.75, 1.0]
        assert server.hits == 1

    def test_single_request_per_batch(self):
        server = RecordedServer(["1. Good\n2. Good\n3. Good"])
        client = JudgeClient(cfg(), transport=server.transport())
        client.grade("SELECT 1", ["a", "b", "c"], "")
        assert server.hits == 1

    def test_request_shape(self):
        server = RecordedServer(["1. Good"])
        client = JudgeClient(cfg(), transport=server.transport())
        client.grade("SELECT 1", ["SELECT 2"], "")
        request = server.requests[0]
        assert request["model"] == "test-judge"
        assert request["temperature"] == 0
        assert request["messages"][0]["role"] == "user"

    def test_unparseable_response_maps_to_very_bad(self):
        server = RecordedServer(["I refuse to grade."])
        client = JudgeClient(cfg(), transport=server.transport())
        verdicts = client.grade("SELECT 1", ["SELECT 2"], "")
        assert verdicts[0].class_label == "very_bad"
        assert verdicts[0].score == 0.0
        assert not verdicts[0].parsed

    def test_cache_suppresses_network_on_rerun(self, tmp_path):
        server = RecordedServer(["1. Excellent", "1. Excellent"])
        config = cfg(cache_dir=str(tmp_path / "cache"))
        client = JudgeClient(config, transport=server.transport())
        first = client.grade("SELECT 1", ["SELECT 1"], "")
        assert server.hits == 1
        assert not first[0].cached

        server2 = RecordedServer(["should not be used"])
        client2 = JudgeClient(config, transport=server2.transport())
        second = client2.grade("SELECT 1", ["SELECT 1"], "")
        assert server2.hits == 0
        assert second[0].cached
        assert second[0].class_label == "excellent"

    def test_cache_hit_with_endpoint_down(self, tmp_path):
        config = cfg(cache_dir=str(tmp_path / "cache"))
        server = RecordedServer(["1. Good"])
        JudgeClient(config, transport=server.transport()).grade("g", ["p"], "")

        dead = RecordedServer([None, None])
        client = JudgeClient(config, transport=dead.transport())
        verdicts = client.grade("g", ["p"], "")
        assert verdicts[0].cached
        assert verdicts[0].class_label == "good"
        assert dead.hits == 0

    def test_transport_failure_raises_with_indices(self):
        server = RecordedServer([None, None, None])
        client = JudgeClient(cfg(max_retries=2), transport=server.transport())
        with pytest.raises(JudgeTransportError) as err:
            client.grade("SELECT 1", ["a", "b"], "")
        assert err.value.unscored_indices == [0, 1]
        assert server.hits == 2  # retried

    def test_retry_then_success(self):
        server = RecordedServer([None, "1. Good"])
        client = JudgeClient(cfg(max_retries=3), transport=server.transport())
        verdicts = client.grade("SELECT 1", ["SELECT 2"], "")
        assert verdicts[0].class_label == "good"
        assert server.hits == 2

    def test_correctness_absent_pred_skips_network(self):
        server = RecordedServer(["Correct"])
        client = JudgeClient(cfg(), transport=server.transport())
        assert client.correctness("SELECT 1", None, "") == "wrong"
        assert client.correctness("SELECT 1", "   ", "") == "wrong"
        assert server.hits == 0

    def test_correctness_round_trip(self):
        server = RecordedServer(["Correct"])
        client = JudgeClient(cfg(), transport=server.transport())
        assert client.correctness("SELECT 1", "select 1", "schema") == "correct"

    def test_empty_candidates_rejected(self):
        client = JudgeClient(cfg(), transport=RecordedServer([]).transport())
        with pytest.raises(ValueError, match="candidates"):
            client.grade("SELECT 1", [], "")

    def test_missing_endpoint_is_transport_error(self, monkeypatch):
        monkeypatch.delenv("STRUCT_REWARD_JUDGE_URL", raising=False)
        client = JudgeClient(cfg(endpoint_url=""))
        with pytest.raises(JudgeTransportError, match="not configured"):
            client.grade("SELECT 1", ["SELECT 2"], "")

    def test_api_key_header(self, monkeypatch):
        monkeypatch.setenv("STRUCT_REWARD_JUDGE_KEY", "secret-key")
        captured = {}

        def handler(request):
            captured["auth"] = request.headers.get("authorization")
            return httpx.Response(200, json={
                "choices": [{"message": {"content": "1. Good"}}]})

        client = JudgeClient(cfg(), transport=httpx.MockTransport(handler))
        client.grade("g", ["p"], "")
        assert captured["auth"] == "Bearer secret-key"


class TestJudgeConfig:
    def test_class_scores_must_increase(self):
        bad = dict(very_bad=0.0, bad=0.5, above_average=0.5, good=0.75, excellent=1.0)
        with pytest.raises(ValueError, match="increasing"):
            JudgeConfig(class_scores=bad).validate()

    def test_class_scores_bounds(self):
        bad = dict(very_bad=0.0, bad=0.25, above_average=0.5, good=0.75, excellent=1.5)
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            JudgeConfig(class_scores=bad).validate()

    def test_monotone_default_mapping(self):
        config = JudgeConfig()
        config.validate()
        scores = [config.class_scores[c] for c in
                  ("very_bad", "bad", "above_average", "good", "excellent")]
        assert scores == sorted(scores) and len(set(scores)) == 5


class TestMockJudge:
    def test_exact_match_is_excellent(self):
        verdicts = MockJudge().grade("SELECT 1", ["select 1;"], "", dialect_word="SQL")
        assert verdicts[0].class_label == "excellent"
        assert verdicts[0].score == 1.0

    def test_gibberish_is_very_bad(self):
        verdicts = MockJudge().grade("SELECT 1", ["blah blah"], "", dialect_word="SQL")
        assert verdicts[0].class_label == "very_bad"

    def test_parseable_but_unrelated_is_bad(self):
        verdicts = MockJudge().grade(
            "SELECT a FROM t", ["SELECT zz FROM qq WHERE k = 2"], "", dialect_word="SQL")
        assert verdicts[0].class_label == "bad"

    def test_near_miss_is_good(self):
        gold = "SELECT a FROM t WHERE x = 1 AND y = 2 AND z = 3"
        pred = "SELECT a FROM t WHERE x = 1 AND y = 2 AND z = 4"
        verdicts = MockJudge().grade(gold, [pred], "", dialect_word="SQL")
        assert verdicts[0].class_label == "good"

    def test_cypher_mode_uses_graph_reward(self):
        gold = "MATCH (a:Person)-[:KNOWS]->(b:Person) RETURN a"
        near = "MATCH (a:Person)-[:KNOWS]->(b:Actor) RETURN a"
        verdicts = MockJudge().grade(gold, [near], "", dialect_word="Cypher")
        assert verdicts[0].class_label == "above_average"

    def test_deterministic(self):
        gold = "SELECT a FROM t"
        candidates = ["SELECT a FROM t", "SELECT b FROM t", "nah"]
        a = MockJudge().grade(gold, candidates, "", dialect_word="SQL")
        b = MockJudge().grade(gold, candidates, "", dialect_word="SQL")
        assert a == b
