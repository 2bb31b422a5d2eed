"""LLM-judge rewards: ordinal grading of candidate batches and binary checking.

The live client talks to a chat-completion endpoint (credentials via the
STRUCT_REWARD_JUDGE_URL / STRUCT_REWARD_JUDGE_KEY environment variables) and
caches every exchange by content hash so reruns are reproducible and free. A
deterministic offline mock with the same surface ships for tests and
air-gapped runs; its rule-based grades are a stand-in, not a model.
"""
from __future__ import annotations

import hashlib
import json
import os
import re
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import httpx

from . import cypher_graph, metrics, sql_components

ENV_JUDGE_URL = "STRUCT_REWARD_JUDGE_URL"
ENV_JUDGE_KEY = "STRUCT_REWARD_JUDGE_KEY"

VERY_BAD = "very_bad"
BAD = "bad"
ABOVE_AVERAGE = "above_average"
GOOD = "good"
EXCELLENT = "excellent"

CLASS_ORDER = (VERY_BAD, BAD, ABOVE_AVERAGE, GOOD, EXCELLENT)

DEFAULT_CLASS_SCORES = {
    VERY_BAD: 0.0,
    BAD: 0.25,
    ABOVE_AVERAGE: 0.5,
    GOOD: 0.75,
    EXCELLENT: 1.0,
}

# Wire labels, matched case-insensitively; multi-word labels checked first.
_LABEL_PATTERNS = (
    ("very bad", VERY_BAD),
    ("above average", ABOVE_AVERAGE),
    ("excellent", EXCELLENT),
    ("good", GOOD),
    ("bad", BAD),
)

GRADING_TEMPLATE = """Compare these SQL queries to the correct query and grade each one as: 'Very bad', 'Bad', 'Above average', 'Good', or 'Excellent'.

Use the following grading system, with the correct query as reference:

Correct Query: {true_query}

1. Excellent: Perfect match with {true_query}

2. Good: Contains only grammar mistakes

3. Above average: Mostly correct but contains one logical error

4. Bad: Contains multiple mistakes

5. Very bad: No query produced or significantly different from correct query

Queries to grade:
{queries_to_rank}

{format_instructions}"""

FORMAT_INSTRUCTIONS = (
    "Respond with one line per query in the form '<number>. <grade>', "
    "numbered to match the queries above."
)

CORRECTNESS_TEMPLATE = """You are SQL expert and your task is to evaluate if the predicted SQL query is correct based on the Schema and the correct SQL query. If no SQL query was found then the answer is Wrong. The query is considered correct even if the only mistakes are in letter casing (uppercase vs lowercase).

Schema: {schema}

Predicted query: {pred_query}

Correct SQL query: {correct_query}

Return ONLY "Correct" or "Wrong\""""


class JudgeTransportError(RuntimeError):
    """Endpoint unreachable after retries; carries the unscored candidate indices."""

    def __init__(self, message: str, unscored_indices: list[int]):
        super().__init__(message)
        self.unscored_indices = unscored_indices


@dataclass(frozen=True)
class JudgeVerdict:
    class_label: str
    score: float
    raw_response: str
    cached: bool
    parsed: bool = True


@dataclass(frozen=True)
class JudgeConfig:
    endpoint_url: str = ""
    model_name: str = "judge"
    dialect_word: str = "SQL"  # SQL | Cypher
    max_parallel: int = 4
    cache_dir: Optional[str] = None
    class_scores: dict = field(default_factory=lambda: dict(DEFAULT_CLASS_SCORES))
    timeout_secs: float = 30.0
    max_retries: int = 3
    retry_backoff_secs: float = 0.5

    def validate(self) -> None:
        if self.dialect_word not in ("SQL", "Cypher"):
            raise ValueError("dialect_word must be 'SQL' or 'Cypher'")
        if self.max_parallel < 1:
            raise ValueError("max_parallel must be >= 1")
        missing = [c for c in CLASS_ORDER if c not in self.class_scores]
        if missing:
            raise ValueError(f"class_scores missing classes: {', '.join(missing)}")
        scores = [self.class_scores[c] for c in CLASS_ORDER]
        if any(not 0.0 <= s <= 1.0 for s in scores):
            raise ValueError("class_scores values must lie in [0, 1]")
        if any(a >= b for a, b in zip(scores, scores[1:])):
            raise ValueError("class_scores must be strictly increasing from very_bad to excellent")


def _swap_dialect(template: str, dialect_word: str) -> str:
    if dialect_word == "SQL":
        return template
    return template.replace("SQL", dialect_word)


def build_grading_prompt(gold: str, candidates, dialect_word: str) -> str:
    numbered = "\n".join(f"{i + 1}. {c}" for i, c in enumerate(candidates))
    template = _swap_dialect(GRADING_TEMPLATE, dialect_word)
    return template.format(true_query=gold, queries_to_rank=numbered,
                           format_instructions=FORMAT_INSTRUCTIONS)


def build_correctness_prompt(gold: str, pred: str, schema_text: str, dialect_word: str) -> str:
    template = _swap_dialect(CORRECTNESS_TEMPLATE, dialect_word)
    return template.format(schema=schema_text, pred_query=pred, correct_query=gold)


def _find_label(text: str) -> Optional[str]:
    # Earliest occurrence wins; multi-word labels are tried first so "very
    # bad" beats its "bad" substring at the same position.
    lowered = text.lower()
    best = None
    for pattern, label in _LABEL_PATTERNS:
        pos = lowered.find(pattern)
        if pos >= 0 and (best is None or pos < best[0]):
            best = (pos, label)
    return best[1] if best else None


_NUMBERED_LINE = re.compile(r"\s*(\d+)\s*[.:)\-]?\s*(.*)")


def parse_grading_response(response: str, n_candidates: int) -> list[tuple[str, bool]]:
    """Per-candidate (class, parsed) pairs from a grading response.

    Numbered lines are mapped by number; unnumbered labeled lines fill the
    remaining slots in order; anything left unparsed falls back to very_bad.
    """
    assigned: dict[int, str] = {}
    sequential: list[str] = []
    for line in response.splitlines():
        if not line.strip():
            continue
        m = _NUMBERED_LINE.match(line)
        if m and m.group(1):
            idx = int(m.group(1)) - 1
            label = _find_label(m.group(2)) or _find_label(line)
            if label is not None and 0 <= idx < n_candidates and idx not in assigned:
                assigned[idx] = label
                continue
        label = _find_label(line)
        if label is not None:
            sequential.append(label)
    seq_iter = iter(sequential)
    out: list[tuple[str, bool]] = []
    for i in range(n_candidates):
        if i in assigned:
            out.append((assigned[i], True))
        else:
            label = next(seq_iter, None)
            if label is not None:
                out.append((label, True))
            else:
                out.append((VERY_BAD, False))
    return out


def parse_correctness_response(response: str) -> str:
    matches = [(m.start(), m.group(0).lower())
               for m in re.finditer(r"\b(correct|wrong)\b", response, re.IGNORECASE)]
    if not matches:
        return "wrong"
    return matches[0][1]


class _Cache:
    def __init__(self, cache_dir):
        self.dir = Path(cache_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    @staticmethod
    def key(model_name: str, prompt: str) -> str:
        return hashlib.sha256(
            model_name.encode("utf-8") + b"\x00" + prompt.encode("utf-8")).hexdigest()

    def get(self, key: str) -> Optional[str]:
        path = self.dir / f"{key}.json"
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            return None
        return payload.get("response")

    def put(self, key: str, request_text: str, response_text: str) -> None:
        payload = json.dumps({"request": request_text, "response": response_text},
                             ensure_ascii=False)
        with self._lock:
            fd, tmp = tempfile.mkstemp(dir=self.dir, suffix=".tmp")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as handle:
                    handle.write(payload)
                os.replace(tmp, self.dir / f"{key}.json")
            finally:
                if os.path.exists(tmp):
                    os.unlink(tmp)


class JudgeClient:
    """Chat-completion judge with bounded parallelism, retries and caching."""

    def __init__(self, cfg: JudgeConfig, transport: Optional[httpx.BaseTransport] = None):
        cfg.validate()
        self.cfg = cfg
        self._url = cfg.endpoint_url or os.environ.get(ENV_JUDGE_URL, "")
        self._client = httpx.Client(transport=transport, timeout=cfg.timeout_secs)
        self._semaphore = threading.BoundedSemaphore(cfg.max_parallel)
        self._cache = _Cache(cfg.cache_dir) if cfg.cache_dir else None

    def close(self) -> None:
        self._client.close()

    def _complete(self, prompt: str, unscored: list[int]) -> tuple[str, bool]:
        """Returns (response text, came_from_cache)."""
        request = {
            "model": self.cfg.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        }
        request_text = json.dumps(request, ensure_ascii=False)
        key = _Cache.key(self.cfg.model_name, prompt)
        if self._cache is not None:
            hit = self._cache.get(key)
            if hit is not None:
                return hit, True
        if not self._url:
            raise JudgeTransportError(
                f"judge endpoint not configured (set {ENV_JUDGE_URL} or endpoint_url)",
                unscored)
        headers = {}
        api_key = os.environ.get(ENV_JUDGE_KEY)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        last_error: Optional[Exception] = None
        for attempt in range(self.cfg.max_retries):
            try:
                with self._semaphore:
                    resp = self._client.post(self._url, json=request, headers=headers)
                resp.raise_for_status()
                content = resp.json()["choices"][0]["message"]["content"]
                if self._cache is not None:
                    self._cache.put(key, request_text, content)
                return content, False
            except (httpx.HTTPError, KeyError, ValueError) as exc:
                last_error = exc
                if attempt + 1 < self.cfg.max_retries:
                    time.sleep(self.cfg.retry_backoff_secs * (attempt + 1))
        raise JudgeTransportError(
            f"judge request failed after {self.cfg.max_retries} attempts: {last_error}",
            unscored)

    def grade(self, gold: str, candidates, schema_text: str = "",
              dialect_word: Optional[str] = None) -> list[JudgeVerdict]:
        if not candidates:
            raise ValueError("candidates must be non-empty")
        word = dialect_word or self.cfg.dialect_word
        prompt = build_grading_prompt(gold, candidates, word)
        response, cached = self._complete(prompt, list(range(len(candidates))))
        labels = parse_grading_response(response, len(candidates))
        return [
            JudgeVerdict(class_label=label, score=self.cfg.class_scores[label],
                         raw_response=response, cached=cached, parsed=parsed)
            for label, parsed in labels
        ]

    def correctness(self, gold: str, pred: Optional[str], schema_text: str,
                    dialect_word: Optional[str] = None) -> str:
        if pred is None or not pred.strip():
            return "wrong"
        word = dialect_word or self.cfg.dialect_word
        prompt = build_correctness_prompt(gold, pred, schema_text, word)
        response, _cached = self._complete(prompt, [0])
        return parse_correctness_response(response)


class MockJudge:
    """Offline rule-based judge with the JudgeClient surface.

    Grades by exact match and structural similarity of the dialect at hand.
    Deterministic and network-free; not a substitute for a real judge model.
    """

    def __init__(self, cfg: Optional[JudgeConfig] = None):
        self.cfg = cfg or JudgeConfig()
        self.cfg.validate()

    def close(self) -> None:
        pass

    def _classify(self, gold: str, candidate: str, word: str) -> str:
        if metrics.exact_match(gold, candidate):
            return EXCELLENT
        if word == "Cypher":
            _graph, parse_ok = cypher_graph.extract_pattern_graph(candidate)
            structural = cypher_graph.ged_reward(gold, candidate)
        else:
            gold_set, _gold_ok = sql_components.decompose_sql(gold)
            pred_set, parse_ok = sql_components.decompose_sql(candidate)
            structural = sql_components.component_f1(gold_set, pred_set) if parse_ok else 0.0
        if structural >= 0.8:
            return GOOD
        if structural >= 0.5:
            return ABOVE_AVERAGE
        if parse_ok:
            return BAD
        return VERY_BAD

    def grade(self, gold: str, candidates, schema_text: str = "",
              dialect_word: Optional[str] = None) -> list[JudgeVerdict]:
        if not candidates:
            raise ValueError("candidates must be non-empty")
        word = dialect_word or self.cfg.dialect_word
        out = []
        for candidate in candidates:
            label = self._classify(gold, candidate, word)
            out.append(JudgeVerdict(
                class_label=label, score=self.cfg.class_scores[label],
                raw_response=f"mock:{label}", cached=False))
        return out

    def correctness(self, gold: str, pred: Optional[str], schema_text: str,
                    dialect_word: Optional[str] = None) -> str:
        if pred is None or not pred.strip():
            return "wrong"
        return "correct" if metrics.exact_match(gold, pred) else "wrong"


def judge_grade(gold: str, candidates, schema_text: str, cfg: JudgeConfig,
                client: Optional[JudgeClient] = None) -> list[JudgeVerdict]:
    own = client is None
    client = client or JudgeClient(cfg)
    try:
        return client.grade(gold, candidates, schema_text)
    finally:
        if own:
            client.close()


def judge_correctness(gold: str, pred: Optional[str], schema_text: str, cfg: JudgeConfig,
                      client: Optional[JudgeClient] = None) -> str:
    own = client is None
    client = client or JudgeClient(cfg)
    try:
        return client.correctness(gold, pred, schema_text)
    finally:
        if own:
            client.close()
