"""Dataset records and extraction of final queries from raw model completions.

Dataset files are UTF-8 JSON lines with keys ``id``, ``question``, ``schema``,
``dialect`` ("sql" | "cypher"), ``gold`` and ``candidates``; unknown keys are
preserved on round-trip.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

DIALECTS = ("sql", "cypher")

FENCED_BLOCK = "fenced_block"
BARE_TAIL = "bare_tail"
NONE = "none"

_DIALECT_KEYWORDS = {
    "sql": ("select", "with"),
    "cypher": ("match", "optional", "create", "merge", "call", "return"),
}

_THINK_BLOCK = re.compile(r"\A\s*<think>.*?</think>", re.DOTALL | re.IGNORECASE)
_FENCE = re.compile(r"```([A-Za-z0-9_+-]*)[ \t]*\n?(.*?)```", re.DOTALL)


class DatasetError(ValueError):
    """Raised on malformed dataset files; carries the offending line number."""

    def __init__(self, message: str, line_no: Optional[int] = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


@dataclass(frozen=True)
class QuerySample:
    id: str
    question: str
    schema_text: str
    dialect: str
    gold_query: str
    candidates: tuple[str, ...]
    extras: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class ExtractedAnswer:
    query: Optional[str]
    had_think_block: bool
    extraction_note: str  # fenced_block | bare_tail | none

    def __post_init__(self):
        if (self.query is None) != (self.extraction_note == NONE):
            raise ValueError("query must be absent exactly when extraction_note is 'none'")


def extract_answer(completion: str, dialect: str) -> ExtractedAnswer:
    """Pull the final query out of a raw completion.

    A leading <think>...</think> block is stripped first. The last fenced
    block tagged with the dialect (or untagged) wins; a wrong-tag block is
    used only when no matching block exists. Otherwise text starting with a
    dialect keyword is taken verbatim as a bare tail.
    """
    if dialect not in DIALECTS:
        raise ValueError(f"unknown dialect: {dialect!r}")
    text = completion
    had_think = False
    m = _THINK_BLOCK.match(text)
    if m:
        had_think = True
        text = text[m.end():]

    matching: list[str] = []
    other: list[str] = []
    for m in _FENCE.finditer(text):
        tag = m.group(1).lower()
        body = m.group(2).strip()
        if tag in ("", dialect):
            matching.append(body)
        else:
            other.append(body)
    for pool in (matching, other):
        if pool:
            body = pool[-1]
            if body:
                return ExtractedAnswer(body, had_think, FENCED_BLOCK)

    tail = text.strip()
    first_word = tail.split(None, 1)[0].lower() if tail else ""
    if first_word in _DIALECT_KEYWORDS[dialect]:
        return ExtractedAnswer(tail, had_think, BARE_TAIL)
    return ExtractedAnswer(None, had_think, NONE)


def sample_from_record(record: dict, line_no: Optional[int] = None) -> QuerySample:
    if not isinstance(record, dict):
        raise DatasetError("record is not an object", line_no)
    known = ("id", "question", "schema", "dialect", "gold", "candidates")
    for key in known:
        if key not in record:
            raise DatasetError(f"missing field: {key}", line_no)
    for key in ("id", "question", "schema", "dialect", "gold"):
        if not isinstance(record[key], str):
            raise DatasetError(f"field {key} must be a string", line_no)
    if record["dialect"] not in DIALECTS:
        raise DatasetError(
            f"dialect must be one of {'/'.join(DIALECTS)}, got {record['dialect']!r}", line_no)
    if not record["gold"].strip():
        raise DatasetError("gold must be non-empty", line_no)
    cands = record["candidates"]
    if (not isinstance(cands, list) or not cands
            or any(not isinstance(c, str) for c in cands)):
        raise DatasetError("candidates must be a non-empty array of strings", line_no)
    extras = {k: v for k, v in record.items() if k not in known}
    return QuerySample(
        id=record["id"],
        question=record["question"],
        schema_text=record["schema"],
        dialect=record["dialect"],
        gold_query=record["gold"],
        candidates=tuple(cands),
        extras=extras,
    )


def record_from_sample(sample: QuerySample) -> dict:
    record = {
        "id": sample.id,
        "question": sample.question,
        "schema": sample.schema_text,
        "dialect": sample.dialect,
        "gold": sample.gold_query,
        "candidates": list(sample.candidates),
    }
    for key in sorted(sample.extras):
        record[key] = sample.extras[key]
    return record


def parse_dataset_lines(lines, expected_dialect: Optional[str] = None) -> list[QuerySample]:
    samples: list[QuerySample] = []
    mismatched: list[str] = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"invalid JSON: {exc.msg}", line_no) from exc
        sample = sample_from_record(record, line_no)
        if expected_dialect is not None and sample.dialect != expected_dialect:
            mismatched.append(sample.id)
        samples.append(sample)
    if mismatched:
        raise DatasetError(
            f"dialect mismatch: expected {expected_dialect}, offending ids: "
            + ", ".join(mismatched))
    return samples


def load_dataset(path, expected_dialect: Optional[str] = None) -> list[QuerySample]:
    """Load and validate a JSONL dataset, preserving file order."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_dataset_lines(text.splitlines(), expected_dialect)


def serialize_dataset(samples) -> str:
    """Canonical JSONL text; loading then serializing a canonical file is identity."""
    lines = [json.dumps(record_from_sample(s), ensure_ascii=False) for s in samples]
    return "".join(line + "\n" for line in lines)


def save_dataset(samples, path) -> None:
    Path(path).write_text(serialize_dataset(samples), encoding="utf-8")
