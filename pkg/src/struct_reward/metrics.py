"""Evaluation metrics: exact match, BLEU-4, and execution-based comparison."""
from __future__ import annotations

import math
import re
import subprocess
import tempfile
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

# Keywords (SQL + Cypher + aggregate names) folded to lowercase for exact match.
_FOLD_WORDS = frozenset(
    """
    select from where group by having order limit offset join inner left right
    outer full cross natural on as and or not in exists is null like between
    union all intersect except distinct case when then else end asc desc
    match optional merge create return with unwind call yield set delete
    detach remove skip
    count sum avg min max
    """.split()
)

_STRING_OR_WORD = re.compile(r"'(?:[^']|'')*'|\"[^\"]*\"|[A-Za-z_][A-Za-z0-9_]*|\S")
_TOKEN = re.compile(r"[A-Za-z0-9_]+|[^\sA-Za-z0-9_]")


@dataclass(frozen=True)
class ExecResult:
    status: str  # ok | error | timeout
    rows: tuple[tuple, ...] = ()
    error_text: Optional[str] = None

    def __post_init__(self):
        if self.status not in ("ok", "error", "timeout"):
            raise ValueError(f"invalid status: {self.status!r}")
        if self.status != "ok" and self.rows:
            raise ValueError("rows are only valid with status 'ok'")


@dataclass(frozen=True)
class ExecOracle:
    """External execution backend: a command template run per query."""

    command_template: str
    timeout_secs: int = 30

    def __post_init__(self):
        if "{db}" not in self.command_template or "{query_file}" not in self.command_template:
            raise ValueError("command_template must contain {db} and {query_file}")
        if self.timeout_secs <= 0:
            raise ValueError("timeout_secs must be positive")


def _normalize_query(query: str) -> str:
    pieces = []
    for m in _STRING_OR_WORD.finditer(query):
        tok = m.group(0)
        if tok and tok[0] not in "'\"" and tok.lower() in _FOLD_WORDS:
            tok = tok.lower()
        pieces.append((m.start(), tok))
    # Rebuild with original spacing collapsed to single spaces.
    out = []
    last_end = None
    for start, tok in pieces:
        if last_end is not None and start > last_end:
            out.append(" ")
        out.append(tok)
        last_end = start + len(tok)
    text = "".join(out).strip()
    while text.endswith(";"):
        text = text[:-1].rstrip()
    return text


def exact_match(gold: str, pred: str) -> bool:
    """Equality after whitespace collapse, ';' strip and keyword case-folding."""
    return _normalize_query(gold) == _normalize_query(pred)


def _tokens(text: str) -> list[str]:
    return _TOKEN.findall(text)


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(gold: str, pred: str) -> float:
    """BLEU-4 on whitespace+punctuation tokens with brevity penalty.

    Zero match counts are add-one smoothed so near-misses retain signal;
    identical strings score exactly 1.0.
    """
    ref = _tokens(gold)
    hyp = _tokens(pred)
    if not ref and not hyp:
        return 1.0
    if not hyp:
        return 0.0
    log_sum = 0.0
    for n in range(1, 5):
        hyp_counts = _ngram_counts(hyp, n)
        ref_counts = _ngram_counts(ref, n)
        total = sum(hyp_counts.values())
        matched = sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
        if matched == 0:
            p = (matched + 1) / (total + 1)
        else:
            p = matched / total
        log_sum += 0.25 * math.log(p)
    if len(hyp) >= len(ref):
        bp = 1.0
    else:
        bp = math.exp(1.0 - len(ref) / len(hyp))
    return bp * math.exp(log_sum)


def _normalize_cell(cell):
    if cell is None:
        return None
    if isinstance(cell, (int, float)):
        return float(cell)
    text = str(cell)
    try:
        return float(text)
    except ValueError:
        return text


def _row_multiset(result: ExecResult) -> Counter:
    return Counter(tuple(_normalize_cell(c) for c in row) for row in result.rows)


def execution_compare(gold_exec: ExecResult, pred_exec: ExecResult) -> tuple[bool, float]:
    """(exe_match, row-multiset F1); pred errors and timeouts floor to (False, 0)."""
    if gold_exec.status != "ok" or pred_exec.status != "ok":
        return False, 0.0
    gold_rows = _row_multiset(gold_exec)
    pred_rows = _row_multiset(pred_exec)
    if not gold_rows and not pred_rows:
        return True, 1.0
    if not gold_rows or not pred_rows:
        return False, 0.0
    overlap = sum((gold_rows & pred_rows).values())
    match = gold_rows == pred_rows
    if overlap == 0:
        return match, 0.0
    precision = overlap / sum(pred_rows.values())
    recall = overlap / sum(gold_rows.values())
    return match, 2 * precision * recall / (precision + recall)


def _parse_row(line: str) -> tuple:
    return tuple(None if cell == r"\N" else cell for cell in line.split("\t"))


def run_oracle(oracle: ExecOracle, db_path, query: str) -> ExecResult:
    """Run one query through the external command protocol.

    Output contract: one row per line, tab-separated, NULL spelled ``\\N``,
    exit code 0 on success.
    """
    with tempfile.NamedTemporaryFile(
            "w", suffix=".query", delete=False, encoding="utf-8") as handle:
        handle.write(query)
        query_file = handle.name
    try:
        command = oracle.command_template.format(db=str(db_path), query_file=query_file)
        try:
            proc = subprocess.run(
                command.split(), capture_output=True, text=True,
                timeout=oracle.timeout_secs)
        except subprocess.TimeoutExpired:
            return ExecResult(status="timeout", error_text="deadline exceeded")
        except OSError as exc:
            raise RuntimeError(f"failed to spawn execution oracle: {exc}") from exc
        if proc.returncode != 0:
            text = (proc.stderr or proc.stdout or "").strip() or f"exit {proc.returncode}"
            return ExecResult(status="error", error_text=text)
        rows = tuple(_parse_row(line) for line in proc.stdout.splitlines() if line != "")
        return ExecResult(status="ok", rows=rows)
    finally:
        Path(query_file).unlink(missing_ok=True)
