"""Clause-level decomposition of SQL queries and the component-match F1 reward.

Queries are split into a multiset of (kind, normalized text) items: select
items, tables, join pairs, predicates, grouping/ordering keys, limits, set
operators and aggregate calls. Matching two queries is multiset F1 over those
items, which gives partial credit for partially correct structure.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

SELECT_ITEM = "select_item"
FROM_TABLE = "from_table"
JOIN_PAIR = "join_pair"
WHERE_PRED = "where_pred"
GROUP_KEY = "group_key"
HAVING_PRED = "having_pred"
ORDER_KEY = "order_key"
LIMIT_VAL = "limit_val"
SET_OP = "set_op"
AGG_FUNC = "agg_func"

ITEM_KINDS = frozenset({
    SELECT_ITEM, FROM_TABLE, JOIN_PAIR, WHERE_PRED, GROUP_KEY,
    HAVING_PRED, ORDER_KEY, LIMIT_VAL, SET_OP, AGG_FUNC,
})

_AGG_NAMES = frozenset({"count", "sum", "avg", "min", "max"})
_JOIN_MODIFIERS = frozenset({"inner", "left", "right", "full", "outer", "cross", "natural"})
_CLAUSE_WORDS = frozenset({"select", "from", "where", "group", "having", "order", "limit"})
_SET_OPS = frozenset({"union", "intersect", "except"})


class _ParseFailure(Exception):
    pass


@dataclass(frozen=True)
class ComponentSet:
    """Multiset of (kind, text) items in canonical sorted order."""

    items: tuple[tuple[str, str], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(sorted(self.items)))

    def counter(self) -> Counter:
        return Counter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


# ---------------------------------------------------------------------------
# tokenizer

_COMMENT_LINE = re.compile(r"--[^\n]*")
_COMMENT_BLOCK = re.compile(r"/\*.*?\*/", re.DOTALL)
_NUMBER = re.compile(r"\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")
_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_MULTI_OPS = ("<=", ">=", "<>", "!=", "||")


def _tokenize(sql: str) -> list[str]:
    """Lowercased token stream; string literals and quoted identifiers are atomic.

    Raises _ParseFailure on unterminated literals. Identifier quoting
    characters are dropped, string literal quotes are kept.
    """
    sql = _COMMENT_BLOCK.sub(" ", _COMMENT_LINE.sub(" ", sql))
    tokens: list[str] = []
    i, n = 0, len(sql)
    while i < n:
        ch = sql[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "'":
            j = i + 1
            while j < n:
                if sql[j] == "'":
                    if j + 1 < n and sql[j + 1] == "'":
                        j += 2
                        continue
                    break
                j += 1
            if j >= n:
                raise _ParseFailure("unterminated string literal")
            tokens.append(sql[i:j + 1].lower())
            i = j + 1
            continue
        if ch in ('"', "`"):
            j = sql.find(ch, i + 1)
            if j < 0:
                raise _ParseFailure("unterminated quoted identifier")
            tokens.append(sql[i + 1:j].lower())
            i = j + 1
            continue
        if ch == "[":
            j = sql.find("]", i + 1)
            if j < 0:
                raise _ParseFailure("unterminated bracketed identifier")
            tokens.append(sql[i + 1:j].lower())
            i = j + 1
            continue
        m = _NUMBER.match(sql, i)
        if m:
            tokens.append(m.group(0))
            i = m.end()
            continue
        m = _WORD.match(sql, i)
        if m:
            tokens.append(m.group(0).lower())
            i = m.end()
            continue
        two = sql[i:i + 2]
        if two in _MULTI_OPS:
            tokens.append(two)
            i += 2
            continue
        tokens.append(ch)
        i += 1
    return tokens


_NO_SPACE_BEFORE = frozenset({"(", ")", ",", ";", "."})
_NO_SPACE_AFTER = frozenset({"(", "."})


def _render(tokens: list[str]) -> str:
    """Join tokens into canonical single-spaced text (tight parens and dots)."""
    out: list[str] = []
    prev = None
    for tok in tokens:
        if out and tok not in _NO_SPACE_BEFORE and prev not in _NO_SPACE_AFTER:
            out.append(" ")
        out.append(tok)
        prev = tok
    return "".join(out)


# ---------------------------------------------------------------------------
# clause splitting

def _check_balance(tokens: list[str]) -> None:
    depth = 0
    for tok in tokens:
        if tok == "(":
            depth += 1
        elif tok == ")":
            depth -= 1
            if depth < 0:
                raise _ParseFailure("unbalanced parentheses")
    if depth != 0:
        raise _ParseFailure("unbalanced parentheses")


def _unwrap(tokens: list[str]) -> list[str]:
    """Strip trailing semicolons and whole-statement parentheses."""
    while tokens and tokens[-1] == ";":
        tokens = tokens[:-1]
    while len(tokens) >= 2 and tokens[0] == "(" and tokens[-1] == ")":
        depth = 0
        closes_at_end = True
        for idx, tok in enumerate(tokens):
            if tok == "(":
                depth += 1
            elif tok == ")":
                depth -= 1
                if depth == 0 and idx != len(tokens) - 1:
                    closes_at_end = False
                    break
        if not closes_at_end:
            break
        tokens = tokens[1:-1]
    return tokens


def _split_top(tokens: list[str], is_boundary) -> list[tuple[int, list[str]]]:
    """Split on depth-0 boundary tokens; returns (boundary index or -1, chunk)."""
    chunks: list[tuple[int, list[str]]] = []
    depth = 0
    start = 0
    for idx, tok in enumerate(tokens):
        if tok == "(":
            depth += 1
        elif tok == ")":
            depth -= 1
        elif depth == 0 and is_boundary(idx, tok):
            chunks.append((idx, tokens[start:idx]))
            start = idx + 1
    chunks.append((-1, tokens[start:]))
    return chunks


def _split_top_commas(tokens: list[str]) -> list[list[str]]:
    parts = [chunk for _, chunk in _split_top(tokens, lambda _i, t: t == ",")]
    if any(not p for p in parts):
        raise _ParseFailure("empty list element")
    return parts


def _split_top_and(tokens: list[str]) -> list[list[str]]:
    """Split on top-level AND, keeping BETWEEN ... AND ... intact."""
    parts: list[list[str]] = []
    depth = 0
    pending_between = 0
    start = 0
    for idx, tok in enumerate(tokens):
        if tok == "(":
            depth += 1
        elif tok == ")":
            depth -= 1
        elif depth == 0 and tok == "between":
            pending_between += 1
        elif depth == 0 and tok == "and":
            if pending_between:
                pending_between -= 1
            else:
                parts.append(tokens[start:idx])
                start = idx + 1
    parts.append(tokens[start:])
    if any(not p for p in parts):
        raise _ParseFailure("empty predicate")
    return parts


def _subquery_spans(tokens: list[str]) -> list[tuple[int, int]]:
    """Outermost (start, end) index pairs of parenthesized SELECT/WITH groups."""
    spans: list[tuple[int, int]] = []
    i, n = 0, len(tokens)
    while i < n:
        if tokens[i] == "(":
            j = i + 1
            while j < n and tokens[j] == "(":
                j += 1
            if j < n and tokens[j] in ("select", "with"):
                depth = 0
                end = i
                for k in range(i, n):
                    if tokens[k] == "(":
                        depth += 1
                    elif tokens[k] == ")":
                        depth -= 1
                        if depth == 0:
                            end = k
                            break
                spans.append((i, end))
                i = end + 1
                continue
        i += 1
    return spans


def _in_spans(idx: int, spans: list[tuple[int, int]]) -> bool:
    return any(s <= idx <= e for s, e in spans)


def _decompose_tokens(tokens: list[str], items: list[tuple[str, str]]) -> None:
    tokens = _unwrap(tokens)
    if not tokens:
        raise _ParseFailure("empty statement")

    # Set operations first: decompose each side, record the operator.
    chunks = _split_top(tokens, lambda _i, t: t in _SET_OPS)
    if len(chunks) > 1:
        for idx, chunk in chunks[:-1]:
            op = tokens[idx]
            nxt = tokens[idx + 1] if idx + 1 < len(tokens) else ""
            if op == "union" and nxt == "all":
                items.append((SET_OP, "union all"))
            else:
                items.append((SET_OP, op))
        sides = []
        for _, chunk in chunks:
            side = chunk[1:] if chunk and chunk[0] == "all" else chunk
            sides.append(side)
        for side in sides:
            _decompose_tokens(side, items)
        return

    _decompose_select(tokens, items)


def _clause_positions(tokens: list[str]) -> list[tuple[str, int, int]]:
    """(clause, keyword index, segment start) for depth-0 clause keywords."""
    found: list[tuple[str, int, int]] = []
    seen: set[str] = set()
    depth = 0
    for idx, tok in enumerate(tokens):
        if tok == "(":
            depth += 1
        elif tok == ")":
            depth -= 1
        elif depth == 0 and tok in _CLAUSE_WORDS:
            if tok in ("group", "order"):
                if idx + 1 >= len(tokens) or tokens[idx + 1] != "by":
                    continue
                seg_start = idx + 2
            else:
                seg_start = idx + 1
            if tok in seen:
                raise _ParseFailure(f"duplicate {tok.upper()} clause")
            seen.add(tok)
            found.append((tok, idx, seg_start))
    return found


def _decompose_select(tokens: list[str], items: list[tuple[str, str]]) -> None:
    clauses = _clause_positions(tokens)
    if not clauses or not any(c[0] == "select" for c in clauses):
        raise _ParseFailure("no SELECT clause")
    # CTE prologue (WITH ... AS (...)) precedes the first clause keyword; its
    # bodies are picked up by the subquery scan below.
    if clauses[0][1] > 0 and tokens[0] != "with":
        raise _ParseFailure("statement does not start with SELECT or WITH")

    segments: dict[str, list[str]] = {}
    for n, (clause, _kw_idx, seg_start) in enumerate(clauses):
        seg_end = clauses[n + 1][1] if n + 1 < len(clauses) else len(tokens)
        segments[clause] = tokens[seg_start:seg_end]

    spans = _subquery_spans(tokens)

    sel = segments.get("select", [])
    if not sel:
        raise _ParseFailure("empty SELECT list")
    for part in _split_top_commas(sel):
        items.append((SELECT_ITEM, _render(part)))
    # Aggregate calls, skipping any that belong to a nested subquery.
    sel_offset = next(s for c, _k, s in clauses if c == "select")
    for i, tok in enumerate(sel):
        abs_idx = sel_offset + i
        if tok in _AGG_NAMES and i + 1 < len(sel) and sel[i + 1] == "(":
            if not _in_spans(abs_idx, spans):
                items.append((AGG_FUNC, tok))

    if "from" in segments:
        _decompose_from(segments["from"], items)
    if "where" in segments:
        for part in _split_top_and(segments["where"]):
            items.append((WHERE_PRED, _render(part)))
    if "group" in segments:
        for part in _split_top_commas(segments["group"]):
            items.append((GROUP_KEY, _render(part)))
    if "having" in segments:
        for part in _split_top_and(segments["having"]):
            items.append((HAVING_PRED, _render(part)))
    if "order" in segments:
        for part in _split_top_commas(segments["order"]):
            if part and part[-1] in ("asc", "desc"):
                items.append((ORDER_KEY, _render(part)))
            else:
                items.append((ORDER_KEY, _render(part) + " asc"))
    if "limit" in segments:
        if not segments["limit"]:
            raise _ParseFailure("empty LIMIT clause")
        items.append((LIMIT_VAL, _render(segments["limit"])))

    for start, end in spans:
        _decompose_tokens(tokens[start + 1:end], items)


def _decompose_from(tokens: list[str], items: list[tuple[str, str]]) -> None:
    if not tokens:
        raise _ParseFailure("empty FROM clause")
    # Join boundaries: depth-0 JOIN keyword plus its contiguous modifiers.
    boundaries: list[tuple[int, int]] = []  # (modifier start, join index)
    depth = 0
    for idx, tok in enumerate(tokens):
        if tok == "(":
            depth += 1
        elif tok == ")":
            depth -= 1
        elif depth == 0 and tok == "join":
            start = idx
            while start > 0 and tokens[start - 1] in _JOIN_MODIFIERS:
                start -= 1
            boundaries.append((start, idx))

    first_end = boundaries[0][0] if boundaries else len(tokens)
    for ref in _split_top_commas(tokens[:first_end]):
        if not (ref[0] == "(" and _subquery_spans(ref)):
            items.append((FROM_TABLE, _render(ref)))

    for n, (_start, join_idx) in enumerate(boundaries):
        seg_end = boundaries[n + 1][0] if n + 1 < len(boundaries) else len(tokens)
        seg = tokens[join_idx + 1:seg_end]
        if not seg:
            raise _ParseFailure("JOIN without table")
        on_chunks = _split_top(seg, lambda _i, t: t == "on")
        table_part = on_chunks[0][1]
        cond_part = seg[len(table_part) + 1:] if len(on_chunks) > 1 else []
        items.append((JOIN_PAIR, _render(table_part) + "|" + _render(cond_part)))


def decompose_sql(query: str) -> tuple[ComponentSet, bool]:
    """Decompose a SQL query into its component multiset.

    Returns (components, parse_ok). Any parse failure yields an empty set and
    parse_ok=False, never a partial decomposition.
    """
    items: list[tuple[str, str]] = []
    try:
        tokens = _tokenize(query)
        if not tokens:
            raise _ParseFailure("empty query")
        _check_balance(tokens)
        _decompose_tokens(tokens, items)
    except _ParseFailure:
        return ComponentSet(), False
    except RecursionError:
        return ComponentSet(), False
    return ComponentSet(tuple(items)), True


def component_f1(gold: ComponentSet, pred: ComponentSet) -> float:
    """Multiset F1 over (kind, text) items; 1.0 when both sets are empty."""
    if len(gold) == 0 and len(pred) == 0:
        return 1.0
    if len(gold) == 0 or len(pred) == 0:
        return 0.0
    overlap = sum((gold.counter() & pred.counter()).values())
    precision = overlap / len(pred)
    recall = overlap / len(gold)
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)
