"""Property-graph extraction for Cypher queries and the graph-edit-distance reward.

A query's MATCH / OPTIONAL MATCH / MERGE / CREATE clauses are compiled into a
small pattern graph (labeled nodes, typed directed/undirected edges, equality
properties). Two pattern graphs are compared with unit-cost graph edit
distance: exact branch-and-bound search for small graphs, a bipartite
assignment upper bound otherwise. The reward is 1 - GED / max(size1, size2),
clamped to [0, 1].
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment


@dataclass
class PatternNode:
    labels: frozenset[str] = frozenset()
    props: dict[str, str] = field(default_factory=dict)
    anon: bool = False
    var: Optional[str] = None


@dataclass
class PatternEdge:
    src: int
    dst: int
    rel_types: frozenset[str] = frozenset()
    directed: bool = True
    props: dict[str, str] = field(default_factory=dict)


@dataclass
class PatternGraph:
    nodes: list[PatternNode] = field(default_factory=list)
    edges: list[PatternEdge] = field(default_factory=list)
    ignored_conditions: int = field(default=0, compare=False)

    def size(self) -> int:
        return len(self.nodes) + len(self.edges)


@dataclass(frozen=True)
class EditOp:
    op: str  # ins_node | del_node | sub_node | ins_edge | del_edge | sub_edge
    detail: str
    cost: float


@dataclass(frozen=True)
class GedResult:
    distance: float
    exact: bool
    edit_script: tuple[EditOp, ...]


@dataclass(frozen=True)
class GedConfig:
    exact_node_budget: int = 12
    max_expansions: int = 200_000

    def validate(self) -> None:
        if self.exact_node_budget < 0:
            raise ValueError("exact_node_budget must be >= 0")
        if self.max_expansions < 1:
            raise ValueError("max_expansions must be >= 1")


class _ParseFailure(Exception):
    pass


class _SearchBudgetExceeded(Exception):
    pass


# ---------------------------------------------------------------------------
# tokenizer

@dataclass(frozen=True)
class _Tok:
    kind: str  # word | string | number | punct
    text: str


_CLAUSE_WORDS = frozenset({
    "match", "optional", "merge", "create", "where", "return", "with",
    "unwind", "call", "set", "delete", "detach", "remove", "order", "skip",
    "limit", "union", "yield", "foreach", "on", "using",
})

_PATTERN_TERMINATORS = _CLAUSE_WORDS


def _tokenize(query: str) -> list[_Tok]:
    tokens: list[_Tok] = []
    i, n = 0, len(query)
    while i < n:
        ch = query[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "/" and i + 1 < n and query[i + 1] == "/":
            j = query.find("\n", i)
            i = n if j < 0 else j + 1
            continue
        if ch == "/" and i + 1 < n and query[i + 1] == "*":
            j = query.find("*/", i + 2)
            if j < 0:
                raise _ParseFailure("unterminated block comment")
            i = j + 2
            continue
        if ch in ("'", '"'):
            j = i + 1
            buf = []
            while j < n:
                if query[j] == "\\" and j + 1 < n:
                    buf.append(query[j + 1])
                    j += 2
                    continue
                if query[j] == ch:
                    break
                buf.append(query[j])
                j += 1
            if j >= n:
                raise _ParseFailure("unterminated string literal")
            tokens.append(_Tok("string", "".join(buf)))
            i = j + 1
            continue
        if ch == "`":
            j = query.find("`", i + 1)
            if j < 0:
                raise _ParseFailure("unterminated backtick identifier")
            tokens.append(_Tok("word", query[i + 1:j]))
            i = j + 1
            continue
        if ch.isdigit():
            j = i
            while j < n and query[j].isdigit():
                j += 1
            if j < n - 1 and query[j] == "." and query[j + 1].isdigit():
                j += 1
                while j < n and query[j].isdigit():
                    j += 1
            tokens.append(_Tok("number", query[i:j]))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (query[j].isalnum() or query[j] == "_"):
                j += 1
            tokens.append(_Tok("word", query[i:j]))
            i = j
            continue
        tokens.append(_Tok("punct", ch))
        i += 1
    return tokens


def _check_brackets(tokens: list[_Tok]) -> None:
    stack: list[str] = []
    pairs = {")": "(", "]": "[", "}": "{"}
    for t in tokens:
        if t.kind != "punct":
            continue
        if t.text in "([{":
            stack.append(t.text)
        elif t.text in ")]}":
            if not stack or stack.pop() != pairs[t.text]:
                raise _ParseFailure("unbalanced brackets")
    if stack:
        raise _ParseFailure("unbalanced brackets")


# ---------------------------------------------------------------------------
# pattern extraction

class _GraphBuilder:
    def __init__(self):
        self.nodes: list[PatternNode] = []
        self.edges: list[PatternEdge] = []
        self.node_by_var: dict[str, int] = {}
        self.edge_by_var: dict[str, int] = {}
        self.ignored_conditions = 0

    def add_node(self, var, labels, props) -> int:
        if var is not None and var in self.node_by_var:
            idx = self.node_by_var[var]
            node = self.nodes[idx]
            node.labels = node.labels | labels
            node.props.update(props)
            return idx
        idx = len(self.nodes)
        self.nodes.append(PatternNode(labels=labels, props=dict(props),
                                      anon=var is None, var=var))
        if var is not None:
            self.node_by_var[var] = idx
        return idx

    def add_edge(self, src, dst, rel_types, directed, props, var) -> int:
        idx = len(self.edges)
        self.edges.append(PatternEdge(src=src, dst=dst, rel_types=rel_types,
                                      directed=directed, props=dict(props)))
        if var is not None:
            self.edge_by_var[var] = idx
        return idx

    def fold_equality(self, var: str, prop: str, literal: str) -> bool:
        if var in self.node_by_var:
            self.nodes[self.node_by_var[var]].props[prop] = literal
            return True
        if var in self.edge_by_var:
            self.edges[self.edge_by_var[var]].props[prop] = literal
            return True
        return False

    def graph(self) -> PatternGraph:
        return PatternGraph(nodes=self.nodes, edges=self.edges,
                            ignored_conditions=self.ignored_conditions)


class _PatternParser:
    """Recursive-descent parser over one pattern clause's token span."""

    def __init__(self, tokens: list[_Tok], builder: _GraphBuilder):
        self.toks = tokens
        self.pos = 0
        self.b = builder

    def peek(self) -> Optional[_Tok]:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self) -> _Tok:
        if self.pos >= len(self.toks):
            raise _ParseFailure("unexpected end of pattern")
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> None:
        t = self.next()
        if t.text != text:
            raise _ParseFailure(f"expected {text!r} in pattern, got {t.text!r}")

    def parse(self) -> None:
        while True:
            self.parse_path()
            t = self.peek()
            if t is None:
                return
            if t.kind == "punct" and t.text == ",":
                self.next()
                continue
            raise _ParseFailure(f"unexpected token {t.text!r} after path")

    def parse_path(self) -> None:
        # Optional path variable binding: p = (a)-[...]->(b)
        t = self.peek()
        if (t is not None and t.kind == "word"
                and self.pos + 1 < len(self.toks)
                and self.toks[self.pos + 1].text == "="):
            self.next()
            self.next()
        left = self.parse_node_atom()
        while True:
            t = self.peek()
            if t is None or t.text not in ("-", "<"):
                return
            rel_types, props, var, directed, leftward = self.parse_rel()
            right = self.parse_node_atom()
            if leftward:
                self.b.add_edge(right, left, rel_types, directed, props, var)
            else:
                self.b.add_edge(left, right, rel_types, directed, props, var)
            left = right

    def parse_node_atom(self) -> int:
        self.expect("(")
        var = None
        labels: set[str] = set()
        props: dict[str, str] = {}
        t = self.peek()
        if t is not None and t.kind == "word":
            var = self.next().text
        while True:
            t = self.peek()
            if t is None:
                raise _ParseFailure("unterminated node atom")
            if t.text == ":":
                self.next()
                labels.add(self.parse_label())
                while self.peek() is not None and self.peek().text in ("|", "&", ":"):
                    self.next()
                    labels.add(self.parse_label())
            elif t.text == "{":
                props = self.parse_props()
            elif t.text == ")":
                self.next()
                break
            else:
                raise _ParseFailure(f"unexpected token {t.text!r} in node atom")
        return self.b.add_node(var, frozenset(labels), props)

    def parse_label(self) -> str:
        t = self.next()
        if t.kind != "word":
            raise _ParseFailure(f"expected label, got {t.text!r}")
        return t.text.lower()

    def parse_props(self) -> dict[str, str]:
        self.expect("{")
        props: dict[str, str] = {}
        if self.peek() is not None and self.peek().text == "}":
            self.next()
            return props
        while True:
            key = self.next()
            if key.kind not in ("word", "string"):
                raise _ParseFailure(f"expected property name, got {key.text!r}")
            self.expect(":")
            props[key.text.lower()] = self.parse_literal(("}", ","))
            t = self.next()
            if t.text == "}":
                return props
            if t.text != ",":
                raise _ParseFailure(f"expected ',' or '}}' in properties, got {t.text!r}")

    def parse_literal(self, stop: tuple[str, ...]) -> str:
        """Literal value text up to a top-level stop token, quote-stripped and trimmed."""
        parts: list[str] = []
        depth = 0
        while True:
            t = self.peek()
            if t is None:
                raise _ParseFailure("unterminated literal")
            if depth == 0 and t.kind == "punct" and t.text in stop:
                break
            t = self.next()
            if t.kind == "punct" and t.text in "([{":
                depth += 1
            elif t.kind == "punct" and t.text in ")]}":
                depth -= 1
            parts.append(t.text)
        if not parts:
            raise _ParseFailure("empty literal")
        return "".join(parts).strip()

    def parse_rel(self) -> tuple[frozenset[str], dict[str, str], Optional[str], bool, bool]:
        left_arrow = False
        t = self.next()
        if t.text == "<":
            left_arrow = True
            self.expect("-")
        elif t.text != "-":
            raise _ParseFailure(f"expected relationship, got {t.text!r}")
        rel_types: set[str] = set()
        props: dict[str, str] = {}
        var = None
        t = self.peek()
        if t is not None and t.text == "[":
            self.next()
            t = self.peek()
            if t is not None and t.kind == "word":
                var = self.next().text
            while True:
                t = self.peek()
                if t is None:
                    raise _ParseFailure("unterminated relationship detail")
                if t.text == ":":
                    self.next()
                    rel_types.add(self.parse_label())
                    while self.peek() is not None and self.peek().text == "|":
                        self.next()
                        if self.peek() is not None and self.peek().text == ":":
                            self.next()
                        rel_types.add(self.parse_label())
                elif t.text == "*":
                    # Variable-length pattern: flatten to one edge, ignore hops.
                    self.next()
                    while (self.peek() is not None
                           and self.peek().text not in ("]", "{")):
                        self.next()
                elif t.text == "{":
                    props = self.parse_props()
                elif t.text == "]":
                    self.next()
                    break
                else:
                    raise _ParseFailure(f"unexpected token {t.text!r} in relationship")
        self.expect("-")
        right_arrow = False
        t = self.peek()
        if t is not None and t.text == ">":
            self.next()
            right_arrow = True
        if left_arrow and right_arrow:
            raise _ParseFailure("relationship with two arrowheads")
        directed = left_arrow or right_arrow
        return frozenset(rel_types), props, var, directed, left_arrow


def _top_level_segments(tokens: list[_Tok]) -> list[tuple[str, list[_Tok]]]:
    """(clause keyword, span tokens) pairs; fails on non-clause leading tokens."""
    segments: list[tuple[str, list[_Tok]]] = []
    depth = 0
    i, n = 0, len(tokens)
    current_kw: Optional[str] = None
    start = 0
    while i < n:
        t = tokens[i]
        if t.kind == "punct":
            if t.text in "([{":
                depth += 1
            elif t.text in ")]}":
                depth -= 1
            i += 1
            continue
        if depth == 0 and t.kind == "word" and t.text.lower() in _CLAUSE_WORDS:
            word = t.text.lower()
            if current_kw is not None:
                segments.append((current_kw, tokens[start:i]))
            if word == "optional":
                if i + 1 >= n or tokens[i + 1].text.lower() != "match":
                    raise _ParseFailure("OPTIONAL must be followed by MATCH")
                current_kw = "match"
                i += 2
            elif word == "on":
                # Merge action: ON CREATE / ON MATCH introduce SET clauses.
                if i + 1 < n and tokens[i + 1].text.lower() in ("create", "match"):
                    current_kw = "on"
                    i += 2
                else:
                    current_kw = "on"
                    i += 1
            elif word == "detach":
                current_kw = "delete"
                i += 1
            else:
                current_kw = word
                i += 1
            start = i
            continue
        if current_kw is None:
            raise _ParseFailure(f"query does not start with a clause keyword: {t.text!r}")
        i += 1
    if current_kw is not None:
        segments.append((current_kw, tokens[start:]))
    if not segments:
        raise _ParseFailure("no clauses found")
    return segments


def _split_where_conjuncts(tokens: list[_Tok]) -> list[list[_Tok]]:
    parts: list[list[_Tok]] = []
    depth = 0
    start = 0
    for i, t in enumerate(tokens):
        if t.kind == "punct":
            if t.text in "([{":
                depth += 1
            elif t.text in ")]}":
                depth -= 1
        elif depth == 0 and t.kind == "word" and t.text.lower() == "and":
            parts.append(tokens[start:i])
            start = i + 1
    parts.append(tokens[start:])
    return [p for p in parts if p]


def _fold_where(tokens: list[_Tok], builder: _GraphBuilder) -> None:
    for conj in _split_where_conjuncts(tokens):
        # Accepted shape: var . prop = literal
        if (len(conj) >= 5 and conj[0].kind == "word" and conj[1].text == "."
                and conj[2].kind == "word" and conj[3].text == "="):
            literal = "".join(t.text for t in conj[4:]).strip()
            if literal and builder.fold_equality(conj[0].text, conj[2].text.lower(), literal):
                continue
        builder.ignored_conditions += 1


def extract_pattern_graph(query: str) -> tuple[PatternGraph, bool]:
    """Compile a Cypher query's pattern clauses into a PatternGraph.

    Returns (graph, parse_ok); failures yield an empty graph with
    parse_ok=False. A query with no pattern clauses (e.g. ``RETURN 1``) is a
    valid, empty graph.
    """
    try:
        tokens = _tokenize(query)
        if not tokens:
            raise _ParseFailure("empty query")
        _check_brackets(tokens)
        builder = _GraphBuilder()
        pattern_spans = []
        where_spans = []
        for kw, span in _top_level_segments(tokens):
            if kw in ("match", "merge", "create"):
                if not span:
                    raise _ParseFailure(f"{kw.upper()} clause without a pattern")
                pattern_spans.append(span)
            elif kw == "where":
                where_spans.append(span)
        for span in pattern_spans:
            _PatternParser(span, builder).parse()
        for span in where_spans:
            _fold_where(span, builder)
        return builder.graph(), True
    except _ParseFailure:
        return PatternGraph(), False
    except RecursionError:
        return PatternGraph(), False


# ---------------------------------------------------------------------------
# graph edit distance

def _node_sub_cost(n1: PatternNode, n2: PatternNode) -> float:
    return 0.0 if (n1.labels == n2.labels and n1.props == n2.props) else 1.0


def _edge_sub_cost(e1: PatternEdge, e2: PatternEdge, node_map: dict[int, int]) -> float:
    cost = 0.0 if (e1.rel_types == e2.rel_types and e1.props == e2.props) else 1.0
    if e1.directed != e2.directed:
        cost += 1.0
    elif e1.directed:
        if (node_map[e1.src], node_map[e1.dst]) != (e2.src, e2.dst):
            cost += 1.0
    return cost


def _edge_groups(g: PatternGraph) -> dict[tuple[int, int], list[int]]:
    groups: dict[tuple[int, int], list[int]] = {}
    for idx, e in enumerate(g.edges):
        key = (min(e.src, e.dst), max(e.src, e.dst))
        groups.setdefault(key, []).append(idx)
    return groups


def _pair_group_cost(
    g1: PatternGraph, g2: PatternGraph,
    idxs: list[int], jdxs: list[int], node_map: dict[int, int],
) -> tuple[float, list[tuple[str, int, int]]]:
    """Min-cost edge pairing within one endpoint group.

    Returns (cost, ops) where ops are (kind, i, j) with j = -1 for deletions
    and i = -1 for insertions. Substitution never exceeds delete+insert, so a
    maximum pairing is always optimal.
    """
    k, m = len(idxs), len(jdxs)
    if k == 0:
        return float(m), [("ins_edge", -1, j) for j in jdxs]
    if m == 0:
        return float(k), [("del_edge", i, -1) for i in idxs]
    best_cost = None
    best_ops: list[tuple[str, int, int]] = []
    if k <= m:
        for perm in itertools.permutations(jdxs, k):
            cost = float(m - k)
            ops = [("ins_edge", -1, j) for j in jdxs if j not in perm]
            for i, j in zip(idxs, perm):
                c = _edge_sub_cost(g1.edges[i], g2.edges[j], node_map)
                cost += c
                if c:
                    ops.append(("sub_edge", i, j))
            if best_cost is None or cost < best_cost:
                best_cost, best_ops = cost, ops
    else:
        for perm in itertools.permutations(idxs, m):
            cost = float(k - m)
            ops = [("del_edge", i, -1) for i in idxs if i not in perm]
            for i, j in zip(perm, jdxs):
                c = _edge_sub_cost(g1.edges[i], g2.edges[j], node_map)
                cost += c
                if c:
                    ops.append(("sub_edge", i, j))
            if best_cost is None or cost < best_cost:
                best_cost, best_ops = cost, ops
    return best_cost, best_ops


def evaluate_mapping(
    g1: PatternGraph, g2: PatternGraph, node_map: dict[int, int]
) -> tuple[float, list[EditOp]]:
    """Total edit cost and script of a specific (partial) node mapping."""
    script: list[EditOp] = []
    cost = 0.0
    image = set(node_map.values())
    for i in range(len(g1.nodes)):
        if i in node_map:
            c = _node_sub_cost(g1.nodes[i], g2.nodes[node_map[i]])
            if c:
                script.append(EditOp("sub_node", f"g1.n{i}~g2.n{node_map[i]}", c))
                cost += c
        else:
            script.append(EditOp("del_node", f"g1.n{i}", 1.0))
            cost += 1.0
    for j in range(len(g2.nodes)):
        if j not in image:
            script.append(EditOp("ins_node", f"g2.n{j}", 1.0))
            cost += 1.0

    groups1 = _edge_groups(g1)
    groups2 = _edge_groups(g2)
    consumed: set[tuple[int, int]] = set()
    for key in sorted(groups1):
        a, b = key
        idxs = groups1[key]
        if a in node_map and b in node_map:
            ta, tb = node_map[a], node_map[b]
            key2 = (min(ta, tb), max(ta, tb))
            jdxs = groups2.get(key2, [])
            c, ops = _pair_group_cost(g1, g2, idxs, jdxs, node_map)
            consumed.add(key2)
            cost += c
            for kind, i, j in ops:
                detail = {"ins_edge": f"g2.e{j}", "del_edge": f"g1.e{i}",
                          "sub_edge": f"g1.e{i}~g2.e{j}"}[kind]
                script.append(EditOp(kind, detail, 1.0 if kind != "sub_edge"
                                     else _edge_sub_cost(g1.edges[i], g2.edges[j], node_map)))
        else:
            for i in idxs:
                script.append(EditOp("del_edge", f"g1.e{i}", 1.0))
                cost += 1.0
    for key2 in sorted(groups2):
        if key2 not in consumed:
            for j in groups2[key2]:
                script.append(EditOp("ins_edge", f"g2.e{j}", 1.0))
                cost += 1.0
    return cost, script


def _approx_mapping(g1: PatternGraph, g2: PatternGraph) -> dict[int, int]:
    """Bipartite node assignment by local cost (Riesen-Bunke style padding)."""
    n1, n2 = len(g1.nodes), len(g2.nodes)
    if n1 == 0 or n2 == 0:
        return {}
    deg1 = [0] * n1
    deg2 = [0] * n2
    for e in g1.edges:
        deg1[e.src] += 1
        deg1[e.dst] += 1
    for e in g2.edges:
        deg2[e.src] += 1
        deg2[e.dst] += 1
    big = 1e9
    size = n1 + n2
    cost = np.full((size, size), big)
    for i in range(n1):
        for j in range(n2):
            cost[i, j] = _node_sub_cost(g1.nodes[i], g2.nodes[j]) + 0.5 * abs(deg1[i] - deg2[j])
        cost[i, n2 + i] = 1.0 + 0.5 * deg1[i]
    for j in range(n2):
        cost[n1 + j, j] = 1.0 + 0.5 * deg2[j]
    cost[n1:, n2:] = 0.0
    rows, cols = linear_sum_assignment(cost)
    mapping: dict[int, int] = {}
    for r, c in zip(rows, cols):
        if r < n1 and c < n2:
            mapping[int(r)] = int(c)
    return mapping


class _ExactSearch:
    def __init__(self, g1: PatternGraph, g2: PatternGraph, upper: float, cap: int):
        self.g1 = g1
        self.g2 = g2
        self.n1 = len(g1.nodes)
        self.n2 = len(g2.nodes)
        self.groups1 = _edge_groups(g1)
        self.groups2 = _edge_groups(g2)
        self.total_g2_edges = len(g2.edges)
        self.best = upper
        self.best_map: Optional[dict[int, int]] = None
        self.cap = cap
        self.expansions = 0

    def run(self) -> Optional[dict[int, int]]:
        self._dfs(0, {}, set(), 0.0, set(), 0)
        return self.best_map

    def _pair_decision_cost(self, u, mapping, consumed):
        """Edge cost added once node u is decided, over pairs (u, w<=u)."""
        added = 0.0
        consumed_edges = 0
        newly: list[tuple[int, int]] = []
        for w in range(u + 1):
            key = (min(u, w), max(u, w))
            idxs = self.groups1.get(key, [])
            if u in mapping and w in mapping:
                tu, tw = mapping[u], mapping[w]
                key2 = (min(tu, tw), max(tu, tw))
                jdxs = self.groups2.get(key2, [])
                if idxs or jdxs:
                    c, _ops = _pair_group_cost(self.g1, self.g2, idxs, jdxs, mapping)
                    added += c
                    consumed.add(key2)
                    newly.append(key2)
                    consumed_edges += len(jdxs)
            else:
                added += float(len(idxs))
        return added, consumed_edges, newly

    def _dfs(self, u, mapping, used, acc, consumed, consumed_edges):
        if acc >= self.best:
            return
        if u == self.n1:
            completion = float(self.n2 - len(used))
            completion += float(self.total_g2_edges - consumed_edges)
            total = acc + completion
            if total < self.best:
                self.best = total
                self.best_map = dict(mapping)
            return
        choices: list[Optional[int]] = [v for v in range(self.n2) if v not in used]
        choices.append(None)
        for v in choices:
            self.expansions += 1
            if self.expansions > self.cap:
                raise _SearchBudgetExceeded()
            if v is None:
                node_cost = 1.0
            else:
                node_cost = _node_sub_cost(self.g1.nodes[u], self.g2.nodes[v])
                mapping[u] = v
                used.add(v)
            edge_cost, edges_taken, newly = self._pair_decision_cost(u, mapping, consumed)
            self._dfs(u + 1, mapping, used, acc + node_cost + edge_cost,
                      consumed, consumed_edges + edges_taken)
            for key2 in newly:
                consumed.discard(key2)
            if v is not None:
                del mapping[u]
                used.discard(v)


def ged(g1: PatternGraph, g2: PatternGraph, config: GedConfig | None = None) -> GedResult:
    """Graph edit distance with unit costs; exact for small graphs.

    Exact branch-and-bound runs when the combined node count fits
    config.exact_node_budget and the expansion cap is not exceeded; otherwise
    the bipartite-assignment mapping is evaluated, which upper-bounds the
    exact distance.
    """
    config = config or GedConfig()
    config.validate()
    approx_map = _approx_mapping(g1, g2)
    approx_cost, approx_script = evaluate_mapping(g1, g2, approx_map)

    if len(g1.nodes) + len(g2.nodes) > config.exact_node_budget:
        return GedResult(approx_cost, False, tuple(approx_script))

    search = _ExactSearch(g1, g2, approx_cost, config.max_expansions)
    try:
        best_map = search.run()
    except _SearchBudgetExceeded:
        return GedResult(approx_cost, False, tuple(approx_script))
    if best_map is None:
        # Search completed without beating the assignment bound: it is optimal.
        return GedResult(approx_cost, True, tuple(approx_script))
    cost, script = evaluate_mapping(g1, g2, best_map)
    return GedResult(cost, True, tuple(script))


def ged_reward(gold_query: str, pred_query: str, config: GedConfig | None = None) -> float:
    """Normalized topology reward: 1 - GED / max(size1, size2), clamped to [0, 1]."""
    gold_graph, gold_ok = extract_pattern_graph(gold_query)
    pred_graph, pred_ok = extract_pattern_graph(pred_query)
    return ged_reward_from_graphs(gold_graph, gold_ok, pred_graph, pred_ok, config)


def ged_reward_from_graphs(
    gold_graph: PatternGraph, gold_ok: bool,
    pred_graph: PatternGraph, pred_ok: bool,
    config: GedConfig | None = None,
) -> float:
    return ged_reward_detailed(gold_graph, gold_ok, pred_graph, pred_ok, config)[0]


def ged_reward_detailed(
    gold_graph: PatternGraph, gold_ok: bool,
    pred_graph: PatternGraph, pred_ok: bool,
    config: GedConfig | None = None,
) -> tuple[float, Optional[GedResult]]:
    """Reward plus the underlying GedResult when a distance was computed."""
    if not pred_ok or not gold_ok:
        return 0.0, None
    s1, s2 = gold_graph.size(), pred_graph.size()
    if s1 == 0 and s2 == 0:
        return 1.0, None
    if s2 == 0 or s1 == 0:
        return 0.0, None
    result = ged(gold_graph, pred_graph, config)
    reward = 1.0 - result.distance / max(s1, s2)
    return min(1.0, max(0.0, reward)), result
