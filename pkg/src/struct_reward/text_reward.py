"""Continuous string-similarity reward based on the longest common substring."""
from __future__ import annotations

import re
from dataclasses import dataclass

_WS_RUN = re.compile(r"\s+")

# Combined SQL/Cypher keyword vocabulary, used only when lowercase_keywords is on.
_KEYWORDS = frozenset(
    """
    select from where group by having order limit offset join inner left right
    outer full cross on as and or not in exists is null like between union all
    intersect except distinct case when then else end asc desc with
    match optional merge create return unwind call yield set delete remove skip
    count sum avg min max
    """.split()
)

_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class StringRewardConfig:
    normalize_whitespace: bool = True
    lowercase_keywords: bool = False


def _normalize(text: str, cfg: StringRewardConfig) -> str:
    if cfg.normalize_whitespace:
        text = _WS_RUN.sub(" ", text).strip()
    if cfg.lowercase_keywords:
        text = _WORD.sub(
            lambda m: m.group(0).lower() if m.group(0).lower() in _KEYWORDS else m.group(0),
            text,
        )
    return text


def longest_common_substring_length(a: str, b: str) -> int:
    """Length of the longest contiguous substring shared by ``a`` and ``b``.

    Suffix automaton over ``a``, streamed with ``b``; O(|a| + |b|) time with
    all state local to the call.
    """
    if not a or not b:
        return 0

    # Suffix automaton of `a`: parallel arrays for link / length / transitions.
    trans: list[dict[str, int]] = [{}]
    link = [-1]
    length = [0]
    last = 0
    for ch in a:
        cur = len(trans)
        trans.append({})
        length.append(length[last] + 1)
        link.append(-1)
        p = last
        while p != -1 and ch not in trans[p]:
            trans[p][ch] = cur
            p = link[p]
        if p == -1:
            link[cur] = 0
        else:
            q = trans[p][ch]
            if length[p] + 1 == length[q]:
                link[cur] = q
            else:
                clone = len(trans)
                trans.append(dict(trans[q]))
                length.append(length[p] + 1)
                link.append(link[q])
                while p != -1 and trans[p].get(ch) == q:
                    trans[p][ch] = clone
                    p = link[p]
                link[q] = clone
                link[cur] = clone
        last = cur

    best = 0
    node = 0
    cur_len = 0
    for ch in b:
        while node != 0 and ch not in trans[node]:
            node = link[node]
            cur_len = length[node]
        if ch in trans[node]:
            node = trans[node][ch]
            cur_len += 1
        if cur_len > best:
            best = cur_len
    return best


def string_reward(gold: str, pred: str, cfg: StringRewardConfig | None = None) -> float:
    """Reward in [0, 1]: longest common substring length over the longer string."""
    cfg = cfg or StringRewardConfig()
    g = _normalize(gold, cfg)
    p = _normalize(pred, cfg)
    if not g and not p:
        return 1.0
    if not g or not p:
        return 0.0
    return longest_common_substring_length(g, p) / max(len(g), len(p))
