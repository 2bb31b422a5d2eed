"""Per-candidate reward assembly: judge + string + structural, weighted sum."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import corpus, cypher_graph, sql_components, text_reward
from .cypher_graph import GedConfig
from .judge import JudgeTransportError, JudgeVerdict
from .text_reward import StringRewardConfig

COMPONENT_F1 = "component_f1"
GED = "ged"

_DIALECT_WORD = {"sql": "SQL", "cypher": "Cypher"}


@dataclass(frozen=True)
class RewardConfig:
    w_judge: float = 1.0
    w_string: float = 1.0
    w_structural: float = 1.0
    judge_enabled: bool = False
    ged: GedConfig = field(default_factory=GedConfig)
    string: StringRewardConfig = field(default_factory=StringRewardConfig)

    def validate(self) -> None:
        weights = (self.w_judge, self.w_string, self.w_structural)
        if any(w < 0 for w in weights):
            raise ValueError("reward weights must be >= 0")
        if not any(w > 0 for w in weights):
            raise ValueError("at least one reward weight must be > 0")
        self.ged.validate()


@dataclass(frozen=True)
class RewardBreakdown:
    judge: Optional[float]
    string: float
    structural: float
    total: float
    structural_kind: str  # component_f1 | ged
    diagnostics: dict


def _structural_sql(gold: str, query: str) -> tuple[float, dict]:
    gold_set, gold_ok = sql_components.decompose_sql(gold)
    pred_set, pred_ok = sql_components.decompose_sql(query)
    diag = {"parse_ok": pred_ok, "gold_parse_ok": gold_ok}
    if not gold_ok or not pred_ok:
        return 0.0, diag
    return sql_components.component_f1(gold_set, pred_set), diag


def _structural_cypher(gold: str, query: str, cfg: GedConfig) -> tuple[float, dict]:
    gold_graph, gold_ok = cypher_graph.extract_pattern_graph(gold)
    pred_graph, pred_ok = cypher_graph.extract_pattern_graph(query)
    reward, result = cypher_graph.ged_reward_detailed(
        gold_graph, gold_ok, pred_graph, pred_ok, cfg)
    diag = {
        "parse_ok": pred_ok,
        "gold_parse_ok": gold_ok,
        "ignored_where_conditions": pred_graph.ignored_conditions,
    }
    if result is not None:
        diag["ged_exact"] = result.exact
        diag["ged_distance"] = result.distance
    return reward, diag


def score_candidate(
    sample: corpus.QuerySample,
    candidate_index: int,
    cfg: RewardConfig,
    judge_verdict: Optional[JudgeVerdict] = None,
) -> RewardBreakdown:
    """Score one candidate; degenerate inputs floor to 0 with diagnostics."""
    if not 0 <= candidate_index < len(sample.candidates):
        raise IndexError(f"candidate_index {candidate_index} out of range")
    structural_kind = COMPONENT_F1 if sample.dialect == "sql" else GED
    extraction = corpus.extract_answer(sample.candidates[candidate_index], sample.dialect)
    diagnostics: dict = {
        "extraction_note": extraction.extraction_note,
        "had_think_block": extraction.had_think_block,
    }

    if extraction.query is None:
        string_score = 0.0
        structural = 0.0
        diagnostics["parse_ok"] = False
    else:
        string_score = text_reward.string_reward(sample.gold_query, extraction.query, cfg.string)
        if sample.dialect == "sql":
            structural, diag = _structural_sql(sample.gold_query, extraction.query)
        else:
            structural, diag = _structural_cypher(sample.gold_query, extraction.query, cfg.ged)
        diagnostics.update(diag)

    if judge_verdict is not None:
        judge_score: Optional[float] = judge_verdict.score
        diagnostics["judge_status"] = "scored"
        diagnostics["judge_class"] = judge_verdict.class_label
        diagnostics["judge_cached"] = judge_verdict.cached
        if not judge_verdict.parsed:
            diagnostics["judge_parse_failed"] = True
    elif cfg.judge_enabled:
        judge_score = 0.0
        diagnostics.setdefault("judge_status", "unscored")
    else:
        judge_score = None
        diagnostics["judge_status"] = "disabled"

    total = (cfg.w_judge * (judge_score or 0.0)
             + cfg.w_string * string_score
             + cfg.w_structural * structural)
    return RewardBreakdown(
        judge=judge_score,
        string=string_score,
        structural=structural,
        total=total,
        structural_kind=structural_kind,
        diagnostics=diagnostics,
    )


def score_sample(
    sample: corpus.QuerySample,
    cfg: RewardConfig,
    judge=None,
    judge_fail_zero: bool = False,
) -> list[RewardBreakdown]:
    """Score every candidate of a sample, in order.

    When a judge is supplied, all extractable candidates are graded with a
    single batch call. Transport failures propagate unless judge_fail_zero is
    set, in which case the judge component floors to 0 with a diagnostic.
    """
    cfg.validate()
    extractions = [corpus.extract_answer(c, sample.dialect) for c in sample.candidates]
    verdicts: list[Optional[JudgeVerdict]] = [None] * len(sample.candidates)
    judge_failed = False
    if judge is not None:
        judged = [(i, e.query) for i, e in enumerate(extractions) if e.query is not None]
        if judged:
            word = _DIALECT_WORD[sample.dialect]
            try:
                graded = judge.grade(sample.gold_query, [q for _, q in judged],
                                     sample.schema_text, dialect_word=word)
            except JudgeTransportError:
                if not judge_fail_zero:
                    raise
                judge_failed = True
                graded = None
            if graded is not None:
                for (i, _q), verdict in zip(judged, graded):
                    verdicts[i] = verdict

    out = []
    for i in range(len(sample.candidates)):
        breakdown = score_candidate(sample, i, cfg, judge_verdict=verdicts[i])
        if judge is not None and verdicts[i] is None:
            # Judging was requested but this candidate got no verdict: the
            # judge component floors to 0 instead of being absent.
            breakdown.diagnostics["judge_status"] = (
                "failed" if judge_failed else "skipped_no_query")
            breakdown = RewardBreakdown(
                judge=0.0,
                string=breakdown.string,
                structural=breakdown.structural,
                total=(cfg.w_string * breakdown.string
                       + cfg.w_structural * breakdown.structural),
                structural_kind=breakdown.structural_kind,
                diagnostics=breakdown.diagnostics,
            )
        out.append(breakdown)
    return out
