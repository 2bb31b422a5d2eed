"""Batch pipelines behind the service endpoints: scoring, advantages, eval.

All report serialization happens here so that CLI output is byte-stable: one
JSON object per line, fixed key order, trailing summary record.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

from . import corpus, cypher_graph, grpo, metrics, rewards, sql_components
from .config import ConfigError, RunConfig
from .corpus import DatasetError
from .judge import JudgeClient, JudgeConfig, MockJudge

JUDGE_MODES = ("off", "mock", "live")


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False)


def _mean(values) -> Optional[float]:
    values = list(values)
    if not values:
        return None
    return math.fsum(values) / len(values)


def make_judge(run_cfg: RunConfig, judge_mode: str):
    if judge_mode not in JUDGE_MODES:
        raise ConfigError(f"judge mode must be one of {', '.join(JUDGE_MODES)}")
    if judge_mode == "off":
        return None
    judge_cfg = run_cfg.judge if run_cfg.judge is not None else JudgeConfig()
    if judge_mode == "mock":
        return MockJudge(judge_cfg)
    if run_cfg.judge is None:
        raise ConfigError("judge mode 'live' requires the 'judge' config section")
    return JudgeClient(judge_cfg)


def _graph_dict(graph: cypher_graph.PatternGraph) -> dict:
    return {
        "nodes": [
            {"labels": sorted(n.labels), "props": {k: n.props[k] for k in sorted(n.props)},
             "anon": n.anon}
            for n in graph.nodes
        ],
        "edges": [
            {"src": e.src, "dst": e.dst, "types": sorted(e.rel_types),
             "directed": e.directed,
             "props": {k: e.props[k] for k in sorted(e.props)}}
            for e in graph.edges
        ],
    }


def _explain_payload(sample: corpus.QuerySample, candidate: str, cfg: rewards.RewardConfig) -> dict:
    extraction = corpus.extract_answer(candidate, sample.dialect)
    query = extraction.query if extraction.query is not None else ""
    if sample.dialect == "sql":
        gold_set, _ = sql_components.decompose_sql(sample.gold_query)
        pred_set, _ = sql_components.decompose_sql(query)
        return {
            "gold_components": [list(item) for item in gold_set],
            "pred_components": [list(item) for item in pred_set],
        }
    gold_graph, _ = cypher_graph.extract_pattern_graph(sample.gold_query)
    pred_graph, _ = cypher_graph.extract_pattern_graph(query)
    return {
        "gold_graph": _graph_dict(gold_graph),
        "pred_graph": _graph_dict(pred_graph),
    }


def _breakdown_record(sample_id: str, index: int, b: rewards.RewardBreakdown,
                      explain: Optional[dict]) -> dict:
    record = {
        "id": sample_id,
        "candidate_index": index,
        "judge": b.judge,
        "string": b.string,
        "structural": b.structural,
        "total": b.total,
        "structural_kind": b.structural_kind,
        "diagnostics": {k: b.diagnostics[k] for k in sorted(b.diagnostics)},
    }
    if explain is not None:
        record["explain"] = explain
    return record


def score_dataset(
    dataset_text: str,
    run_cfg: RunConfig,
    judge_mode: str = "off",
    judge_fail_zero: bool = False,
    explain: bool = False,
    expected_dialect: Optional[str] = None,
) -> tuple[list[dict], dict, str]:
    """Score every candidate of every sample; returns (records, summary, report text)."""
    samples = corpus.parse_dataset_lines(dataset_text.splitlines(), expected_dialect)
    judge = make_judge(run_cfg, judge_mode)
    reward_cfg = run_cfg.reward

    def one(sample: corpus.QuerySample) -> list[dict]:
        breakdowns = rewards.score_sample(sample, reward_cfg, judge=judge,
                                          judge_fail_zero=judge_fail_zero)
        records = []
        for i, b in enumerate(breakdowns):
            payload = _explain_payload(sample, sample.candidates[i], reward_cfg) \
                if explain else None
            records.append(_breakdown_record(sample.id, i, b, payload))
        return records

    try:
        if run_cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=run_cfg.workers) as pool:
                grouped = list(pool.map(one, samples))
        else:
            grouped = [one(s) for s in samples]
    finally:
        if judge is not None:
            judge.close()

    records = [r for group in grouped for r in group]
    judge_scores = [r["judge"] for r in records if r["judge"] is not None]
    summary = {
        "samples": len(samples),
        "candidates": len(records),
        "mean_judge": _mean(judge_scores),
        "mean_string": _mean(r["string"] for r in records),
        "mean_structural": _mean(r["structural"] for r in records),
        "mean_total": _mean(r["total"] for r in records),
    }
    lines = [_dumps(r) for r in records] + [_dumps({"summary": summary})]
    return records, summary, "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------------------
# advantages

def _groups_from_score_lines(lines) -> list[dict]:
    """Group candidate report records by sample id, checking completeness."""
    order: list[str] = []
    by_id: dict[str, dict[int, float]] = {}
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"invalid JSON: {exc.msg}", line_no) from exc
        if "summary" in record:
            continue
        if "rewards" in record:
            group = {"id": record.get("id", f"group{line_no}"),
                     "rewards": record["rewards"]}
            for key in ("logp_current", "logp_old", "logp_ref"):
                if key in record and record[key] is not None:
                    group[key] = record[key]
            order.append(group["id"])
            by_id[group["id"]] = group
            continue
        if "id" not in record or "candidate_index" not in record or "total" not in record:
            raise DatasetError(
                "record needs either 'rewards' or id/candidate_index/total", line_no)
        sid = record["id"]
        if sid not in by_id:
            order.append(sid)
            by_id[sid] = {}
        by_id[sid][record["candidate_index"]] = record["total"]

    groups = []
    for sid in order:
        entry = by_id[sid]
        if isinstance(entry, dict) and "rewards" in entry:
            groups.append(entry)
            continue
        indices = sorted(entry)
        if indices != list(range(len(indices))):
            raise DatasetError(f"ragged candidate group for sample id {sid!r}")
        groups.append({"id": sid, "rewards": [entry[i] for i in indices]})
    return groups


def advantages_for_groups(groups: list[dict], run_cfg: RunConfig) -> list[dict]:
    out = []
    for group in groups:
        gid = group.get("id", "")
        rewards_list = group.get("rewards")
        if not isinstance(rewards_list, list) or not rewards_list:
            raise DatasetError(f"group {gid!r}: rewards must be a non-empty array")
        try:
            adv = grpo.group_advantages(rewards_list, run_cfg.grpo)
        except ValueError as exc:
            raise DatasetError(f"group {gid!r}: {exc}") from exc
        record = {"id": gid, "rewards": rewards_list, "advantages": adv}
        if group.get("logp_current") is not None and group.get("logp_old") is not None:
            try:
                pg = grpo.PolicyGroup(
                    rewards=rewards_list,
                    logp_current=group["logp_current"],
                    logp_old=group["logp_old"],
                    logp_ref=group.get("logp_ref"),
                )
                objective, per_sample, kl = grpo.grpo_objective(pg, run_cfg.grpo)
            except ValueError as exc:
                raise DatasetError(f"group {gid!r}: {exc}") from exc
            record["objective"] = objective
            record["per_sample"] = per_sample
            record["kl"] = kl
        out.append(record)
    return out


def advantages_report(records: list[dict]) -> str:
    return "".join(_dumps(r) + "\n" for r in records)


def advantages_from_text(scores_text: str, run_cfg: RunConfig) -> tuple[list[dict], str]:
    groups = _groups_from_score_lines(scores_text.splitlines())
    records = advantages_for_groups(groups, run_cfg)
    return records, advantages_report(records)


# ---------------------------------------------------------------------------
# evaluation

def _parse_predictions(lines) -> dict[str, str]:
    preds: dict[str, str] = {}
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"invalid JSON: {exc.msg}", line_no) from exc
        if not isinstance(record, dict) or "id" not in record or "query" not in record:
            raise DatasetError("prediction record needs 'id' and 'query'", line_no)
        preds[record["id"]] = record["query"]
    return preds


def evaluate_predictions(
    dataset_text: str,
    predictions_text: str,
    run_cfg: RunConfig,
    exe: bool = False,
) -> tuple[list[dict], dict, str]:
    samples = corpus.parse_dataset_lines(dataset_text.splitlines())
    preds = _parse_predictions(predictions_text.splitlines())

    sample_ids = {s.id for s in samples}
    missing = [s.id for s in samples if s.id not in preds]
    unknown = [pid for pid in preds if pid not in sample_ids]
    if missing or unknown:
        parts = []
        if missing:
            parts.append("missing predictions for ids: " + ", ".join(missing))
        if unknown:
            parts.append("predictions for unknown ids: " + ", ".join(unknown))
        raise DatasetError("; ".join(parts))

    oracle = None
    if exe:
        if run_cfg.exec is None:
            raise ConfigError("--exe requires the 'exec' config section")
        oracle = metrics.ExecOracle(
            command_template=run_cfg.exec.command_template,
            timeout_secs=run_cfg.exec.timeout_secs,
        )

    records = []
    for sample in samples:
        pred = preds[sample.id]
        record = {
            "id": sample.id,
            "exact_match": metrics.exact_match(sample.gold_query, pred),
            "bleu": metrics.bleu(sample.gold_query, pred),
        }
        if oracle is not None:
            db_map = run_cfg.exec.db_map
            db_key = str(sample.extras.get("db_id", "")) or sample.id
            db_path = db_map.get(db_key) or db_map.get(sample.id) or db_map.get("default")
            if db_path is None:
                record["exe_evaluable"] = False
                record["exe_match"] = None
                record["exe_f1"] = None
            else:
                gold_exec = metrics.run_oracle(oracle, db_path, sample.gold_query)
                if gold_exec.status != "ok":
                    record["exe_evaluable"] = False
                    record["exe_match"] = None
                    record["exe_f1"] = None
                else:
                    pred_exec = metrics.run_oracle(oracle, db_path, pred)
                    exe_match, f1 = metrics.execution_compare(gold_exec, pred_exec)
                    record["exe_evaluable"] = True
                    record["exe_match"] = exe_match
                    record["exe_f1"] = f1
        records.append(record)

    summary = {
        "samples": len(records),
        "exact_match_pct": 100.0 * sum(r["exact_match"] for r in records) / len(records)
        if records else None,
        "mean_bleu": _mean(r["bleu"] for r in records),
    }
    if exe:
        evaluable = [r for r in records if r.get("exe_evaluable")]
        summary["evaluable"] = len(evaluable)
        summary["exe_pct"] = (100.0 * sum(r["exe_match"] for r in evaluable) / len(evaluable)
                              if evaluable else None)
        summary["mean_exe_f1"] = _mean(r["exe_f1"] for r in evaluable)
    lines = [_dumps(r) for r in records] + [_dumps({"summary": summary})]
    return records, summary, "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------------------
# ged debugging

def _format_graph(graph: cypher_graph.PatternGraph) -> list[str]:
    lines = [f"  nodes={len(graph.nodes)} edges={len(graph.edges)} size={graph.size()}"]
    for i, n in enumerate(graph.nodes):
        labels = ",".join(sorted(n.labels))
        props = ", ".join(f"{k}={n.props[k]}" for k in sorted(n.props))
        anon = " anon" if n.anon else ""
        lines.append(f"  n{i}: labels={{{labels}}} props={{{props}}}{anon}")
    for i, e in enumerate(graph.edges):
        arrow = "->" if e.directed else "--"
        types = ",".join(sorted(e.rel_types))
        props = ", ".join(f"{k}={e.props[k]}" for k in sorted(e.props))
        lines.append(f"  e{i}: n{e.src} {arrow} n{e.dst} types={{{types}}} props={{{props}}}")
    return lines


def ged_debug(gold: str, pred: str, run_cfg: RunConfig) -> dict:
    cfg = run_cfg.reward.ged
    gold_graph, gold_ok = cypher_graph.extract_pattern_graph(gold)
    pred_graph, pred_ok = cypher_graph.extract_pattern_graph(pred)
    reward, result = cypher_graph.ged_reward_detailed(
        gold_graph, gold_ok, pred_graph, pred_ok, cfg)

    lines = ["gold graph:"]
    lines += _format_graph(gold_graph)
    lines.append("pred graph:")
    lines += _format_graph(pred_graph)
    lines.append(f"parse: gold={'ok' if gold_ok else 'failed'} "
                 f"pred={'ok' if pred_ok else 'failed'}")
    if result is not None:
        lines.append(f"path: {'exact' if result.exact else 'approximate'}")
        lines.append(f"distance: {result.distance:g}")
        lines.append("edit script:")
        if result.edit_script:
            for op in result.edit_script:
                lines.append(f"  {op.op} {op.detail} cost {op.cost:g}")
        else:
            lines.append("  (empty)")
    else:
        lines.append("path: none")
        lines.append("distance: n/a")
        lines.append("edit script:")
        lines.append("  (empty)")
    lines.append(f"reward: {reward:.6f}")
    report = "".join(line + "\n" for line in lines)

    return {
        "gold_graph": _graph_dict(gold_graph),
        "pred_graph": _graph_dict(pred_graph),
        "gold_parse_ok": gold_ok,
        "pred_parse_ok": pred_ok,
        "distance": None if result is None else result.distance,
        "exact": None if result is None else result.exact,
        "edit_script": [] if result is None else
        [{"op": op.op, "detail": op.detail, "cost": op.cost} for op in result.edit_script],
        "reward": reward,
        "report": report,
    }


# ---------------------------------------------------------------------------
# validation

def validate_dataset_text(dataset_text: str, expected_dialect: Optional[str] = None) -> dict:
    violations: list[dict] = []
    counts = {"records": 0, "sql": 0, "cypher": 0}
    for line_no, line in enumerate(dataset_text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            violations.append({"line": line_no, "message": f"invalid JSON: {exc.msg}"})
            continue
        try:
            sample = corpus.sample_from_record(record)
        except DatasetError as exc:
            violations.append({"line": line_no, "message": str(exc).split(": ", 1)[-1]})
            continue
        counts["records"] += 1
        counts[sample.dialect] += 1
        if expected_dialect is not None and sample.dialect != expected_dialect:
            violations.append({
                "line": line_no,
                "message": f"dialect mismatch: expected {expected_dialect}, "
                           f"got {sample.dialect} (id {sample.id})",
            })
    return {"ok": not violations, "counts": counts, "violations": violations}
