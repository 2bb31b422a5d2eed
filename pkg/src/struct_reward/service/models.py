"""Pydantic request/response envelopes for the HTTP service.

Config payloads are plain objects here; they are validated by the core config
module so diagnostics match the CLI exactly.
"""
from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class ScoreRequest(BaseModel):
    dataset_text: str
    config: Optional[dict] = None
    judge_mode: str = "off"
    judge_fail_zero: bool = False
    explain: bool = False
    expected_dialect: Optional[str] = None


class ScoreResponse(BaseModel):
    records: list[dict]
    summary: dict
    report: str


class GroupIn(BaseModel):
    id: str = ""
    rewards: list[float]
    logp_current: Optional[list[float]] = None
    logp_old: Optional[list[float]] = None
    logp_ref: Optional[list[float]] = None


class AdvantagesRequest(BaseModel):
    scores_text: Optional[str] = None
    groups: Optional[list[GroupIn]] = None
    config: Optional[dict] = None


class AdvantagesResponse(BaseModel):
    groups: list[dict]
    report: str


class EvalRequest(BaseModel):
    dataset_text: str
    predictions_text: str
    config: Optional[dict] = None
    exe: bool = False


class EvalResponse(BaseModel):
    records: list[dict]
    summary: dict
    report: str


class GedRequest(BaseModel):
    gold: str
    pred: str
    config: Optional[dict] = None


class GedResponse(BaseModel):
    gold_graph: dict
    pred_graph: dict
    gold_parse_ok: bool
    pred_parse_ok: bool
    distance: Optional[float] = None
    exact: Optional[bool] = None
    edit_script: list[dict] = Field(default_factory=list)
    reward: float
    report: str


class ValidateRequest(BaseModel):
    dataset_text: str
    expected_dialect: Optional[str] = None


class ValidateResponse(BaseModel):
    ok: bool
    counts: dict
    violations: list[dict]


class ConfigValidateRequest(BaseModel):
    config: Any = None


class ConfigValidateResponse(BaseModel):
    ok: bool
    config: dict
