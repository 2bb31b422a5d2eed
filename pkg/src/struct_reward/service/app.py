"""HTTP service exposing scoring, advantages, evaluation and debugging."""
from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException

from .. import pipeline
from ..config import ConfigError, RunConfig, run_config_from_dict, run_config_to_dict
from ..corpus import DatasetError
from ..judge import JudgeTransportError
from . import models


def _resolve_config(payload: Optional[dict], default: RunConfig) -> RunConfig:
    if payload is None:
        return default
    return run_config_from_dict(payload)


def create_app(default_config: Optional[RunConfig] = None) -> FastAPI:
    default = default_config or RunConfig()
    app = FastAPI(title="struct-reward", version="0.1.0")

    @app.exception_handler(ConfigError)
    async def _config_error(_request, exc):
        raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/v1/score", response_model=models.ScoreResponse)
    def score(req: models.ScoreRequest):
        try:
            cfg = _resolve_config(req.config, default)
            records, summary, report = pipeline.score_dataset(
                req.dataset_text, cfg,
                judge_mode=req.judge_mode,
                judge_fail_zero=req.judge_fail_zero,
                explain=req.explain,
                expected_dialect=req.expected_dialect,
            )
        except (ConfigError, DatasetError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except JudgeTransportError as exc:
            raise HTTPException(status_code=502, detail=str(exc))
        return models.ScoreResponse(records=records, summary=summary, report=report)

    @app.post("/v1/advantages", response_model=models.AdvantagesResponse)
    def advantages(req: models.AdvantagesRequest):
        try:
            cfg = _resolve_config(req.config, default)
            if req.groups is not None:
                groups_in = [g.model_dump(exclude_none=True) for g in req.groups]
                records = pipeline.advantages_for_groups(groups_in, cfg)
                report = pipeline.advantages_report(records)
            elif req.scores_text is not None:
                records, report = pipeline.advantages_from_text(req.scores_text, cfg)
            else:
                raise HTTPException(status_code=400,
                                    detail="request needs scores_text or groups")
            return models.AdvantagesResponse(groups=records, report=report)
        except (ConfigError, DatasetError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.post("/v1/eval", response_model=models.EvalResponse)
    def evaluate(req: models.EvalRequest):
        try:
            cfg = _resolve_config(req.config, default)
            records, summary, report = pipeline.evaluate_predictions(
                req.dataset_text, req.predictions_text, cfg, exe=req.exe)
        except (ConfigError, DatasetError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except RuntimeError as exc:
            raise HTTPException(status_code=502, detail=str(exc))
        return models.EvalResponse(records=records, summary=summary, report=report)

    @app.post("/v1/ged", response_model=models.GedResponse)
    def ged_endpoint(req: models.GedRequest):
        try:
            cfg = _resolve_config(req.config, default)
            payload = pipeline.ged_debug(req.gold, req.pred, cfg)
        except (ConfigError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return models.GedResponse(**payload)

    @app.post("/v1/validate", response_model=models.ValidateResponse)
    def validate(req: models.ValidateRequest):
        try:
            result = pipeline.validate_dataset_text(req.dataset_text, req.expected_dialect)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return models.ValidateResponse(**result)

    @app.post("/v1/config/validate", response_model=models.ConfigValidateResponse)
    def config_validate(req: models.ConfigValidateRequest):
        try:
            cfg = run_config_from_dict(req.config)
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return models.ConfigValidateResponse(ok=True, config=run_config_to_dict(cfg))

    return app
