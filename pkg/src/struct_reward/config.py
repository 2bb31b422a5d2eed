"""Run configuration: a strict JSON schema shared by the CLI, service and clients.

A config file must carry the five top-level keys (reward, judge, grpo,
workers, seed); inner keys default. ``exec`` is an optional sixth section
wiring the external execution oracle for evaluation. Loading then serializing
is lossless.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .cypher_graph import GedConfig
from .grpo import GrpoConfig
from .judge import JudgeConfig
from .rewards import RewardConfig
from .text_reward import StringRewardConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExecConfig:
    """Execution-oracle wiring for `eval --exe`: command plus db-path lookup."""

    command_template: str
    timeout_secs: int = 30
    db_map: dict = field(default_factory=dict)

    def validate(self) -> None:
        if "{db}" not in self.command_template or "{query_file}" not in self.command_template:
            raise ConfigError("exec.command_template must contain {db} and {query_file}")
        if self.timeout_secs <= 0:
            raise ConfigError("exec.timeout_secs must be positive")
        if not isinstance(self.db_map, dict):
            raise ConfigError("exec.db_map must be an object")


@dataclass(frozen=True)
class RunConfig:
    reward: RewardConfig = field(default_factory=RewardConfig)
    judge: Optional[JudgeConfig] = None
    grpo: GrpoConfig = field(default_factory=GrpoConfig)
    workers: int = 1
    seed: int = 0
    exec: Optional[ExecConfig] = None


_TOP_KEYS = ("reward", "judge", "grpo", "workers", "seed")
_SECTION_FIELDS = {
    "reward": ("w_judge", "w_string", "w_structural", "judge_enabled", "ged", "string"),
    "ged": ("exact_node_budget", "max_expansions"),
    "string": ("normalize_whitespace", "lowercase_keywords"),
    "judge": ("endpoint_url", "model_name", "dialect_word", "max_parallel", "cache_dir",
              "class_scores", "timeout_secs", "max_retries", "retry_backoff_secs"),
    "grpo": ("epsilon", "beta", "std_floor"),
    "exec": ("command_template", "timeout_secs", "db_map"),
}


def _check_keys(section: str, data: dict, allowed) -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"config section {section!r} must be an object")
    for key in data:
        if key not in allowed:
            raise ConfigError(f"unknown config key: {section}.{key}" if section else
                              f"unknown config key: {key}")


def _build(section: str, data: dict, cls, **overrides):
    _check_keys(section, data, _SECTION_FIELDS[section])
    try:
        obj = cls(**{**data, **overrides})
        if hasattr(obj, "validate"):
            obj.validate()
        return obj
    except TypeError as exc:
        raise ConfigError(f"invalid config section {section!r}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"invalid config value in {section!r}: {exc}") from exc


def run_config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    _check_keys("", data, _TOP_KEYS + ("exec",))
    for key in _TOP_KEYS:
        if key not in data:
            raise ConfigError(f"missing config key: {key}")

    reward_data = dict(data["reward"]) if isinstance(data["reward"], dict) else data["reward"]
    if not isinstance(reward_data, dict):
        raise ConfigError("config section 'reward' must be an object")
    ged = _build("ged", reward_data.pop("ged", {}), GedConfig)
    string = _build("string", reward_data.pop("string", {}), StringRewardConfig)
    reward = _build("reward", reward_data, RewardConfig, ged=ged, string=string)

    judge = None
    if data["judge"] is not None:
        judge = _build("judge", data["judge"], JudgeConfig)

    grpo = _build("grpo", data["grpo"], GrpoConfig)

    workers = data["workers"]
    if not isinstance(workers, int) or isinstance(workers, bool) or workers < 1:
        raise ConfigError("workers must be a positive integer")
    seed = data["seed"]
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed must be an integer")

    exec_cfg = None
    if data.get("exec") is not None:
        exec_cfg = _build("exec", data["exec"], ExecConfig)

    return RunConfig(reward=reward, judge=judge, grpo=grpo,
                     workers=workers, seed=seed, exec=exec_cfg)


def run_config_to_dict(cfg: RunConfig) -> dict:
    out = {
        "reward": {
            "w_judge": cfg.reward.w_judge,
            "w_string": cfg.reward.w_string,
            "w_structural": cfg.reward.w_structural,
            "judge_enabled": cfg.reward.judge_enabled,
            "ged": {
                "exact_node_budget": cfg.reward.ged.exact_node_budget,
                "max_expansions": cfg.reward.ged.max_expansions,
            },
            "string": {
                "normalize_whitespace": cfg.reward.string.normalize_whitespace,
                "lowercase_keywords": cfg.reward.string.lowercase_keywords,
            },
        },
        "judge": None,
        "grpo": {
            "epsilon": cfg.grpo.epsilon,
            "beta": cfg.grpo.beta,
            "std_floor": cfg.grpo.std_floor,
        },
        "workers": cfg.workers,
        "seed": cfg.seed,
    }
    if cfg.judge is not None:
        out["judge"] = {
            "endpoint_url": cfg.judge.endpoint_url,
            "model_name": cfg.judge.model_name,
            "dialect_word": cfg.judge.dialect_word,
            "max_parallel": cfg.judge.max_parallel,
            "cache_dir": cfg.judge.cache_dir,
            "class_scores": dict(cfg.judge.class_scores),
            "timeout_secs": cfg.judge.timeout_secs,
            "max_retries": cfg.judge.max_retries,
            "retry_backoff_secs": cfg.judge.retry_backoff_secs,
        }
    if cfg.exec is not None:
        out["exec"] = {
            "command_template": cfg.exec.command_template,
            "timeout_secs": cfg.exec.timeout_secs,
            "db_map": dict(cfg.exec.db_map),
        }
    return out


def load_run_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid config JSON: {exc.msg} (line {exc.lineno})") from exc
    return run_config_from_dict(data)


def save_run_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(
        json.dumps(run_config_to_dict(cfg), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8")
