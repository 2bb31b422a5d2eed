"""struct-reward: reward and evaluation engine for text-to-SQL / text-to-Cypher RL."""

from .corpus import ExtractedAnswer, QuerySample, extract_answer, load_dataset
from .cypher_graph import (
    GedConfig,
    GedResult,
    PatternEdge,
    PatternGraph,
    PatternNode,
    extract_pattern_graph,
    ged,
    ged_reward,
)
from .grpo import GrpoConfig, PolicyGroup, group_advantages, grpo_objective
from .judge import JudgeClient, JudgeConfig, JudgeVerdict, MockJudge
from .metrics import ExecOracle, ExecResult, bleu, exact_match, execution_compare, run_oracle
from .rewards import RewardBreakdown, RewardConfig, score_candidate, score_sample
from .sql_components import ComponentSet, component_f1, decompose_sql
from .text_reward import StringRewardConfig, string_reward

__all__ = [
    "ComponentSet",
    "ExecOracle",
    "ExecResult",
    "ExtractedAnswer",
    "GedConfig",
    "GedResult",
    "GrpoConfig",
    "JudgeClient",
    "JudgeConfig",
    "JudgeVerdict",
    "MockJudge",
    "PatternEdge",
    "PatternGraph",
    "PatternNode",
    "PolicyGroup",
    "QuerySample",
    "RewardBreakdown",
    "RewardConfig",
    "StringRewardConfig",
    "bleu",
    "component_f1",
    "decompose_sql",
    "exact_match",
    "execution_compare",
    "extract_answer",
    "extract_pattern_graph",
    "ged",
    "ged_reward",
    "group_advantages",
    "grpo_objective",
    "load_dataset",
    "run_oracle",
    "score_candidate",
    "score_sample",
    "string_reward",
]

__version__ = "0.1.0"
