"""Multi-objective preference alignment harness.

A single multi-head classification reward model scores responses per
preference dimension; a mask-and-standardize mapping turns those
classifications into one scalar reward; and a prompt-prefix-conditioned
policy is optimized against it with PPO, RLOO or Online-DPO. Weighted-sum
and parameter-merging baselines are included for comparison.
"""

from ._core import (
    HeadDistribution,
    HeadStatistics,
    LabeledSample,
    MoslimError,
    Policy,
    PromptSample,
    RewardModel,
    RlDataset,
    RmDataset,
    TaggedPrompt,
    Trajectory,
    Vocabulary,
    build_rl_dataset,
    build_rm_dataset,
    calibrate_stats,
    intensity_sweep,
    kl_to_ref,
    load_rl_dataset,
    load_rm_dataset,
    map_raw_to_intensity,
    map_reward,
    merge_policies,
    oracle_score,
    pairing_eval,
    parse_prefix,
    rloo_advantages,
    sample_base_response,
    scheme_levels,
    serialize_prefix,
    spearman,
    strip_tags,
    train_policy,
    train_rm,
)

__version__ = "0.1.0"

__all__ = [
    "HeadDistribution",
    "HeadStatistics",
    "LabeledSample",
    "MoslimError",
    "Policy",
    "PromptSample",
    "RewardModel",
    "RlDataset",
    "RmDataset",
    "TaggedPrompt",
    "Trajectory",
    "Vocabulary",
    "build_rl_dataset",
    "build_rm_dataset",
    "calibrate_stats",
    "intensity_sweep",
    "kl_to_ref",
    "load_rl_dataset",
    "load_rm_dataset",
    "map_raw_to_intensity",
    "map_reward",
    "merge_policies",
    "oracle_score",
    "pairing_eval",
    "parse_prefix",
    "rloo_advantages",
    "sample_base_response",
    "scheme_levels",
    "serialize_prefix",
    "spearman",
    "strip_tags",
    "train_policy",
    "train_rm",
]
