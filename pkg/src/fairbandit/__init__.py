"""Cooperative contextual bandits for individually fair binary classification."""

from .baseline import LrParameters, fit_logistic, predict_logistic
from .ccb import (
    CcbModel,
    RewardLog,
    TrainingConfig,
    compute_reward,
    kl_divergence,
    predict,
    train,
    train_step,
)
from .data import (
    Example,
    FeatureSchema,
    SchemaError,
    SplitDataset,
    encode,
    fit_encoding,
    load_rows,
    parse_schema,
    prepare_dataset,
    split,
)
from .metrics import (
    EvaluationReport,
    NeighborIndex,
    accuracy,
    consistency,
    discrimination,
    evaluate,
    gower_similarity,
    k_nearest,
)
from .policy import (
    NumericError,
    PolicyParameters,
    action_distribution,
    greedy_action,
    init_policy,
    log_prob_gradient,
    policy_gradient_step,
    sample_action,
)
from .selection import SubmodelReport, grid_search, select_checkpoint, submodel_report

__version__ = "0.1.0"

__all__ = [
    "CcbModel",
    "EvaluationReport",
    "Example",
    "FeatureSchema",
    "LrParameters",
    "NeighborIndex",
    "NumericError",
    "PolicyParameters",
    "RewardLog",
    "SchemaError",
    "SplitDataset",
    "SubmodelReport",
    "TrainingConfig",
    "accuracy",
    "action_distribution",
    "compute_reward",
    "consistency",
    "discrimination",
    "encode",
    "evaluate",
    "fit_encoding",
    "fit_logistic",
    "gower_similarity",
    "grid_search",
    "greedy_action",
    "init_policy",
    "k_nearest",
    "kl_divergence",
    "load_rows",
    "log_prob_gradient",
    "parse_schema",
    "policy_gradient_step",
    "predict",
    "predict_logistic",
    "prepare_dataset",
    "sample_action",
    "select_checkpoint",
    "split",
    "submodel_report",
    "train",
    "train_step",
]
