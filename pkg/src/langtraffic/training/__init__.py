"""Loss computation, target extraction, and the optimization loop."""

from .gradcheck import max_gradient_error, miniature_config, random_batch, run_full_check
from .losses import BatchTargets, LossBreakdown, NonFiniteLossError, closest_mode_indices, compute_loss
from .loop import (
    Example,
    TrainConfig,
    TrainResult,
    TrainingDiverged,
    collate,
    lane_placement_accuracy,
    prepare_example,
    train,
)
from .targets import TrainingTargets, extract_targets, pair_agents

__all__ = [
    "max_gradient_error",
    "miniature_config",
    "random_batch",
    "run_full_check",
    "BatchTargets",
    "LossBreakdown",
    "NonFiniteLossError",
    "closest_mode_indices",
    "compute_loss",
    "Example",
    "TrainConfig",
    "TrainResult",
    "TrainingDiverged",
    "collate",
    "lane_placement_accuracy",
    "prepare_example",
    "train",
    "TrainingTargets",
    "extract_targets",
    "pair_agents",
]
