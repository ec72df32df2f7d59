"""Actor-critic training: losses over recorded trajectories and the
batched rollout loop with schedule decay on optimizer steps."""

from rewriteopt.train.losses import (
    LossBreakdown,
    advantages,
    loss_breakdown,
    region_loss,
    region_policy,
    rule_loss,
)
from rewriteopt.train.loop import (
    Dataset,
    EpochMetrics,
    NonFiniteLossError,
    TrainConfig,
    TrainReport,
    batch_loss_closure,
    batch_update,
    p_continue_for_step,
    serialize_trajectory,
    train,
)

__all__ = [
    "Dataset",
    "EpochMetrics",
    "LossBreakdown",
    "NonFiniteLossError",
    "TrainConfig",
    "TrainReport",
    "advantages",
    "batch_loss_closure",
    "batch_update",
    "loss_breakdown",
    "p_continue_for_step",
    "region_loss",
    "region_policy",
    "rule_loss",
    "serialize_trajectory",
    "train",
]
