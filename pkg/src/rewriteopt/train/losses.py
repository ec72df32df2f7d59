"""Actor-critic losses over recorded rewriting trajectories.

The region scorer doubles as the critic: its regression loss (mean squared
difference between discounted returns and recorded scores) and the
advantage-weighted rule-selector loss combine into a single objective,
``total = rule_loss + alpha * region_loss``.

These operations read the values recorded at rollout time. The training
loop recomputes the same quantities from current parameters when it needs
gradients (see :mod:`rewriteopt.train.loop`); the two agree exactly as long
as no optimizer step has run since the rollout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from rewriteopt.core.domain import Trajectory
from rewriteopt.core.episode import discounted_returns
from rewriteopt.nn.functional import softmax


def region_policy(q_values) -> np.ndarray:
    """Region-picking distribution: a softmax over the region scores."""
    q = np.asarray(q_values, dtype=np.float64)
    if q.size == 0:
        raise ValueError("region_policy needs at least one region")
    return softmax(q)


def advantages(traj: Trajectory, gamma: float) -> np.ndarray:
    """Per-step discounted return minus the score recorded at rollout time."""
    returns = np.asarray(discounted_returns(list(traj.rewards), gamma))
    scores = np.array([s.q_value for s in traj.steps], dtype=np.float64)
    return returns - scores


def region_loss(traj: Trajectory, gamma: float) -> float:
    """Critic regression: mean squared (return - score) over the episode."""
    if len(traj) == 0:
        return 0.0
    return float(np.mean(advantages(traj, gamma) ** 2))


def rule_loss(traj: Trajectory, gamma: float) -> float:
    """Advantage-weighted negative log-likelihood of the chosen rules.

    The advantage treats the recorded score as a constant baseline: this
    term never trains the critic, only the rule selector.
    """
    if len(traj) == 0:
        return 0.0
    logps = np.array([s.rule_logprob for s in traj.steps], dtype=np.float64)
    return float(-np.sum(advantages(traj, gamma) * logps))


@dataclass(frozen=True)
class LossBreakdown:
    """Batch losses; ``total == rule_loss + alpha * region_loss`` exactly."""

    region_loss: float
    rule_loss: float
    total: float
    mean_advantage: float
    episode_count: int


def loss_breakdown(
    trajectories: Sequence[Trajectory], gamma: float, alpha: float
) -> LossBreakdown:
    """Mean per-episode losses over a batch, from recorded rollout values."""
    if not trajectories:
        raise ValueError("need at least one trajectory")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    region_sum = 0.0
    rule_sum = 0.0
    adv_sum = 0.0
    n_steps = 0
    for traj in trajectories:
        region_sum += region_loss(traj, gamma)
        rule_sum += rule_loss(traj, gamma)
        if len(traj):
            adv_sum += float(np.sum(advantages(traj, gamma)))
            n_steps += len(traj)
    b = float(len(trajectories))
    region_mean = region_sum / b
    rule_mean = rule_sum / b
    return LossBreakdown(
        region_loss=region_mean,
        rule_loss=rule_mean,
        total=rule_mean + alpha * region_mean,
        mean_advantage=adv_sum / n_steps if n_steps else 0.0,
        episode_count=len(trajectories),
    )
