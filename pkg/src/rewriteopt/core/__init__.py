from .domain import Domain, RewriteConfig, Trajectory, TrajectoryStep
from .episode import step_reward, discounted_returns, run_episode, greedy_rewrite

__all__ = [
    "Domain",
    "RewriteConfig",
    "Trajectory",
    "TrajectoryStep",
    "step_reward",
    "discounted_returns",
    "run_episode",
    "greedy_rewrite",
]
