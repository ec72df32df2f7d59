"""Domain-agnostic rewriting MDP contracts.

A state is a feasible solution to some optimization problem. A domain exposes
the set of regions that may be rewritten, a (possibly state-dependent) rule
space, rule applicability and application, and a cost function. The episode
loop in `episode.py` works against this contract only.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field
from typing import Any, Sequence


class Domain(abc.ABC):
    """Abstract rewriting domain.

    Regions are domain-chosen hashable ids (subtree indices, job ids, route
    positions). Rules are integers in [0, rule_count(state)). apply() is only
    defined where applicable() is true, and must return a state that satisfies
    the domain's feasibility predicate.
    """

    name: str = "abstract"

    @abc.abstractmethod
    def region_set(self, state: Any) -> list:
        """All rewritable regions of `state`, in deterministic order."""

    @abc.abstractmethod
    def rule_count(self, state: Any) -> int:
        """Size of the rule space |U| for this state."""

    @abc.abstractmethod
    def applicable(self, state: Any, region: Any, rule: int) -> bool:
        """Whether `rule` structurally applies at `region`."""

    @abc.abstractmethod
    def apply(self, state: Any, region: Any, rule: int) -> Any:
        """Apply an applicable rule; returns a new feasible state."""

    @abc.abstractmethod
    def cost(self, state: Any) -> float:
        """Finite non-negative cost of a feasible state."""

    @abc.abstractmethod
    def serialize_state(self, state: Any) -> Any:
        """Compact JSON-able snapshot, inverse of deserialize_state."""

    @abc.abstractmethod
    def deserialize_state(self, obj: Any) -> Any:
        """Rebuild a state from serialize_state output."""


class Policy(abc.ABC):
    """Scoring interface consumed by the episode loop.

    region_scores returns the learned score Q(s, region) for every region in
    domain.region_set(state) order; rule_logprobs returns log π_u(· | s[region])
    over the state's rule space. Implementations must be deterministic
    functions of (parameters, state, region).
    """

    @abc.abstractmethod
    def region_scores(self, state: Any) -> Sequence[float]: ...

    @abc.abstractmethod
    def rule_logprobs(self, state: Any, region: Any) -> Sequence[float]: ...


@dataclass
class RewriteConfig:
    """Episode-loop knobs.

    epsilon: score threshold below which a sampled region triggers the
        re-sample-or-accept coin flip (and greedy inference terminates).
    p_continue: probability of accepting a below-threshold region instead of
        re-sampling; decayed multiplicatively during training.
    max_iters: hard episode length bound.
    region_retries / rule_retries: per-iteration sampling attempt bounds.
    gamma: discount for returns.
    """

    epsilon: float = 0.0
    p_continue: float = 0.5
    p_continue_decay: float = 0.8
    p_continue_floor: float = 0.01
    max_iters: int = 50
    region_retries: int = 10
    rule_retries: int = 10
    gamma: float = 0.9

    def __post_init__(self) -> None:
        if not (0.0 <= self.p_continue <= 1.0):
            raise ValueError("p_continue must be in [0, 1]")
        if self.p_continue_floor > self.p_continue:
            raise ValueError("p_continue_floor must not exceed p_continue")
        if not (0.0 < self.gamma <= 1.0):
            raise ValueError("gamma must be in (0, 1]")
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")
        if self.region_retries < 1 or self.rule_retries < 1:
            raise ValueError("retry bounds must be positive")


@dataclass
class TrajectoryStep:
    """One rewriting step, recorded before the transition.

    state_snapshot is the domain-serialized state the step was taken from, so
    training can re-encode it; q_value and rule_logprob are the rollout-time
    policy outputs for the chosen (region, rule).
    """

    state_snapshot: Any
    region: Any
    rule: int
    reward: float
    q_value: float
    rule_logprob: float


@dataclass
class Trajectory:
    steps: list[TrajectoryStep] = field(default_factory=list)
    final_state: Any = None
    initial_cost: float = 0.0
    final_cost: float = 0.0

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def rewards(self) -> list[float]:
        return [s.reward for s in self.steps]
