"""Episode rollout: sampled (training) and greedy (inference) rewriting."""

from __future__ import annotations

from typing import Any

import numpy as np

from .domain import Domain, Policy, RewriteConfig, Trajectory, TrajectoryStep


def step_reward(cost_before: float, cost_after: float) -> float:
    """Per-step reward: the cost reduction. Negative for uphill moves."""
    return cost_before - cost_after


def discounted_returns(rewards: list[float], gamma: float) -> list[float]:
    """returns[t] = sum_{t' >= t} gamma^(t'-t) * rewards[t']."""
    out: list[float] = [0.0] * len(rewards)
    acc = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        acc = rewards[t] + gamma * acc
        out[t] = acc
    return out


def _softmax(x: np.ndarray) -> np.ndarray:
    z = x - np.max(x)
    e = np.exp(z)
    return e / e.sum()


def _sample_region(
    q: np.ndarray, cfg: RewriteConfig, p_continue: float, rng: np.random.Generator
) -> int:
    """Sample a region index from softmax(Q) with the retry scheme.

    A draw with Q >= epsilon is accepted outright. A below-threshold draw is
    accepted with probability p_continue, otherwise re-drawn without
    replacement, up to region_retries draws total; exhausting retries (or the
    candidate pool) accepts the last draw.
    """
    n = len(q)
    masked = np.zeros(n, dtype=bool)
    idx = 0
    for _ in range(cfg.region_retries):
        scores = np.where(masked, -np.inf, q)
        probs = _softmax(scores)
        idx = int(rng.choice(n, p=probs))
        if q[idx] >= cfg.epsilon:
            return idx
        if rng.random() < p_continue:
            return idx
        masked[idx] = True
        if masked.all():
            return idx
    return idx


def run_episode(
    domain: Domain,
    policy: Policy,
    s0: Any,
    cfg: RewriteConfig,
    rng: np.random.Generator,
    p_continue: float | None = None,
) -> Trajectory:
    """Stochastic rollout used to collect training trajectories.

    Per iteration: sample a region from softmax(Q) with the retry scheme,
    then sample rules (with replacement) until an applicable one is drawn;
    the episode ends early if rule_retries draws all fail, if the region set
    is empty, or after max_iters transitions. Records the rollout-time Q and
    rule log-probability per step.
    """
    if p_continue is None:
        p_continue = cfg.p_continue
    traj = Trajectory(initial_cost=domain.cost(s0))
    state = s0
    cost = traj.initial_cost
    for _ in range(cfg.max_iters):
        regions = domain.region_set(state)
        if not regions:
            break
        q = np.asarray(policy.region_scores(state), dtype=np.float64)
        ridx = _sample_region(q, cfg, p_continue, rng)
        region = regions[ridx]
        logp = np.asarray(policy.rule_logprobs(state, region), dtype=np.float64)
        probs = np.exp(logp)
        probs = probs / probs.sum()
        rule = -1
        for _ in range(cfg.rule_retries):
            cand = int(rng.choice(len(probs), p=probs))
            if domain.applicable(state, region, cand):
                rule = cand
                break
        if rule < 0:
            break
        nxt = domain.apply(state, region, rule)
        nxt_cost = domain.cost(nxt)
        traj.steps.append(
            TrajectoryStep(
                state_snapshot=domain.serialize_state(state),
                region=region,
                rule=rule,
                reward=step_reward(cost, nxt_cost),
                q_value=float(q[ridx]),
                rule_logprob=float(logp[rule]),
            )
        )
        state, cost = nxt, nxt_cost
    traj.final_state = state
    traj.final_cost = cost
    return traj


def greedy_rewrite(
    domain: Domain, policy: Policy, s0: Any, cfg: RewriteConfig
) -> tuple[Any, Trajectory]:
    """Deterministic inference: argmax region and rule each step.

    Terminates when the best region score falls below epsilon, when the
    argmax rule is inapplicable, or at max_iters. Returns the minimum-cost
    state seen along the trajectory (uphill rules can leave the final state
    worse than an intermediate one), plus the full trajectory.
    """
    traj = Trajectory(initial_cost=domain.cost(s0))
    state = s0
    cost = traj.initial_cost
    best_state, best_cost = state, cost
    for _ in range(cfg.max_iters):
        regions = domain.region_set(state)
        if not regions:
            break
        q = np.asarray(policy.region_scores(state), dtype=np.float64)
        ridx = int(np.argmax(q))
        if q[ridx] < cfg.epsilon:
            break
        region = regions[ridx]
        logp = np.asarray(policy.rule_logprobs(state, region), dtype=np.float64)
        rule = int(np.argmax(logp))
        if not domain.applicable(state, region, rule):
            break
        nxt = domain.apply(state, region, rule)
        nxt_cost = domain.cost(nxt)
        traj.steps.append(
            TrajectoryStep(
                state_snapshot=domain.serialize_state(state),
                region=region,
                rule=rule,
                reward=step_reward(cost, nxt_cost),
                q_value=float(q[ridx]),
                rule_logprob=float(logp[rule]),
            )
        )
        state, cost = nxt, nxt_cost
        if cost < best_cost:
            best_state, best_cost = state, cost
    traj.final_state = state
    traj.final_cost = cost
    return best_state, traj
