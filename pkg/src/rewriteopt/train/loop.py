"""Batched rollout training with one optimizer step per epoch.

Each epoch samples a batch of initial states, rolls out one episode per
state, recomputes the combined loss from current parameters over the
recorded trajectories, accumulates analytic gradients, and takes a single
clipped Adam step. Learning-rate and region-acceptance schedules tick on
completed optimizer steps, so resuming from a checkpoint continues the
decay where it left off.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from rewriteopt.core.domain import Domain, RewriteConfig, Trajectory
from rewriteopt.core.episode import discounted_returns, greedy_rewrite, run_episode
from rewriteopt.nn.params import ParamStore, optimizer_step
from rewriteopt.train.losses import LossBreakdown


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for the actor-critic loop.

    The two decay schedules share one interval: every ``schedule_every``
    optimizer steps the learning rate shrinks by ``lr_decay`` and the
    region-acceptance probability by ``p_continue_decay`` (floored).
    """

    alpha: float = 10.0
    gamma: float = 0.9
    batch_size: int = 128
    lr0: float = 1e-4
    lr_decay: float = 0.9
    clip_norm: float = 5.0
    p_continue0: float = 0.5
    p_continue_decay: float = 0.8
    p_continue_floor: float = 0.01
    schedule_every: int = 1000
    epochs: int = 1
    eval_interval: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must be in (0, 1]")
        for name in (
            "lr0",
            "lr_decay",
            "clip_norm",
            "p_continue0",
            "p_continue_decay",
            "p_continue_floor",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.schedule_every < 1:
            raise ValueError("schedule_every must be at least 1")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.eval_interval < 0:
            raise ValueError("eval_interval must be non-negative")


@dataclass
class Dataset:
    """Initial states: a training split and an optional held-out split."""

    train: list
    valid: list = field(default_factory=list)


@dataclass(frozen=True)
class EpochMetrics:
    """One metrics row. Loss/schedule fields are None on evaluation rows."""

    epoch: int
    split: str
    mean_cost_before: float
    mean_cost_after: float
    region_loss: Optional[float] = None
    rule_loss: Optional[float] = None
    total_loss: Optional[float] = None
    lr: Optional[float] = None
    p_continue: Optional[float] = None
    wall_seconds: float = 0.0


@dataclass
class TrainReport:
    """All metrics rows plus the best held-out evaluation seen."""

    rows: list[EpochMetrics]
    best_valid: Optional[EpochMetrics]


class NonFiniteLossError(RuntimeError):
    """A batch produced a non-finite loss; carries the offending episode."""

    def __init__(self, message: str, trajectory_dump: dict) -> None:
        super().__init__(message)
        self.trajectory_dump = trajectory_dump


def serialize_trajectory(traj: Trajectory) -> dict:
    """JSON-ready dump of an episode, for diagnostics."""
    return {
        "initial_cost": traj.initial_cost,
        "final_cost": traj.final_cost,
        "steps": [
            {
                "state": s.state_snapshot,
                "region": s.region,
                "rule": s.rule,
                "reward": s.reward,
                "q_value": s.q_value,
                "rule_logprob": s.rule_logprob,
            }
            for s in traj.steps
        ],
    }


def p_continue_for_step(step: int, cfg: TrainConfig) -> float:
    """Region-acceptance probability after `step` completed optimizer steps."""
    return max(
        cfg.p_continue_floor,
        cfg.p_continue0 * cfg.p_continue_decay ** (step // cfg.schedule_every),
    )


def batch_update(
    domain: Domain,
    model,
    trajectories: Sequence[Trajectory],
    gamma: float,
    alpha: float,
    accumulate: bool = True,
) -> LossBreakdown:
    """Combined batch loss from current parameters, with analytic gradients.

    Every recorded step is re-hydrated from its snapshot and re-encoded, so
    the loss (and its gradient) reflects the parameters as they are now, not
    as they were at rollout time. The selector term weights each step by the
    rollout-time advantage (return minus recorded score), treated as a
    constant: perturbing parameters moves the recomputed scores and
    log-probabilities but never the advantage weights. That makes this
    function a valid finite-difference target for gradient checking.

    When parameters have not changed since the rollout, the returned values
    equal :func:`rewriteopt.train.losses.loss_breakdown` exactly.
    """
    if not trajectories:
        raise ValueError("need at least one trajectory")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    b = float(len(trajectories))
    region_sum = 0.0
    rule_sum = 0.0
    adv_sum = 0.0
    n_steps = 0
    for traj in trajectories:
        t_len = len(traj)
        if t_len == 0:
            continue
        returns = discounted_returns(list(traj.rewards), gamma)
        ep_region = 0.0
        ep_rule = 0.0
        frozen_adv = [returns[t] - traj.steps[t].q_value for t in range(t_len)]
        for t, step in enumerate(traj.steps):
            state = domain.deserialize_state(step.state_snapshot)
            regions = domain.region_set(state)
            ridx = regions.index(step.region)
            q_now = float(model.region_scores(state)[ridx])
            logp_now = float(model.rule_logprobs(state, step.region)[step.rule])
            resid = returns[t] - q_now
            ep_region += resid * resid / t_len
            ep_rule += -frozen_adv[t] * logp_now
            if accumulate:
                dq = alpha * (1.0 / b) * (-2.0 / t_len) * resid
                dlogp = (1.0 / b) * (-frozen_adv[t])
                model.backprop_step(state, step.region, step.rule, dq, dlogp)
        if not (np.isfinite(ep_region) and np.isfinite(ep_rule)):
            raise NonFiniteLossError(
                f"non-finite episode loss (region={ep_region}, rule={ep_rule})",
                serialize_trajectory(traj),
            )
        region_sum += ep_region
        rule_sum += ep_rule
        adv_sum += float(np.sum(frozen_adv))
        n_steps += t_len
    region_mean = region_sum / b
    rule_mean = rule_sum / b
    return LossBreakdown(
        region_loss=region_mean,
        rule_loss=rule_mean,
        total=rule_mean + alpha * region_mean,
        mean_advantage=adv_sum / n_steps if n_steps else 0.0,
        episode_count=len(trajectories),
    )


def batch_loss_closure(
    domain: Domain,
    model,
    store: ParamStore,
    trajectories: Sequence[Trajectory],
    gamma: float,
    alpha: float,
) -> Callable[[], float]:
    """A gradient-check target: zero grads, recompute loss + grads, return loss."""

    def loss_fn() -> float:
        store.zero_grad()
        return batch_update(domain, model, trajectories, gamma, alpha).total

    return loss_fn


def _episode_rng(seed: int, step: int, index: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(step, index)))
    )


def train(
    domain: Domain,
    model,
    store: ParamStore,
    dataset: Dataset,
    train_cfg: TrainConfig,
    rewrite_cfg: RewriteConfig,
    eval_cfg: Optional[RewriteConfig] = None,
    n_threads: int = 1,
    on_row: Optional[Callable[[EpochMetrics], None]] = None,
    on_eval: Optional[Callable[[int], None]] = None,
    log: Optional[Callable[[str], None]] = None,
) -> TrainReport:
    """Run the actor-critic loop and report per-epoch metrics.

    ``rewrite_cfg`` bounds the training rollouts; ``eval_cfg`` (defaulting
    to ``rewrite_cfg``) bounds the greedy held-out evaluations, which run
    before the first step (fresh parameters only), every ``eval_interval``
    steps, and after the last epoch. ``on_row`` sees every metrics row as it
    is produced; ``on_eval`` fires after each held-out evaluation (for
    checkpointing). Wall times are reported as 0.0 in single-threaded mode
    so identical seeds yield identical metrics.
    """
    if not dataset.train:
        raise ValueError("empty training split")
    eval_cfg = eval_cfg if eval_cfg is not None else rewrite_cfg
    rows: list[EpochMetrics] = []
    best: Optional[EpochMetrics] = None

    def emit(row: EpochMetrics) -> None:
        rows.append(row)
        if on_row is not None:
            on_row(row)

    def run_valid(epoch: int) -> None:
        nonlocal best
        if not dataset.valid:
            return
        t0 = time.perf_counter()
        before = []
        after = []
        for s0 in dataset.valid:
            best_state, _ = greedy_rewrite(domain, model, s0, eval_cfg)
            before.append(domain.cost(s0))
            after.append(domain.cost(best_state))
        wall = 0.0 if n_threads == 1 else time.perf_counter() - t0
        row = EpochMetrics(
            epoch=epoch,
            split="valid",
            mean_cost_before=float(np.mean(before)),
            mean_cost_after=float(np.mean(after)),
            wall_seconds=wall,
        )
        emit(row)
        if best is None or row.mean_cost_after < best.mean_cost_after:
            best = row
        if log is not None:
            log(
                f"valid @ step {epoch}: cost {row.mean_cost_before:.4f} "
                f"-> {row.mean_cost_after:.4f}"
            )
        if on_eval is not None:
            on_eval(epoch)

    if store.global_step == 0:
        run_valid(0)

    for _ in range(train_cfg.epochs):
        step0 = store.global_step
        p_c = p_continue_for_step(step0, train_cfg)
        pick = _episode_rng(train_cfg.seed, step0, 0)
        idxs = pick.integers(0, len(dataset.train), size=train_cfg.batch_size)
        ep_rngs = [
            _episode_rng(train_cfg.seed, step0, i + 1)
            for i in range(train_cfg.batch_size)
        ]
        t0 = time.perf_counter()

        def roll(i: int) -> Trajectory:
            return run_episode(
                domain,
                model,
                dataset.train[int(idxs[i])],
                rewrite_cfg,
                ep_rngs[i],
                p_continue=p_c,
            )

        if n_threads > 1:
            with ThreadPoolExecutor(max_workers=n_threads) as pool:
                trajectories = list(pool.map(roll, range(train_cfg.batch_size)))
        else:
            trajectories = [roll(i) for i in range(train_cfg.batch_size)]

        store.zero_grad()
        breakdown = batch_update(
            domain, model, trajectories, train_cfg.gamma, train_cfg.alpha
        )
        if not np.isfinite(breakdown.total):
            raise NonFiniteLossError(
                f"non-finite batch loss {breakdown.total}",
                serialize_trajectory(trajectories[0]),
            )
        lr = optimizer_step(
            store,
            base_lr=train_cfg.lr0,
            clip_norm=train_cfg.clip_norm,
            lr_decay=train_cfg.lr_decay,
            lr_decay_every=train_cfg.schedule_every,
        )
        wall = 0.0 if n_threads == 1 else time.perf_counter() - t0
        epoch = store.global_step
        emit(
            EpochMetrics(
                epoch=epoch,
                split="train",
                mean_cost_before=float(
                    np.mean([t.initial_cost for t in trajectories])
                ),
                mean_cost_after=float(
                    np.mean([t.final_cost for t in trajectories])
                ),
                region_loss=breakdown.region_loss,
                rule_loss=breakdown.rule_loss,
                total_loss=breakdown.total,
                lr=lr,
                p_continue=p_c,
                wall_seconds=wall,
            )
        )
        if log is not None:
            log(
                f"epoch {epoch}: total={breakdown.total:.6f} "
                f"region={breakdown.region_loss:.6f} rule={breakdown.rule_loss:.6f} "
                f"lr={lr:.2e} p_c={p_c:.3f}"
            )
        if train_cfg.eval_interval and epoch % train_cfg.eval_interval == 0:
            run_valid(epoch)

    final_step = store.global_step
    if train_cfg.epochs > 0 and not (
        train_cfg.eval_interval and final_step % train_cfg.eval_interval == 0
    ):
        run_valid(final_step)
    if best is not None:
        final = EpochMetrics(
            epoch=best.epoch,
            split="best_valid",
            mean_cost_before=best.mean_cost_before,
            mean_cost_after=best.mean_cost_after,
        )
        emit(final)
        return TrainReport(rows=rows, best_valid=final)
    return TrainReport(rows=rows, best_valid=None)
