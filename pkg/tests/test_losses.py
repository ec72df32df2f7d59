"""Actor-critic losses computed from recorded trajectories."""

from __future__ import annotations

import math

import numpy as np
import pytest

from rewriteopt.core.domain import Trajectory, TrajectoryStep
from rewriteopt.core.episode import discounted_returns
from rewriteopt.train import (
    advantages,
    loss_breakdown,
    region_loss,
    region_policy,
    rule_loss,
)

from conftest import rng


def mk_traj(rewards, q_values, logprobs):
    steps = [
        TrajectoryStep(
            state_snapshot=None,
            region=0,
            rule=0,
            reward=float(r),
            q_value=float(q),
            rule_logprob=float(lp),
        )
        for r, q, lp in zip(rewards, q_values, logprobs)
    ]
    return Trajectory(steps=steps, final_state=None,
                      initial_cost=0.0, final_cost=0.0)


def rand_traj(r, n_steps):
    return mk_traj(
        r.normal(size=n_steps),
        r.normal(size=n_steps),
        -np.abs(r.normal(size=n_steps)) - 1e-3,
    )


# ----------------------------------------------------------- region policy

def test_region_policy_uniform_on_equal_scores():
    np.testing.assert_allclose(region_policy([0.0, 0.0, 0.0]), [1 / 3] * 3)


def test_region_policy_log_gap_example():
    np.testing.assert_allclose(
        region_policy([1.0, 1.0 + math.log(3.0)]), [0.25, 0.75]
    )


def test_region_policy_preserves_argmax():
    r = rng(0)
    for _ in range(1000):
        q = r.normal(scale=3.0, size=int(r.integers(1, 12)))
        assert int(np.argmax(region_policy(q))) == int(np.argmax(q))


def test_region_policy_shift_invariant():
    r = rng(1)
    for _ in range(100):
        q = r.normal(size=6)
        shifted = region_policy(q + 123.456)
        np.testing.assert_allclose(shifted, region_policy(q), atol=1e-12)
        assert shifted.sum() == pytest.approx(1.0, abs=1e-12)


def test_region_policy_rejects_empty():
    with pytest.raises(ValueError):
        region_policy([])


# -------------------------------------------------------------- advantages

def test_advantages_are_returns_minus_scores():
    traj = mk_traj([3.0, 1.0], [0.5, -0.5], [-1.0, -1.0])
    expect = np.array(discounted_returns([3.0, 1.0], 0.9)) - [0.5, -0.5]
    np.testing.assert_allclose(advantages(traj, 0.9), expect)


# ------------------------------------------------------------- region loss

def test_region_loss_single_step():
    assert region_loss(mk_traj([2.0], [1.0], [-1.0]), 0.9) == pytest.approx(1.0)


def test_region_loss_two_step_expansion():
    traj = mk_traj([3.0, 1.0], [0.0, 0.0], [-1.0, -1.0])
    assert region_loss(traj, 0.9) == pytest.approx((3.9**2 + 1.0**2) / 2.0)


def test_region_loss_zero_iff_critic_exact():
    rewards = [2.0, -1.0, 0.5]
    returns = discounted_returns(rewards, 0.9)
    exact = mk_traj(rewards, returns, [-1.0] * 3)
    assert region_loss(exact, 0.9) == 0.0
    off = mk_traj(rewards, np.array(returns) + 0.1, [-1.0] * 3)
    assert region_loss(off, 0.9) > 0.0


def test_region_loss_empty_trajectory():
    assert region_loss(Trajectory(), 0.9) == 0.0


def test_region_loss_nonnegative():
    r = rng(2)
    for _ in range(200):
        assert region_loss(rand_traj(r, int(r.integers(1, 8))), 0.9) >= 0.0


# --------------------------------------------------------------- rule loss

def test_rule_loss_single_step():
    traj = mk_traj([2.0], [1.0], [math.log(0.5)])
    assert rule_loss(traj, 0.9) == pytest.approx(-1.0 * math.log(0.5))


def test_rule_loss_zero_advantage():
    rewards = [1.0, 2.0]
    returns = discounted_returns(rewards, 0.9)
    traj = mk_traj(rewards, returns, [-0.7, -0.2])
    assert rule_loss(traj, 0.9) == 0.0


def test_rule_loss_empty_trajectory():
    assert rule_loss(Trajectory(), 0.9) == 0.0


def test_rule_loss_sign_follows_advantage():
    # positive advantage with a sub-certain choice gives a positive loss
    # (descending it raises the chosen rule's probability)
    up = mk_traj([2.0], [1.0], [math.log(0.5)])
    assert rule_loss(up, 0.9) > 0.0
    down = mk_traj([0.0], [1.0], [math.log(0.5)])
    assert rule_loss(down, 0.9) < 0.0


# ----------------------------------------------------------- combined loss

def test_total_combines_example_values():
    traj = mk_traj([2.0], [1.0], [math.log(0.5)])
    b = loss_breakdown([traj], 0.9, 10.0)
    assert b.region_loss == pytest.approx(1.0)
    assert b.rule_loss == pytest.approx(0.6931, abs=1e-4)
    assert b.total == pytest.approx(10.6931, abs=1e-4)


def test_total_exact_for_every_alpha():
    r = rng(3)
    trajs = [rand_traj(r, int(r.integers(1, 6))) for _ in range(4)]
    for alpha in (0.25, 1.0, 10.0, 137.0):
        b = loss_breakdown(trajs, 0.9, alpha)
        assert b.total == b.rule_loss + alpha * b.region_loss


def test_batch_is_mean_over_episodes():
    r = rng(4)
    trajs = [rand_traj(r, 3) for _ in range(5)]
    b = loss_breakdown(trajs, 0.9, 10.0)
    assert b.region_loss == pytest.approx(
        np.mean([region_loss(t, 0.9) for t in trajs])
    )
    assert b.rule_loss == pytest.approx(
        np.mean([rule_loss(t, 0.9) for t in trajs])
    )
    assert b.episode_count == 5


def test_empty_episode_contributes_zero():
    traj = rand_traj(rng(5), 3)
    with_empty = loss_breakdown([traj, Trajectory()], 0.9, 10.0)
    alone = loss_breakdown([traj], 0.9, 10.0)
    assert with_empty.region_loss == pytest.approx(alone.region_loss / 2.0)
    assert with_empty.rule_loss == pytest.approx(alone.rule_loss / 2.0)
    assert with_empty.episode_count == 2


def test_all_empty_batch_is_zero_loss():
    b = loss_breakdown([Trajectory(), Trajectory()], 0.9, 10.0)
    assert b.region_loss == 0.0
    assert b.rule_loss == 0.0
    assert b.total == 0.0
    assert b.mean_advantage == 0.0


def test_mean_advantage_over_steps():
    t1 = mk_traj([2.0], [1.0], [-1.0])      # advantage 1.0
    t2 = mk_traj([0.0], [2.0], [-1.0])      # advantage -2.0
    b = loss_breakdown([t1, t2], 0.9, 10.0)
    assert b.mean_advantage == pytest.approx((1.0 - 2.0) / 2.0)


def test_loss_breakdown_validation():
    with pytest.raises(ValueError):
        loss_breakdown([], 0.9, 10.0)
    with pytest.raises(ValueError):
        loss_breakdown([Trajectory()], 0.9, 0.0)
    with pytest.raises(ValueError):
        loss_breakdown([Trajectory()], 0.9, -1.0)
