"""Training loop: schedules, gradient routing, determinism, failure modes."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from rewriteopt.core import RewriteConfig
from rewriteopt.core.episode import discounted_returns
from rewriteopt.train import (
    Dataset,
    NonFiniteLossError,
    TrainConfig,
    batch_update,
    loss_breakdown,
    p_continue_for_step,
    serialize_trajectory,
    train,
)

from conftest import (
    build_expr,
    build_jobsched,
    build_vrp,
    expr_state,
    jobsched_state,
    nonempty_rollout,
    rng,
    vrp_state,
)


def snapshot(store):
    return {k: v.copy() for k, v in store.state_dict()["params"].items()}


def same_params(a, b):
    return set(a) == set(b) and all(np.array_equal(a[k], b[k]) for k in a)


# ---------------------------------------------------------------- schedule

def test_p_continue_schedule():
    cfg = TrainConfig()
    assert p_continue_for_step(0, cfg) == 0.5
    assert p_continue_for_step(999, cfg) == 0.5
    assert p_continue_for_step(1000, cfg) == pytest.approx(0.4)
    assert p_continue_for_step(2000, cfg) == pytest.approx(0.32)
    assert p_continue_for_step(10**7, cfg) == 0.01


def test_train_config_validation():
    for bad in (
        dict(alpha=0.0),
        dict(batch_size=0),
        dict(gamma=0.0),
        dict(gamma=1.5),
        dict(lr0=0.0),
        dict(clip_norm=-1.0),
        dict(p_continue0=0.0),
        dict(schedule_every=0),
        dict(epochs=-1),
        dict(eval_interval=-1),
    ):
        with pytest.raises(ValueError):
            TrainConfig(**bad)


# ----------------------------------------------------- loss recomputation

def test_batch_update_matches_recorded_losses_before_any_step():
    domain, model, store = build_expr()
    trajs = [
        nonempty_rollout(domain, model, expr_state, seed0=s)
        for s in (0, 30, 60)
    ]
    recorded = loss_breakdown(trajs, 0.9, 10.0)
    recomputed = batch_update(domain, model, trajs, 0.9, 10.0,
                              accumulate=False)
    assert recomputed.region_loss == recorded.region_loss
    assert recomputed.rule_loss == recorded.rule_loss
    assert recomputed.total == recorded.total
    assert recomputed.mean_advantage == recorded.mean_advantage
    assert recomputed.episode_count == recorded.episode_count


# --------------------------------------------------------- gradient paths

_HEADS = {
    "expr": (build_expr, expr_state, ("expr.q.",), ("expr.rule.",)),
    "jobsched": (build_jobsched, None, ("js.q.",), ("js.sel.", "js.pair.")),
    "vrp": (build_vrp, None, ("vrp.q.",), ("vrp.att.",)),
}


def _setup(kind):
    build, mk, q_prefixes, sel_prefixes = _HEADS[kind]
    domain, model, store = build()
    if kind == "expr":
        make_state = mk
    elif kind == "jobsched":
        make_state = lambda s: jobsched_state(domain, s)
    else:
        make_state = lambda s: vrp_state(domain, s)
    traj = nonempty_rollout(domain, model, make_state, seed0=5)
    step = traj.steps[0]
    state = domain.deserialize_state(step.state_snapshot)
    return domain, model, store, state, step, q_prefixes, sel_prefixes


def _grads_by_prefix(store, prefixes):
    return [
        store.grad(n)
        for n in store.names()
        if any(n.startswith(p) for p in prefixes)
    ]


@pytest.mark.parametrize("kind", sorted(_HEADS))
def test_score_gradient_never_touches_selector_head(kind):
    domain, model, store, state, step, q_pref, sel_pref = _setup(kind)
    store.zero_grad()
    model.backprop_step(state, step.region, step.rule, dq=1.0, dlogp=0.0)
    sel = _grads_by_prefix(store, sel_pref)
    assert sel and all(np.all(g == 0.0) for g in sel)
    q = _grads_by_prefix(store, q_pref)
    assert any(np.any(g != 0.0) for g in q)
    assert store.grad_norm() > 0.0


@pytest.mark.parametrize("kind", sorted(_HEADS))
def test_selector_gradient_never_touches_score_head(kind):
    domain, model, store, state, step, q_pref, sel_pref = _setup(kind)
    store.zero_grad()
    model.backprop_step(state, step.region, step.rule, dq=0.0, dlogp=1.0)
    q = _grads_by_prefix(store, q_pref)
    assert q and all(np.all(g == 0.0) for g in q)
    sel = _grads_by_prefix(store, sel_pref)
    assert any(np.any(g != 0.0) for g in sel)


@pytest.mark.parametrize("kind", sorted(_HEADS))
def test_both_paths_reach_shared_encoder(kind):
    domain, model, store, state, step, q_pref, sel_pref = _setup(kind)
    heads = q_pref + sel_pref

    def encoder_norm():
        return sum(
            float(np.abs(store.grad(n)).sum())
            for n in store.names()
            if not any(n.startswith(p) for p in heads)
        )

    store.zero_grad()
    model.backprop_step(state, step.region, step.rule, dq=1.0, dlogp=0.0)
    assert encoder_norm() > 0.0
    store.zero_grad()
    model.backprop_step(state, step.region, step.rule, dq=0.0, dlogp=1.0)
    assert encoder_norm() > 0.0


def test_exact_critic_silences_selector_updates():
    # with q_value set to the true return, every frozen advantage is zero,
    # so the batch gradient must leave the rule selector untouched while the
    # score head still regresses toward the (recomputed) residuals
    domain, model, store = build_expr()
    traj = nonempty_rollout(domain, model, expr_state, seed0=40)
    returns = discounted_returns(list(traj.rewards), 0.9)
    traj.steps[:] = [
        dataclasses.replace(s, q_value=float(ret))
        for s, ret in zip(traj.steps, returns)
    ]
    store.zero_grad()
    b = batch_update(domain, model, [traj], 0.9, 10.0)
    assert b.rule_loss == 0.0
    for n in store.names():
        if n.startswith("expr.rule."):
            assert np.all(store.grad(n) == 0.0)
    assert any(
        np.any(store.grad(n) != 0.0)
        for n in store.names()
        if n.startswith("expr.q.")
    )


def test_nonfinite_loss_raises_with_episode_dump():
    domain, model, store = build_expr()
    traj = nonempty_rollout(domain, model, expr_state, seed0=10)
    store.get("expr.q.l1.b")[:] = np.nan
    with pytest.raises(NonFiniteLossError) as exc:
        batch_update(domain, model, [traj], 0.9, 10.0)
    dump = exc.value.trajectory_dump
    assert set(dump) == {"initial_cost", "final_cost", "steps"}
    assert len(dump["steps"]) == len(traj)
    assert {"state", "region", "rule", "reward", "q_value", "rule_logprob"} \
        <= set(dump["steps"][0])


def test_serialize_trajectory_is_json_ready():
    import json

    domain, model, store = build_expr()
    traj = nonempty_rollout(domain, model, expr_state, seed0=20)
    json.dumps(serialize_trajectory(traj))


# ------------------------------------------------------------ train() loop

def _expr_dataset(n_train=12, n_valid=4, seed=100):
    states = [expr_state(seed + i) for i in range(n_train + n_valid)]
    return Dataset(train=states[:n_train], valid=states[n_train:])


def _quick_cfg(**overrides):
    base = dict(batch_size=4, epochs=2, seed=0)
    base.update(overrides)
    return TrainConfig(**base)


def test_zero_epochs_leaves_parameters_unchanged():
    domain, model, store = build_expr()
    before = snapshot(store)
    report = train(
        domain, model, store, _expr_dataset(), _quick_cfg(epochs=0),
        RewriteConfig(max_iters=4),
    )
    assert same_params(before, snapshot(store))
    assert [r.split for r in report.rows] == ["valid", "best_valid"]
    assert report.rows[0].epoch == 0


def test_fixed_seed_reproduces_metrics_and_parameters():
    runs = []
    for _ in range(2):
        domain, model, store = build_expr(seed=1)
        report = train(
            domain, model, store, _expr_dataset(), _quick_cfg(epochs=3),
            RewriteConfig(max_iters=4),
        )
        runs.append((report, snapshot(store)))
    (r1, p1), (r2, p2) = runs
    assert r1.rows == r2.rows
    assert same_params(p1, p2)


def test_thread_count_changes_nothing_but_wall_time():
    outs = []
    for n_threads in (1, 2):
        domain, model, store = build_expr(seed=1)
        report = train(
            domain, model, store, _expr_dataset(), _quick_cfg(epochs=2),
            RewriteConfig(max_iters=4), n_threads=n_threads,
        )
        outs.append((report, snapshot(store)))
    (r1, p1), (r2, p2) = outs
    assert same_params(p1, p2)
    strip = lambda row: dataclasses.replace(row, wall_seconds=0.0)
    assert [strip(r) for r in r1.rows] == [strip(r) for r in r2.rows]
    assert all(r.wall_seconds == 0.0 for r in r1.rows)


def test_row_structure_and_best_valid():
    domain, model, store = build_expr()
    report = train(
        domain, model, store, _expr_dataset(),
        _quick_cfg(epochs=2, eval_interval=1),
        RewriteConfig(max_iters=4),
    )
    splits = [r.split for r in report.rows]
    assert splits == ["valid", "train", "valid", "train", "valid",
                      "best_valid"]
    for row in report.rows:
        if row.split == "train":
            assert row.total_loss is not None
            assert row.lr is not None
            assert row.p_continue == 0.5  # far from the first decay
            assert row.total_loss == pytest.approx(
                row.rule_loss + 10.0 * row.region_loss
            )
        else:
            assert row.total_loss is None and row.lr is None
        assert row.wall_seconds == 0.0
    valid_rows = [r for r in report.rows if r.split == "valid"]
    assert report.best_valid is not None
    assert report.best_valid.mean_cost_after == min(
        r.mean_cost_after for r in valid_rows
    )


def test_training_updates_parameters_and_advances_step():
    domain, model, store = build_expr()
    before = snapshot(store)
    train(
        domain, model, store, _expr_dataset(), _quick_cfg(epochs=2),
        RewriteConfig(max_iters=4),
    )
    assert store.global_step == 2
    assert not same_params(before, snapshot(store))


def test_resumed_training_skips_baseline_evaluation():
    domain, model, store = build_expr()
    data = _expr_dataset()
    cfg = _quick_cfg(epochs=1)
    train(domain, model, store, data, cfg, RewriteConfig(max_iters=4))
    report = train(domain, model, store, data, cfg,
                   RewriteConfig(max_iters=4))
    assert report.rows[0].split == "train"
    assert report.rows[0].epoch == 2


def test_train_rejects_empty_split():
    domain, model, store = build_expr()
    with pytest.raises(ValueError):
        train(
            domain, model, store, Dataset(train=[]), _quick_cfg(),
            RewriteConfig(max_iters=4),
        )


def test_train_runs_on_other_domains_smoke():
    domain, model, store = build_jobsched()
    s0 = jobsched_state(domain, 3)
    report = train(
        domain, model, store, Dataset(train=[s0], valid=[s0]),
        _quick_cfg(epochs=1, batch_size=2), RewriteConfig(max_iters=3),
    )
    assert any(r.split == "train" for r in report.rows)

    domain, model, store = build_vrp()
    v0 = vrp_state(domain, 3)
    report = train(
        domain, model, store, Dataset(train=[v0], valid=[v0]),
        _quick_cfg(epochs=1, batch_size=2), RewriteConfig(max_iters=3),
    )
    assert any(r.split == "train" for r in report.rows)
