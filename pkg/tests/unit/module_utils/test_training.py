# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

import numpy as np
import pytest
from scipy.special import expit

from prompt_rewriter.module_utils.gateway import Generator, GeneratorConfig
from prompt_rewriter.module_utils.policy import (
    DROP,
    DUPLICATE,
    KEEP,
    NUM_PARAMS,
    FeatureContext,
    PolicyParams,
    RewriteMode,
    decision_log_prob,
    featurize,
    gate_slice,
    order_slice,
    policy_rewrite,
    trajectory_log_prob,
)
from prompt_rewriter.module_utils.prompt_model import ElementKind, label_of
from prompt_rewriter.module_utils.training import (
    LOG_COLUMNS,
    RlConfig,
    _action_targets,
    build_sl_data,
    class_weights,
    evaluate_policy,
    ppo_update,
    reward_of,
    rl_train,
    sl_fit,
    sl_loss,
    surrogate_objective,
    whiten,
    write_training_log,
)
from prompt_rewriter.module_utils.variants import SlExample, label_task
from tests.conftest import make_prompt, make_task


@pytest.fixture
def examples(rich_prompt, sim_generator):
    task = make_task(prompt=rich_prompt, ground_truth="our stay in lisbon gamma alpha two is here .")
    found, _ = label_task(task, sim_generator, seed=0)
    return found


def numeric_gradient(fn, theta, eps=1e-6):
    grad = np.zeros_like(theta)
    for i in range(len(theta)):
        up, down = theta.copy(), theta.copy()
        up[i] += eps
        down[i] -= eps
        grad[i] = (fn(up) - fn(down)) / (2 * eps)
    return grad


def test_action_targets_consume_label_occurrences():
    targets = _action_targets(ElementKind.KEYWORD, ["a", "b", "c"], ["b", "b", "a"])
    assert targets == [KEEP, DUPLICATE, DROP]
    assert _action_targets(ElementKind.STYLE_PHRASE, ["x"], ["x", "x"]) == [KEEP]


def test_sl_data_counts(examples):
    data = build_sl_data(examples)
    assert data.counts["gate"] == 3 * len(examples)
    assert data.counts["action"] > 0
    assert data.counts["add"] > 0


def test_sl_loss_gradient(examples):
    data = build_sl_data(examples)
    theta = PolicyParams.random(seed=2, scale=0.3).theta
    _, grad = sl_loss(theta, data)
    numeric = numeric_gradient(lambda t: sl_loss(t, data)[0], theta)
    assert grad == pytest.approx(numeric, abs=1e-5)


def test_sl_fit_never_increases_loss(examples):
    losses = []
    fitted = sl_fit(PolicyParams.zeros(), examples, epochs=40, loss_log=losses)
    assert len(losses) == 40
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))
    assert sl_loss(fitted.theta, build_sl_data(examples))[0] < losses[0]


def test_sl_fit_needs_examples():
    with pytest.raises(ValueError):
        sl_fit(PolicyParams.zeros(), [])


def sample_batch(params, n=6, seed=0):
    rng = np.random.default_rng(seed)
    task = make_task()
    return [
        policy_rewrite(task.rewrite_input(), params, RewriteMode.SAMPLE, rng)[1] for _ in range(n)
    ]


def test_surrogate_gradient_at_behaviour_policy():
    params = PolicyParams.random(seed=5, scale=0.4)
    trajectories = sample_batch(params)
    advantages = whiten(np.linspace(0.0, 1.0, len(trajectories)))
    value, grad, entropy, kl = surrogate_objective(params.theta, trajectories, advantages, 0.2, 0.01)
    numeric = numeric_gradient(
        lambda t: surrogate_objective(t, trajectories, advantages, 0.2, 0.01)[0], params.theta
    )
    assert grad == pytest.approx(numeric, abs=1e-5)
    assert kl == pytest.approx(0.0, abs=1e-12)
    assert entropy > 0


def test_whiten():
    out = whiten(np.array([1.0, 2.0, 3.0, 4.0]))
    assert out.mean() == pytest.approx(0.0)
    assert out.std() == pytest.approx(1.0, abs=1e-6)


def test_ppo_update_moves_baseline():
    params = PolicyParams.random(seed=1, scale=0.2)
    trajectories = sample_batch(params, n=2)
    updated, stats = ppo_update(params, list(zip(trajectories, [0.2, 0.4])), RlConfig())
    assert not stats.aborted
    assert updated.baseline == pytest.approx(0.1 * 0.3)
    assert not np.array_equal(updated.theta, params.theta)


def test_ppo_update_aborts_on_non_finite_rewards():
    params = PolicyParams.zeros()
    trajectories = sample_batch(params, n=2)
    updated, stats = ppo_update(params, list(zip(trajectories, [float("nan"), 0.5])), RlConfig())
    assert stats.aborted
    assert updated is params


def test_reward_is_scaled_bleu():
    assert reward_of("a b c d e", "a b c d e") == pytest.approx(1.0)
    assert 0.0 <= reward_of("a b", "c d e f") < 0.1


def test_zero_episodes_leave_policy_untouched(sim_generator):
    params = PolicyParams.zeros()
    same, log = rl_train(params, [], sim_generator, RlConfig(max_episodes=0))
    assert same is params
    assert log == []


def test_rl_train_logs_every_batch(sim_generator):
    tasks = [make_task("u1:a"), make_task("u2:b", ground_truth="our stay in lisbon staff")]
    cfg = RlConfig(max_episodes=8, batch_episodes=4, eval_every=1, seed=3)
    trained, log = rl_train(PolicyParams.zeros(), tasks, sim_generator, cfg, validation=tasks[:1])
    assert [row.batch for row in log] == [0, 1]
    assert all(row.val_reward is not None for row in log)
    assert trained.theta.shape == (NUM_PARAMS,)
    assert all(0.0 <= row.mean_reward <= 1.0 for row in log)


def test_rl_train_stops_when_budget_runs_out():
    generator = Generator(GeneratorConfig(budget_calls=0))
    cfg = RlConfig(max_episodes=16, batch_episodes=4)
    params = PolicyParams.zeros()
    trained, log = rl_train(params, [make_task()], generator, cfg)
    assert len(log) == 1
    assert log[0].mean_reward == 0.0
    assert np.array_equal(trained.theta, params.theta)


def test_evaluate_policy_without_tasks(sim_generator):
    assert evaluate_policy(PolicyParams.zeros(), [], sim_generator) == 0.0


def test_training_log_columns(tmp_path, sim_generator):
    _, log = rl_train(
        PolicyParams.zeros(), [make_task()], sim_generator, RlConfig(max_episodes=2, batch_episodes=2)
    )
    path = tmp_path / "log.csv"
    write_training_log(log, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(LOG_COLUMNS)
    assert lines[1].startswith("0,")
    assert lines[1].endswith(",")


def test_class_weights_equalize_classes():
    weights = class_weights(np.array([1, 1, 1, 0]))
    assert weights == pytest.approx([2 / 3, 2 / 3, 2 / 3, 2.0])
    assert weights.sum() == pytest.approx(4.0)
    assert class_weights(np.array([0.0, 0.0])) == pytest.approx([1.0, 1.0])
    assert len(class_weights(np.array([]))) == 0


def test_order_loss_is_pairwise_hinge():
    prompt = make_prompt(summary=(), keywords=("hotel", "spam"), style=(), context="hotel night")
    label = label_of(prompt)
    data = build_sl_data([SlExample(task_id="u1:a", input=prompt, label=label)])
    [d] = data.order[ElementKind.KEYWORD]
    theta = np.zeros(NUM_PARAMS)
    loss, grad = sl_loss(theta, data)
    assert grad[order_slice(ElementKind.KEYWORD)] == pytest.approx(-d / data.counts["order"])

    # a margin beyond 1 leaves no order loss and no order gradient
    theta[order_slice(ElementKind.KEYWORD)] = 2.0 * d / np.dot(d, d)
    far_loss, far_grad = sl_loss(theta, data)
    assert data.counts["order"] == 1
    assert loss - far_loss == pytest.approx(1.0)
    assert far_grad[order_slice(ElementKind.KEYWORD)] == pytest.approx(np.zeros(5))


def test_sl_fit_learns_to_empty_the_summary():
    prompt = make_prompt()
    label = label_of(prompt).model_copy(update={"summary": ()})
    examples = [SlExample(task_id=f"u{i}:a", input=prompt, label=label) for i in range(4)]
    fitted = sl_fit(PolicyParams.zeros(), examples, epochs=600)

    ctx = FeatureContext.from_prompt(prompt)
    texts = prompt.texts(ElementKind.SUMMARY_SENTENCE)
    psi = np.mean([featurize(t, ctx, i, len(texts)) for i, t in enumerate(texts)], axis=0)
    assert expit(fitted.theta[gate_slice(ElementKind.SUMMARY_SENTENCE)] @ psi) > 0.9
    rewritten, _ = policy_rewrite(make_task(prompt=prompt).rewrite_input(), fitted, RewriteMode.GREEDY)
    assert rewritten.summary == ()
    assert rewritten.keywords == prompt.keywords


def minority_drop_examples():
    prompt = make_prompt(summary=(), keywords=("hotel", "spam"), style=(), context="hotel night")
    keep_both = label_of(prompt)
    keep_hotel = keep_both.model_copy(update={"keywords": prompt.keywords[:1]})
    labels = [keep_both] * 6 + [keep_hotel] * 4
    return prompt, [SlExample(task_id=f"u{i}:a", input=prompt, label=lab) for i, lab in enumerate(labels)]


def test_balanced_fit_drops_a_minority_choice():
    prompt, examples = minority_drop_examples()
    task = make_task(prompt=prompt)

    balanced = sl_fit(PolicyParams.zeros(), examples)
    rewritten, _ = policy_rewrite(task.rewrite_input(), balanced, RewriteMode.GREEDY)
    assert rewritten.texts(ElementKind.KEYWORD) == ("hotel",)

    plain = sl_fit(PolicyParams.zeros(), examples, balance_classes=False)
    rewritten, _ = policy_rewrite(task.rewrite_input(), plain, RewriteMode.GREEDY)
    assert rewritten.texts(ElementKind.KEYWORD) == ("hotel", "spam")


def shifted(trajectory, delta):
    """The trajectory as if its decisions had been sampled ``delta`` nats likelier."""
    decisions = tuple(d.model_copy(update={"log_prob": d.log_prob + delta}) for d in trajectory.decisions)
    return trajectory.model_copy(update={"decisions": decisions})


@pytest.mark.parametrize("delta, advantage", [(-1.0, 1.0), (1.0, -1.0)])
def test_clipped_decisions_carry_no_gradient(delta, advantage):
    params = PolicyParams.random(seed=4, scale=0.3)
    trajectories = [shifted(t, delta) for t in sample_batch(params, n=3)]
    advantages = [advantage] * len(trajectories)
    _, grad, _, _ = surrogate_objective(params.theta, trajectories, advantages, 0.2, 0.0)
    assert np.array_equal(grad, np.zeros(NUM_PARAMS))

    _, grad, _, _ = surrogate_objective(params.theta, trajectories, [-advantage] * 3, 0.2, 0.0)
    assert np.any(grad != 0.0)


def test_unbounded_clip_reproduces_reinforce():
    params = PolicyParams.random(seed=6, scale=0.3)
    trajectories = sample_batch(params, n=5)
    rewards = [0.1, 0.4, 0.2, 0.9, 0.5]
    cfg = RlConfig(clip_epsilon=1e9, ppo_epochs=1, entropy_coef=0.0, learning_rate=0.1)
    updated, stats = ppo_update(params, list(zip(trajectories, rewards)), cfg)
    assert not stats.aborted

    advantages = whiten(np.array(rewards) - params.baseline)
    reinforce = sum(
        a * numeric_gradient(lambda t, tr=tr: trajectory_log_prob(t, tr), params.theta)
        for a, tr in zip(advantages, trajectories)
    ) / len(trajectories)
    assert updated.theta - params.theta == pytest.approx(cfg.learning_rate * reinforce, abs=1e-7)


def test_surrogate_gradient_off_policy():
    behaviour = PolicyParams.random(seed=7, scale=0.4)
    trajectories = sample_batch(behaviour)
    advantages = whiten(np.linspace(1.0, 0.0, len(trajectories)))
    theta = behaviour.theta + np.random.default_rng(8).normal(0.0, 0.02, NUM_PARAMS)
    ratios = [
        np.exp(decision_log_prob(theta, d) - d.log_prob) for t in trajectories for d in t.decisions
    ]
    assert all(0.8 < r < 1.2 for r in ratios)

    _, grad, _, kl = surrogate_objective(theta, trajectories, advantages, 0.2, 0.01)
    numeric = numeric_gradient(lambda t: surrogate_objective(t, trajectories, advantages, 0.2, 0.01)[0], theta)
    assert grad == pytest.approx(numeric, abs=1e-5)
    assert kl != 0.0


def test_overflowing_ratio_aborts_the_update():
    params = PolicyParams.random(seed=9, scale=0.3)
    first, second = sample_batch(params, n=2)
    batch = [(shifted(first, -1000.0), 0.0), (second, 1.0)]
    value, _, _, _ = surrogate_objective(params.theta, [t for t, _ in batch], [-1.0, 1.0], 0.2, 0.01)
    assert not np.isfinite(value)
    updated, stats = ppo_update(params, batch, RlConfig())
    assert stats.aborted
    assert updated is params
