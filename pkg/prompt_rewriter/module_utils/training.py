# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""Supervised imitation of best-prompt labels and PPO fine-tuning with generation reward."""

import csv
import logging
import math
from collections import Counter
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.special import expit, log_expit, logsumexp, softmax

from prompt_rewriter.module_utils.corpus import PromptedTask
from prompt_rewriter.module_utils.exceptions import BudgetExhaustedError, NonFiniteGradientError
from prompt_rewriter.module_utils.metrics import BleuMode, bleu, tokenize
from prompt_rewriter.module_utils.policy import (
    ADD_SLICE,
    DUPLICATE,
    DROP,
    KEEP,
    NUM_ACTIONS,
    NUM_FEATURES,
    FeatureContext,
    PolicyParams,
    RewriteMode,
    Trajectory,
    action_slice,
    candidate_pool,
    decision_grad,
    decision_log_prob,
    featurize,
    gate_slice,
    num_actions,
    order_slice,
    policy_rewrite,
)
from prompt_rewriter.module_utils.prompt_model import SECTION_KINDS, ElementKind, render
from prompt_rewriter.module_utils.variants import SlExample

LOG = logging.getLogger(__name__)

ADVANTAGE_EPS = 1e-8
MAX_STEP_HALVINGS = 20
# exp overflows a double just above 709.78
MAX_LOG_RATIO = 700.0
LOG_COLUMNS = ("batch", "mean_reward", "loss", "kl", "entropy", "val_reward")


class RlConfig(BaseModel):
    clip_epsilon: float = Field(default=0.2, gt=0)
    learning_rate: float = Field(default=0.05, gt=0)
    ppo_epochs: int = Field(default=4, ge=1)
    batch_episodes: int = Field(default=32, ge=1)
    entropy_coef: float = Field(default=0.01, ge=0)
    baseline_decay: float = Field(default=0.9, ge=0, le=1)
    max_episodes: int = Field(default=3000, ge=0)
    eval_every: int = Field(default=10, ge=1)
    seed: int = 0


class PpoStats(BaseModel):
    objective: float = 0.0
    loss: float = 0.0
    kl: float = 0.0
    entropy: float = 0.0
    aborted: bool = False


class TrainingLogRow(BaseModel):
    batch: int
    mean_reward: float
    loss: float
    kl: float
    entropy: float
    val_reward: Optional[float] = None


# --------------------------------------------------------------------------
# Supervised fit
# --------------------------------------------------------------------------


class SlData(NamedTuple):
    gate: Dict[ElementKind, Tuple[np.ndarray, np.ndarray, np.ndarray]]
    action: Dict[ElementKind, Tuple[np.ndarray, np.ndarray, np.ndarray]]
    order: Dict[ElementKind, np.ndarray]
    add: Tuple[np.ndarray, np.ndarray, np.ndarray]
    counts: Dict[str, int]


def class_weights(targets: np.ndarray) -> np.ndarray:
    """Per-sample weights ``n / (classes * count)`` over the classes present.

    Every present class then carries the same total weight and the weights
    still sum to ``n``; a group with a single class gets all ones.
    """
    if not len(targets):
        return np.ones(0)
    _, inverse, counts = np.unique(targets, return_inverse=True, return_counts=True)
    return (len(targets) / (len(counts) * counts))[inverse]


def _action_targets(kind: ElementKind, texts: Sequence[str], label_texts: Sequence[str]) -> List[int]:
    """Drop/keep/duplicate per input element, consuming label occurrences in order."""
    remaining = Counter(label_texts)
    targets = []
    for text in texts:
        available = remaining[text]
        if available >= 2 and kind is ElementKind.KEYWORD:
            targets.append(DUPLICATE)
            remaining[text] -= 2
        elif available >= 1:
            targets.append(KEEP)
            remaining[text] -= 1
        else:
            targets.append(DROP)
    return targets


def build_sl_data(examples: Sequence[SlExample], balance_classes: bool = True) -> SlData:
    """Turn (variant, best label) pairs into per-decision targets.

    With ``balance_classes`` every decision group (one gate and one action
    group per section kind, plus the additions) weighs its target classes
    equally, so a class that labels choose less often than the others is still
    learned where the features separate it.
    """
    gate: Dict[ElementKind, Tuple[list, list]] = {kind: ([], []) for kind in SECTION_KINDS}
    action: Dict[ElementKind, Tuple[list, list]] = {kind: ([], []) for kind in SECTION_KINDS}
    order: Dict[ElementKind, list] = {kind: [] for kind in SECTION_KINDS}
    add_x: list = []
    add_t: list = []

    for example in examples:
        prompt = example.input
        ctx = FeatureContext.from_prompt(prompt)
        for kind in SECTION_KINDS:
            texts = prompt.texts(kind)
            if not texts:
                continue
            label_texts = example.label.texts(kind)
            features = [featurize(t, ctx, i, len(texts)) for i, t in enumerate(texts)]
            gate[kind][0].append(np.mean(features, axis=0))
            gate[kind][1].append(1.0 if not label_texts else 0.0)
            if not label_texts:
                continue

            targets = _action_targets(kind, texts, label_texts)
            action[kind][0].extend(features)
            action[kind][1].extend(targets)

            if kind is ElementKind.SUMMARY_SENTENCE:
                continue
            first_seen = {}
            for position, text in enumerate(label_texts):
                first_seen.setdefault(text, position)
            kept = [
                (first_seen[text], x)
                for text, x, target in zip(texts, features, targets)
                if target != DROP
            ]
            for i, (pos_i, x_i) in enumerate(kept):
                for pos_j, x_j in kept[i + 1:]:
                    if pos_i < pos_j:
                        order[kind].append(x_i - x_j)
                    elif pos_j < pos_i:
                        order[kind].append(x_j - x_i)

        label_keywords = set(example.label.texts(ElementKind.KEYWORD))
        pool = candidate_pool(prompt)
        for index, token in enumerate(pool):
            add_x.append(featurize(token, ctx, index, len(pool)))
            add_t.append(1.0 if token in label_keywords else 0.0)

    def stack(rows):
        return np.array(rows, dtype=float).reshape(-1, NUM_FEATURES)

    def group(x, t, dtype=float):
        t = np.array(t, dtype=dtype)
        return stack(x), t, class_weights(t) if balance_classes else np.ones(len(t))

    data = SlData(
        gate={k: group(x, t) for k, (x, t) in gate.items()},
        action={k: group(x, t, int) for k, (x, t) in action.items()},
        order={k: stack(rows) for k, rows in order.items()},
        add=group(add_x, add_t),
        counts={},
    )
    data.counts.update(
        gate=sum(len(t) for _, t, _ in data.gate.values()),
        action=sum(len(t) for _, t, _ in data.action.values()),
        order=sum(len(d) for d in data.order.values()),
        add=len(add_t),
    )
    return data


def _logistic(x: np.ndarray, t: np.ndarray, s: np.ndarray, w: np.ndarray) -> Tuple[float, np.ndarray]:
    """Weighted summed binary cross-entropy and its gradient."""
    if not len(t):
        return 0.0, np.zeros_like(w)
    z = x @ w
    loss = -float(np.sum(s * (t * log_expit(z) + (1 - t) * log_expit(-z))))
    return loss, x.T @ (s * (expit(z) - t))


def sl_loss(theta: np.ndarray, data: SlData) -> Tuple[float, np.ndarray]:
    """Sum over decision groups (gate, action, order, add) of the group mean loss.

    The order term is the pairwise hinge ``max(0, 1 - margin)``; its gradient
    is the subgradient that is zero at and beyond margin 1.
    """
    grad = np.zeros_like(theta)
    totals = {"gate": 0.0, "action": 0.0, "order": 0.0, "add": 0.0}
    parts: Dict[str, List[Tuple[slice, np.ndarray]]] = {name: [] for name in totals}

    for kind in SECTION_KINDS:
        x, t, s = data.gate[kind]
        loss, g = _logistic(x, t, s, theta[gate_slice(kind)])
        totals["gate"] += loss
        parts["gate"].append((gate_slice(kind), g))

        x, t, s = data.action[kind]
        if len(t):
            n = num_actions(kind)
            weights = theta[action_slice(kind)].reshape(NUM_ACTIONS, NUM_FEATURES)[:n]
            logits = x @ weights.T
            rows = np.arange(len(t))
            totals["action"] += float(np.sum(s * (logsumexp(logits, axis=1) - logits[rows, t])))
            residual = softmax(logits, axis=1)
            residual[rows, t] -= 1.0
            block = np.zeros((NUM_ACTIONS, NUM_FEATURES))
            block[:n] = (s[:, None] * residual).T @ x
            parts["action"].append((action_slice(kind), block.ravel()))

        d = data.order[kind]
        if len(d):
            slack = 1.0 - d @ theta[order_slice(kind)]
            active = slack > 0
            totals["order"] += float(np.sum(slack[active]))
            parts["order"].append((order_slice(kind), -d[active].sum(axis=0)))

    x, t, s = data.add
    loss, g = _logistic(x, t, s, theta[ADD_SLICE])
    totals["add"] += loss
    parts["add"].append((ADD_SLICE, g))

    total = 0.0
    for name, value in totals.items():
        count = data.counts[name]
        if not count:
            continue
        total += value / count
        for where, g in parts[name]:
            grad[where] += g / count
    return total, grad


def sl_fit(
    params: PolicyParams,
    examples: Sequence[SlExample],
    epochs: int = 300,
    learning_rate: float = 0.2,
    loss_log: Optional[List[float]] = None,
    balance_classes: bool = True,
) -> PolicyParams:
    """Fit the policy to best-prompt labels by full-batch gradient descent.

    A step that would raise the loss is halved until it does not, at most
    ``MAX_STEP_HALVINGS`` times, and skipped otherwise.

    Args:
        params: Starting weights.
        examples: SL examples; must not be empty.
        epochs: Gradient steps.
        learning_rate: Initial step size of every epoch.
        loss_log: When given, the loss before each step is appended to it.
        balance_classes: Weigh the target classes of every decision group
            equally, see :func:`build_sl_data`.

    Returns:
        PolicyParams: Fitted weights; baseline fields are carried over.
    """
    if not examples:
        raise ValueError("sl_fit needs at least one example")
    data = build_sl_data(examples, balance_classes)
    theta = params.theta.copy()
    loss, grad = sl_loss(theta, data)
    for epoch in range(epochs):
        if loss_log is not None:
            loss_log.append(loss)
        if not (np.all(np.isfinite(grad)) and math.isfinite(loss)):
            raise NonFiniteGradientError()
        step = learning_rate
        for _ in range(MAX_STEP_HALVINGS + 1):
            candidate = theta - step * grad
            candidate_loss, candidate_grad = sl_loss(candidate, data)
            if candidate_loss <= loss:
                theta, loss, grad = candidate, candidate_loss, candidate_grad
                break
            step /= 2
        if epoch % 50 == 0:
            LOG.debug("sl epoch %d loss %.6f", epoch, loss)
    LOG.info("sl fit finished after %d epoch(s), loss %.6f", epochs, loss)
    return params.replace(theta=theta)


# --------------------------------------------------------------------------
# PPO
# --------------------------------------------------------------------------


def whiten(advantages: np.ndarray) -> np.ndarray:
    return (advantages - advantages.mean()) / (advantages.std() + ADVANTAGE_EPS)


def surrogate_objective(
    theta: np.ndarray,
    trajectories: Sequence[Trajectory],
    advantages: Sequence[float],
    clip_epsilon: float,
    entropy_coef: float,
) -> Tuple[float, np.ndarray, float, float]:
    """Clipped surrogate plus entropy bonus, averaged over episodes.

    Old log-probabilities are the ones recorded in the trajectories. A decision
    contributes gradient only when the unclipped branch of the min is active.
    A ratio past ``exp(MAX_LOG_RATIO)`` is taken as infinite, so with a negative
    advantage the objective turns non-finite.

    Returns:
        Tuple: objective value, its gradient, mean episode entropy, and the
        mean per-decision approximate KL (old minus new log-probability).
    """
    value = 0.0
    entropy_total = 0.0
    kl_total = 0.0
    num_decisions = 0
    grad = np.zeros_like(theta)
    for trajectory, advantage in zip(trajectories, advantages):
        for decision in trajectory.decisions:
            new_log_prob = decision_log_prob(theta, decision)
            log_ratio = new_log_prob - decision.log_prob
            ratio = math.exp(log_ratio) if log_ratio <= MAX_LOG_RATIO else math.inf
            clipped = min(max(ratio, 1.0 - clip_epsilon), 1.0 + clip_epsilon)
            unclipped_term = ratio * advantage
            clipped_term = clipped * advantage
            grad_logp, entropy, grad_entropy = decision_grad(theta, decision)
            if unclipped_term <= clipped_term:
                value += unclipped_term
                grad += unclipped_term * grad_logp
            else:
                value += clipped_term
            value += entropy_coef * entropy
            grad += entropy_coef * grad_entropy
            entropy_total += entropy
            kl_total += decision.log_prob - new_log_prob
            num_decisions += 1
    episodes = max(len(trajectories), 1)
    return (
        value / episodes,
        grad / episodes,
        entropy_total / episodes,
        kl_total / num_decisions if num_decisions else 0.0,
    )


def ppo_update(
    params: PolicyParams,
    batch: Sequence[Tuple[Trajectory, float]],
    cfg: RlConfig,
) -> Tuple[PolicyParams, PpoStats]:
    """One PPO update on a batch of (trajectory, reward) episodes.

    Advantages are ``reward - baseline`` whitened per batch. After
    ``ppo_epochs`` full-batch ascent steps the baseline moves toward the batch
    mean reward. A non-finite gradient aborts the update and returns ``params``
    unchanged with ``stats.aborted`` set.
    """
    if not batch:
        raise ValueError("ppo_update needs a nonempty batch")
    trajectories = [trajectory for trajectory, _ in batch]
    rewards = np.array([reward for _, reward in batch], dtype=float)
    advantages = whiten(rewards - params.baseline)

    theta = params.theta.copy()
    try:
        for _ in range(cfg.ppo_epochs):
            value, grad, _, _ = surrogate_objective(
                theta, trajectories, advantages, cfg.clip_epsilon, cfg.entropy_coef
            )
            if not (np.all(np.isfinite(grad)) and math.isfinite(value)):
                raise NonFiniteGradientError()
            theta = theta + cfg.learning_rate * grad
        value, _, entropy, kl = surrogate_objective(
            theta, trajectories, advantages, cfg.clip_epsilon, cfg.entropy_coef
        )
        if not np.all(np.isfinite(theta)):
            raise NonFiniteGradientError()
    except NonFiniteGradientError as e:
        LOG.warning("ppo update aborted: %s", e)
        return params, PpoStats(aborted=True)

    stats = PpoStats(objective=value, loss=-value, kl=kl, entropy=entropy)
    baseline = params.baseline_decay * params.baseline + (1 - params.baseline_decay) * float(rewards.mean())
    return params.replace(theta=theta, baseline=baseline), stats


# --------------------------------------------------------------------------
# RL loop
# --------------------------------------------------------------------------


def reward_of(generated: str, ground_truth: str) -> float:
    """Smoothed sentence BLEU scaled to [0, 1]."""
    return bleu(tokenize(generated), tokenize(ground_truth), mode=BleuMode.SMOOTHED) / 100.0


def evaluate_policy(params: PolicyParams, tasks: Sequence[PromptedTask], generator) -> float:
    """Mean Greedy-mode reward over ``tasks``; failed generations are skipped."""
    if not tasks:
        return 0.0
    prompts = [render(policy_rewrite(t.rewrite_input(), params, RewriteMode.GREEDY)[0]) for t in tasks]
    results = generator.generate_many(prompts, return_exceptions=True)
    rewards = [
        reward_of(result.output, task.ground_truth)
        for task, result in zip(tasks, results)
        if not isinstance(result, Exception)
    ]
    return float(np.mean(rewards)) if rewards else 0.0


def rl_train(
    params: PolicyParams,
    tasks: Sequence[PromptedTask],
    generator,
    cfg: RlConfig,
    validation: Sequence[PromptedTask] = (),
) -> Tuple[PolicyParams, List[TrainingLogRow]]:
    """Train the policy with PPO on generation reward.

    Each batch samples ``batch_episodes`` train tasks uniformly, rewrites them
    in Sample mode, generates, and updates. Episodes whose generation fails are
    skipped; budget exhaustion ends training after the current batch.
    """
    log: List[TrainingLogRow] = []
    if cfg.max_episodes == 0:
        return params, log
    if not tasks:
        raise ValueError("rl_train needs at least one training task")

    rng = np.random.default_rng(cfg.seed)
    num_batches = math.ceil(cfg.max_episodes / cfg.batch_episodes)
    for batch_index in range(num_batches):
        size = min(cfg.batch_episodes, cfg.max_episodes - batch_index * cfg.batch_episodes)
        picks = rng.integers(0, len(tasks), size=size)
        episodes = []
        for pick in picks:
            task = tasks[int(pick)]
            rewritten, trajectory = policy_rewrite(task.rewrite_input(), params, RewriteMode.SAMPLE, rng)
            episodes.append((task, rewritten, trajectory))

        results = generator.generate_many([render(p) for _, p, _ in episodes], return_exceptions=True)
        batch = []
        exhausted = False
        for (task, _, trajectory), result in zip(episodes, results):
            if isinstance(result, Exception):
                exhausted = exhausted or isinstance(result, BudgetExhaustedError)
                LOG.warning("skipping episode for task %s: %s", task.task_id, result)
                continue
            batch.append((trajectory, reward_of(result.output, task.ground_truth)))

        stats = PpoStats()
        mean_reward = float(np.mean([r for _, r in batch])) if batch else 0.0
        if batch:
            params, stats = ppo_update(params, batch, cfg)

        val_reward = None
        if validation and (batch_index + 1) % cfg.eval_every == 0 and not exhausted:
            val_reward = evaluate_policy(params, validation, generator)

        log.append(
            TrainingLogRow(
                batch=batch_index,
                mean_reward=mean_reward,
                loss=stats.loss,
                kl=stats.kl,
                entropy=stats.entropy,
                val_reward=val_reward,
            )
        )
        LOG.info(
            "batch %d/%d: mean reward %.4f over %d episode(s)",
            batch_index + 1, num_batches, mean_reward, len(batch),
        )
        if exhausted:
            LOG.warning("generator budget exhausted, stopping after batch %d", batch_index)
            break
    return params, log


def write_training_log(rows: Sequence[TrainingLogRow], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(LOG_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row.batch,
                    f"{row.mean_reward:.6f}",
                    f"{row.loss:.6f}",
                    f"{row.kl:.6f}",
                    f"{row.entropy:.6f}",
                    "" if row.val_reward is None else f"{row.val_reward:.6f}",
                ]
            )
