# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

import numpy as np
import pytest

from prompt_rewriter.module_utils.exceptions import InformationFlowError
from prompt_rewriter.module_utils.policy import (
    ADD_SLICE,
    DUPLICATE,
    NUM_FEATURES,
    NUM_PARAMS,
    DecisionType,
    FeatureContext,
    PolicyParams,
    RewriteMode,
    action_slice,
    candidate_pool,
    decision_grad,
    decision_log_prob,
    featurize,
    gate_slice,
    order_slice,
    policy_rewrite,
    trajectory_log_prob,
)
from prompt_rewriter.module_utils.prompt_model import ElementKind
from tests.conftest import make_task


def rewrite(params, task=None, **kwargs):
    task = task or make_task()
    return policy_rewrite(task.rewrite_input(), params, **kwargs)


def with_weights(**updates):
    theta = np.zeros(NUM_PARAMS)
    for where, values in updates.values():
        theta[where] = values
    return PolicyParams(theta)


def test_zero_policy_is_identity_in_greedy_mode():
    task = make_task()
    rewritten, trajectory = rewrite(PolicyParams.zeros(), task)
    assert rewritten == task.prompt
    types = [d.type for d in trajectory.decisions]
    assert types.count(DecisionType.GATE) == 3
    assert types.count(DecisionType.ACTION) == 7
    assert types.count(DecisionType.ADD) == len(candidate_pool(task.prompt))
    assert trajectory.total_log_prob == pytest.approx(sum(d.log_prob for d in trajectory.decisions))


def test_featurize_builds_dense_features():
    ctx = FeatureContext("Hotel stay", ["hotel hotel clean"])
    x = featurize("hotel clean", ctx, 1, 4)
    assert x.shape == (NUM_FEATURES,)
    assert x == pytest.approx([1.0, 0.5, 0.25, 0.1, 0.75])
    assert featurize("", FeatureContext("", []), 0, 0) == pytest.approx([1.0, 0.0, 0.0, 0.0, 0.0])


def test_candidate_pool_prefers_context_tokens():
    assert candidate_pool(make_task().prompt) == [
        "stay",
        "lisbon",
        "great",
        "breakfast",
        "would",
        "return",
    ]
    assert len(candidate_pool(make_task().prompt, pool_size=3)) == 3


def test_gate_empties_a_section():
    gate = gate_slice(ElementKind.STYLE_PHRASE)
    params = with_weights(style=(slice(gate.start, gate.start + 1), 10.0))
    rewritten, _ = rewrite(params)
    assert rewritten.style == ()
    assert len(rewritten.summary) == 2


def test_duplicate_action_repeats_keywords():
    block = action_slice(ElementKind.KEYWORD)
    bias = block.start + DUPLICATE * NUM_FEATURES
    rewritten, _ = rewrite(with_weights(dup=(slice(bias, bias + 1), 5.0)))
    assert rewritten.texts(ElementKind.KEYWORD) == (
        "hotel", "hotel", "clean", "clean", "staff", "staff"
    )


def test_order_vector_sorts_keywords_but_not_summary():
    position = 2
    kw = order_slice(ElementKind.KEYWORD).start + position
    sm = order_slice(ElementKind.SUMMARY_SENTENCE).start + position
    task = make_task()
    params = with_weights(kw=(slice(kw, kw + 1), 1.0), sm=(slice(sm, sm + 1), 1.0))
    rewritten, _ = rewrite(params, task)
    assert rewritten.texts(ElementKind.KEYWORD) == ("staff", "clean", "hotel")
    assert rewritten.summary == task.prompt.summary


def test_add_gate_appends_pool_tokens():
    task = make_task()
    params = with_weights(add=(slice(ADD_SLICE.start, ADD_SLICE.start + 1), 10.0))
    rewritten, _ = rewrite(params, task)
    expected = task.prompt.texts(ElementKind.KEYWORD) + tuple(candidate_pool(task.prompt))
    assert rewritten.texts(ElementKind.KEYWORD) == expected


def test_sample_mode_is_seeded_and_log_probs_recompute():
    params = PolicyParams.random(seed=0, scale=0.8)
    first, trajectory = rewrite(params, mode=RewriteMode.SAMPLE, rng=np.random.default_rng(4))
    again, _ = rewrite(params, mode=RewriteMode.SAMPLE, rng=np.random.default_rng(4))
    assert first == again
    assert trajectory_log_prob(params.theta, trajectory) == pytest.approx(trajectory.total_log_prob)


def test_sample_mode_needs_rng():
    with pytest.raises(ValueError):
        rewrite(PolicyParams.zeros(), mode=RewriteMode.SAMPLE)


def test_rewrite_refuses_task_with_ground_truth():
    with pytest.raises(InformationFlowError):
        policy_rewrite(make_task(), PolicyParams.zeros())


def test_decision_grad_matches_finite_differences():
    _, trajectory = rewrite(PolicyParams.zeros())
    params = PolicyParams.random(seed=1, scale=0.5)
    eps = 1e-6
    checked = set()
    for decision in trajectory.decisions:
        if decision.type in checked:
            continue
        checked.add(decision.type)
        grad, entropy, grad_entropy = decision_grad(params.theta, decision)
        numeric = np.zeros(NUM_PARAMS)
        numeric_entropy = np.zeros(NUM_PARAMS)
        for i in range(NUM_PARAMS):
            up, down = params.theta.copy(), params.theta.copy()
            up[i] += eps
            down[i] -= eps
            numeric[i] = (decision_log_prob(up, decision) - decision_log_prob(down, decision)) / (2 * eps)
            numeric_entropy[i] = (decision_grad(up, decision)[1] - decision_grad(down, decision)[1]) / (
                2 * eps
            )
        assert grad == pytest.approx(numeric, abs=1e-6)
        assert grad_entropy == pytest.approx(numeric_entropy, abs=1e-6)
        assert entropy > 0
    assert checked == {DecisionType.GATE, DecisionType.ACTION, DecisionType.ADD}


def test_params_save_and_load(tmp_path):
    params = PolicyParams.random(seed=3).replace(baseline=0.25)
    path = tmp_path / "policy.json"
    params.save(path)
    loaded = PolicyParams.load(path)
    assert np.array_equal(loaded.theta, params.theta)
    assert loaded.baseline == 0.25
    assert loaded.baseline_decay == params.baseline_decay


def test_params_validation():
    with pytest.raises(ValueError):
        PolicyParams(np.zeros(3))
    theta = np.zeros(NUM_PARAMS)
    theta[0] = np.nan
    with pytest.raises(ValueError):
        PolicyParams(theta)
    with pytest.raises(ValueError):
        PolicyParams.from_dict({"version": 99, "theta": [], "baseline": 0, "baseline_decay": 0.9})
