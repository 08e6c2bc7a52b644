# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

import pytest

from prompt_rewriter.module_utils.corpus import Domain, RewriteInput
from prompt_rewriter.module_utils.exceptions import InformationFlowError
from prompt_rewriter.module_utils.prompt_model import Element, ElementKind
from prompt_rewriter.module_utils.rules import (
    UNIFORM_STYLE_PHRASE,
    Rule,
    RuleSet,
    reorder_by_appearance,
    repeat_top_keywords,
    rule_rewrite,
)
from tests.conftest import make_prompt, make_task

CONTEXT = "The hotel staff were lovely"


@pytest.fixture
def hotel_prompt():
    return make_prompt(
        context=CONTEXT,
        keywords=("clean", "staff", "hotel"),
        style=("loves hotel bars", "writes calmly"),
        entries=("Clean rooms and a hotel bar.",),
    )


def rewrite_input(prompt, domain):
    return RewriteInput(task_id="u1:d1", domain=domain, prompt=prompt)


def keywords(prompt):
    return prompt.texts(ElementKind.KEYWORD)


def test_review_preset(hotel_prompt):
    rewritten = rule_rewrite(rewrite_input(hotel_prompt, Domain.REVIEW))
    assert rewritten.summary == ()
    assert keywords(rewritten) == ("hotel", "hotel", "staff", "staff")
    assert rewritten.style == ()
    assert rewritten.immediate_context == CONTEXT
    assert rewritten.ranked_entries == hotel_prompt.ranked_entries


def test_email_preset_uses_uniform_style(hotel_prompt):
    rewritten = rule_rewrite(rewrite_input(hotel_prompt, Domain.EMAIL))
    assert rewritten.texts(ElementKind.STYLE_PHRASE) == (UNIFORM_STYLE_PHRASE,)


def test_social_preset_keeps_phrases_about_interests(hotel_prompt):
    rewritten = rule_rewrite(rewrite_input(hotel_prompt, Domain.SOCIAL))
    assert rewritten.texts(ElementKind.STYLE_PHRASE) == ("loves hotel bars",)


def test_empty_ruleset_changes_nothing(hotel_prompt):
    assert rule_rewrite(rewrite_input(hotel_prompt, Domain.REVIEW), RuleSet()) == hotel_prompt


def test_filter_threshold_is_configurable(hotel_prompt):
    ruleset = RuleSet(rules=frozenset({Rule.FILTER_KEYWORDS}), relevance_threshold=0.0)
    assert keywords(rule_rewrite(rewrite_input(hotel_prompt, Domain.REVIEW), ruleset)) == (
        "clean",
        "staff",
        "hotel",
    )


def test_reorder_by_appearance_puts_unseen_last(hotel_prompt):
    words = [Element.keyword(k) for k in ("zebra", "hotel bar", "staff")]
    assert [k.text for k in reorder_by_appearance(words, hotel_prompt)] == ["staff", "hotel bar", "zebra"]


def test_repeat_top_keywords():
    words = [Element.keyword(k) for k in ("a", "b", "c")]
    assert [k.text for k in repeat_top_keywords(words, ["c", "c", "b"], 1)] == ["a", "b", "c", "c"]
    assert repeat_top_keywords(words, ["c"], 0) == words


def test_rules_refuse_tasks_with_ground_truth():
    with pytest.raises(InformationFlowError):
        rule_rewrite(make_task())
