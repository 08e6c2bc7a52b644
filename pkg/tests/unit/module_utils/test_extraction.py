# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

import pytest

from prompt_rewriter.module_utils.extraction import (
    cosine_tf,
    extract_summary_and_keywords,
    load_stopwords,
    rank_keywords,
    rank_sentences,
    split_sentences,
)


def test_stopwords_are_bundled():
    stopwords = load_stopwords()
    assert "the" in stopwords
    assert "battery" not in stopwords


def test_split_sentences_adds_missing_period():
    assert split_sentences("First one.  Second one!\nthird") == ["First one.", "Second one!", "third."]


def test_cosine_tf():
    assert cosine_tf(["a", "b"], ["a", "b"]) == pytest.approx(1.0)
    assert cosine_tf(["a"], ["b"]) == 0.0
    assert cosine_tf(["a", "a", "b"], ["a"]) == pytest.approx(2 / 5 ** 0.5)


def test_rank_sentences_orders_by_similarity_and_dedups():
    entries = ["The zoo was fun. Lions slept.", "Lions slept. Lions roared loudly."]
    ranked = rank_sentences("lions roared", entries)
    assert [s for s, _ in ranked] == ["Lions roared loudly.", "Lions slept.", "The zoo was fun."]


def test_rank_keywords_halves_tokens_missing_from_context():
    ranked = dict(rank_keywords("coffee", ["coffee beans and the beans"]))
    assert ranked == {"coffee": 1.0, "beans": 1.0}
    order = [t for t, _ in rank_keywords("coffee", ["coffee beans and the beans"])]
    assert order == ["coffee", "beans"]


def test_extract_respects_limits():
    summary, keywords = extract_summary_and_keywords(
        "lions", ["Lions slept. Lions roared loudly. The zoo was fun."], max_sentences=2, max_keywords=3
    )
    assert len(summary) == 2
    assert [k.text for k in keywords] == ["lions", "slept", "roared"]


def test_extract_without_entries():
    assert extract_summary_and_keywords("context", []) == ([], [])
