# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

import math

import pytest

from prompt_rewriter.module_utils.retrieval import BM25

DOCS = [["apple", "pie", "recipe"], ["bicycle", "chain"], ["apple", "orchard", "apple"]]


def test_idf_is_non_negative():
    bm25 = BM25(DOCS)
    assert bm25.idf["apple"] == pytest.approx(math.log((3 - 2 + 0.5) / (2 + 0.5) + 1.0))
    assert all(value > 0 for value in bm25.idf.values())


def test_single_term_score():
    bm25 = BM25(DOCS)
    avg = 8 / 3
    norm = 1.2 * (1 - 0.75 + 0.75 * 2 / avg)
    expected = bm25.idf["chain"] * 1 * 2.2 / (1 + norm)
    assert bm25.score(["chain"], 1) == pytest.approx(expected)


def test_unmatched_query_scores_zero():
    assert BM25(DOCS).scores(["zebra"]) == [0.0, 0.0, 0.0]


def test_term_frequency_raises_score():
    scores = BM25(DOCS).scores(["apple"])
    assert scores[2] > scores[0] > scores[1] == 0.0


def test_repeated_query_terms_count_twice():
    bm25 = BM25(DOCS)
    assert bm25.score(["pie", "pie"], 0) == pytest.approx(2 * bm25.score(["pie"], 0))


def test_empty_collection():
    assert BM25([]).scores(["apple"]) == []
