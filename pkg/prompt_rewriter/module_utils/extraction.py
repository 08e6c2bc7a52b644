# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""Extractive summary and keyword sections built from ranked entries."""

import math
import re
from collections import Counter
from functools import lru_cache
from importlib import resources
from typing import FrozenSet, List, Sequence, Tuple

from prompt_rewriter.module_utils.metrics import tokenize
from prompt_rewriter.module_utils.prompt_model import Element

_SENTENCE_BREAK = re.compile(r"(?<=[.!?])\s+")
_WHITESPACE = re.compile(r"\s+")


@lru_cache(maxsize=1)
def load_stopwords() -> FrozenSet[str]:
    """The bundled English stopword list, one token per line."""
    text = resources.files("prompt_rewriter").joinpath("data/stopwords.txt").read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def normalize_whitespace(text: str) -> str:
    return _WHITESPACE.sub(" ", text).strip()


def split_sentences(text: str) -> List[str]:
    """Split on terminal punctuation; a missing final terminator gets a period."""
    sentences = []
    for piece in _SENTENCE_BREAK.split(normalize_whitespace(text)):
        piece = piece.strip()
        if not piece:
            continue
        if piece[-1] not in ".!?":
            piece += "."
        sentences.append(piece)
    return sentences


def is_content_token(token: str, stopwords: FrozenSet[str]) -> bool:
    return token.isalnum() and token not in stopwords


def cosine_tf(a: Sequence[str], b: Sequence[str]) -> float:
    """Cosine similarity of raw term-frequency vectors."""
    va, vb = Counter(a), Counter(b)
    dot = sum(count * vb[token] for token, count in va.items())
    if dot == 0:
        return 0.0
    norm = math.sqrt(sum(c * c for c in va.values())) * math.sqrt(sum(c * c for c in vb.values()))
    return min(dot / norm, 1.0)


def rank_sentences(context: str, entries: Sequence[str]) -> List[Tuple[str, float]]:
    """Entry sentences with their similarity to ``context``, best first.

    Duplicate sentences keep their first occurrence; ties keep entry order.
    """
    context_tokens = tokenize(context)
    seen = set()
    scored = []
    for entry in entries:
        for sentence in split_sentences(entry):
            if sentence in seen:
                continue
            seen.add(sentence)
            scored.append((sentence, cosine_tf(tokenize(sentence), context_tokens)))
    order = sorted(range(len(scored)), key=lambda i: (-scored[i][1], i))
    return [scored[i] for i in order]


def rank_keywords(context: str, entries: Sequence[str]) -> List[Tuple[str, float]]:
    """Entry tokens scored by frequency, halved when absent from ``context``."""
    stopwords = load_stopwords()
    context_tokens = set(tokenize(context))
    counts: Counter = Counter()
    first_seen = {}
    for entry in entries:
        for token in tokenize(entry):
            if not is_content_token(token, stopwords):
                continue
            counts[token] += 1
            first_seen.setdefault(token, len(first_seen))

    scored = [
        (token, count * (1.0 if token in context_tokens else 0.5))
        for token, count in counts.items()
    ]
    scored.sort(key=lambda pair: (-pair[1], first_seen[pair[0]]))
    return scored


def extract_summary_and_keywords(
    immediate_context: str,
    entries: Sequence[str],
    max_sentences: int = 6,
    max_keywords: int = 28,
) -> Tuple[List[Element], List[Element]]:
    """Pick summary sentences and keywords for an original prompt.

    Args:
        immediate_context: The task's immediate context (the query).
        entries: Ranked history entries.
        max_sentences: Summary size limit.
        max_keywords: Keyword synthesis size limit.

    Returns:
        Tuple[List[Element], List[Element]]: Summary sentences and keywords.
    """
    if not entries:
        return [], []
    sentences = [
        Element.sentence(text) for text, _ in rank_sentences(immediate_context, entries)[:max_sentences]
    ]
    keywords = [
        Element.keyword(token) for token, _ in rank_keywords(immediate_context, entries)[:max_keywords]
    ]
    return sentences, keywords
