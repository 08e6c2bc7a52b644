# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""Synthetic corpora whose reward structure under the simulator is known.

Every user's most recent document is::

    <start segment> <relevant keywords in canonical order>. <relevant sentences>

The start segment is exactly ``context_budget_tokens`` words, so it is the
immediate context. The document carries precomputed prompt sections in its
extras: keywords mix relevant and noise keywords, the summary mixes relevant
and noise sentences, and style phrases mention the trigger token with
probability ``style_mix``. Earlier documents mention the user's relevant
keywords, so author frequency separates them from noise keywords.
"""

import itertools
from pathlib import Path
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from prompt_rewriter.module_utils.corpus import Domain, HistoryDoc, UserHistory, write_histories
from prompt_rewriter.module_utils.extraction import load_stopwords

_CONSONANTS = "bdfgklmnprstvz"
_VOWELS = "aeiou"
_SYLLABLES = [c + v for c, v in itertools.product(_CONSONANTS, _VOWELS)]

BASE_TIMESTAMP = 1_600_000_000.0
DAY = 86_400.0
HISTORY_FILLER_WORDS = 8
HISTORY_KEYWORDS = 3
STYLE_WORDS = 3
RELEVANT_SENTENCE_WORDS = 8


class SyntheticSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int = 0
    num_users: int = Field(default=200, ge=1)
    docs_per_user: int = Field(default=4, ge=2)
    relevant_keywords_per_task: int = Field(default=6, ge=0)
    noise_keywords_per_task: int = Field(default=4, ge=0)
    relevant_sentences: int = Field(default=0, ge=0)
    noise_sentences: int = Field(default=4, ge=0)
    noise_sentence_words: int = Field(default=12, ge=1)
    style_phrases: int = Field(default=4, ge=0)
    style_mix: float = Field(default=0.0, ge=0.0, le=1.0)
    shuffle_sections: bool = True
    domain: Domain = Domain.REVIEW
    context_budget_tokens: int = Field(default=30, ge=1)
    style_trigger_token: str = "thorough"
    vocabulary_size: int = Field(default=3000, ge=100)

    @model_validator(mode="after")
    def _check(self) -> "SyntheticSpec":
        if self.domain is Domain.EMAIL and self.relevant_sentences < 1:
            raise ValueError("Email corpora need relevant_sentences >= 1 to yield qualified documents")
        if self.task_word_count() > self.vocabulary_size:
            raise ValueError("vocabulary_size is too small for the requested task size")
        return self

    def task_word_count(self) -> int:
        return (
            self.context_budget_tokens
            + self.relevant_keywords_per_task
            + self.noise_keywords_per_task
            + self.relevant_sentences * RELEVANT_SENTENCE_WORDS
            + self.noise_sentences * self.noise_sentence_words
            + self.style_phrases * STYLE_WORDS
        )


def vocabulary(size: int, rng: np.random.Generator) -> List[str]:
    """``size`` distinct three-syllable words, none of them a stopword."""
    stopwords = load_stopwords()
    space = len(_SYLLABLES) ** 3
    words = []
    for index in rng.choice(space, size=size * 2, replace=False):
        a, rest = divmod(int(index), len(_SYLLABLES) ** 2)
        b, c = divmod(rest, len(_SYLLABLES))
        word = _SYLLABLES[a] + _SYLLABLES[b] + _SYLLABLES[c]
        if word not in stopwords:
            words.append(word)
        if len(words) == size:
            break
    return words


def _sentence(words) -> str:
    return " ".join(words) + "."


def _take(words: List[str], start: int, count: int):
    return words[start:start + count], start + count


def _user(spec: SyntheticSpec, index: int, vocab: List[str], rng: np.random.Generator) -> UserHistory:
    user_id = f"u{index:04d}"
    picks = [vocab[int(i)] for i in rng.choice(len(vocab), size=spec.task_word_count(), replace=False)]

    cursor = 0
    start, cursor = _take(picks, cursor, spec.context_budget_tokens)
    relevant_kw, cursor = _take(picks, cursor, spec.relevant_keywords_per_task)
    noise_kw, cursor = _take(picks, cursor, spec.noise_keywords_per_task)
    relevant_sentences = []
    for _ in range(spec.relevant_sentences):
        words, cursor = _take(picks, cursor, RELEVANT_SENTENCE_WORDS)
        relevant_sentences.append(_sentence(words))
    noise_sentences = []
    for _ in range(spec.noise_sentences):
        words, cursor = _take(picks, cursor, spec.noise_sentence_words)
        noise_sentences.append(_sentence(words))
    style = []
    for _ in range(spec.style_phrases):
        words, cursor = _take(picks, cursor, STYLE_WORDS)
        if rng.random() < spec.style_mix:
            words = ["is", spec.style_trigger_token] + words[1:]
        style.append(" ".join(words))

    keywords = relevant_kw + noise_kw
    summary = relevant_sentences + noise_sentences
    if spec.shuffle_sections:
        keywords = [keywords[int(i)] for i in rng.permutation(len(keywords))]
        summary = [summary[int(i)] for i in rng.permutation(len(summary))]

    docs = []
    for j in range(spec.docs_per_user - 1):
        filler = [vocab[int(i)] for i in rng.choice(len(vocab), size=HISTORY_FILLER_WORDS, replace=False)]
        mentioned = (
            [relevant_kw[int(i)] for i in rng.choice(len(relevant_kw), size=min(HISTORY_KEYWORDS, len(relevant_kw)), replace=False)]
            if relevant_kw
            else []
        )
        words = filler + mentioned
        words = [words[int(i)] for i in rng.permutation(len(words))]
        docs.append(
            HistoryDoc(
                doc_id=f"{user_id}-d{j}",
                timestamp=BASE_TIMESTAMP + index * 10 * DAY + j * DAY,
                title="",
                body=_sentence(words),
            )
        )

    body = " ".join(start)
    if relevant_kw:
        body += " " + " ".join(relevant_kw)
    body += "."
    if relevant_sentences:
        body += " " + " ".join(relevant_sentences)
    last = spec.docs_per_user - 1
    docs.append(
        HistoryDoc(
            doc_id=f"{user_id}-d{last}",
            timestamp=BASE_TIMESTAMP + index * 10 * DAY + last * DAY,
            title="",
            body=body,
            extras={"summary": summary, "keywords": keywords, "style": style},
        )
    )
    return UserHistory(user_id=user_id, docs=tuple(docs))


def build_synthetic_corpus(spec: SyntheticSpec) -> List[UserHistory]:
    """Deterministic per seed."""
    rng = np.random.default_rng(spec.seed)
    vocab = vocabulary(spec.vocabulary_size, rng)
    return [_user(spec, index, vocab, rng) for index in range(spec.num_users)]


def write_synthetic_corpus(spec: SyntheticSpec, path: Path) -> List[UserHistory]:
    histories = build_synthetic_corpus(spec)
    write_histories(histories, path)
    return histories
