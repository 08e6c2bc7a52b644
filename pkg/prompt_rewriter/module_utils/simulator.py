# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""Deterministic stand-in for the document generator.

The output is a pure function of the prompt text:

1. tokens of the immediate context,
2. the tokens of every keyword, once per occurrence, in listed order,
3. the tokens of every summary sentence, in listed order,
4. the first sentence of each ranked entry, only when a style phrase contains
   the trigger token,

truncated to ``max_words`` tokens. Style-synthesis prompts get a canned reply.
Off-topic summary sentences and noise keywords therefore inject tokens the
reference does not have, and keyword order shows up in the n-gram matches.
"""

from typing import List

from pydantic import BaseModel, ConfigDict, Field

from prompt_rewriter.module_utils.extraction import split_sentences
from prompt_rewriter.module_utils.metrics import tokenize
from prompt_rewriter.module_utils.prompt_model import STYLE_INSTRUCTION, parse_prompt

DEFAULT_STYLE_REPLY = (
    "writes short direct sentences 2. keeps a friendly tone 3. mentions concrete details "
    "4. closes with a short summary"
)


class SimProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_words: int = Field(default=120, ge=1)
    style_trigger_token: str = "thorough"
    canned_style_reply: str = DEFAULT_STYLE_REPLY


def sim_generate(prompt_text: str, profile: SimProfile = SimProfile()) -> str:
    if prompt_text.startswith(STYLE_INSTRUCTION):
        return profile.canned_style_reply

    prompt = parse_prompt(prompt_text, lenient=True)
    tokens: List[str] = list(tokenize(prompt.immediate_context))
    for keyword in prompt.keywords:
        tokens.extend(tokenize(keyword.text))
    for sentence in prompt.summary:
        tokens.extend(tokenize(sentence.text))

    trigger = profile.style_trigger_token.lower()
    if any(trigger in tokenize(phrase.text) for phrase in prompt.style):
        for entry in prompt.ranked_entries:
            sentences = split_sentences(entry)
            if sentences:
                tokens.extend(tokenize(sentences[0]))

    return " ".join(tokens[: profile.max_words])
