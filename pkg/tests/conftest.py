# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

import logging

import pytest

from prompt_rewriter.module_utils.corpus import Domain, PromptedTask
from prompt_rewriter.module_utils.gateway import Generator, GeneratorConfig
from prompt_rewriter.module_utils.prompt_model import Element, PromptDoc
from prompt_rewriter.module_utils.simulator import SimProfile


@pytest.fixture(autouse=True)
def propagate_logs(monkeypatch):
    # the CLI detaches the package logger from the root logger that caplog reads
    monkeypatch.setattr(logging.getLogger("prompt_rewriter"), "propagate", True)


def make_prompt(
    summary=("The hotel was clean.", "Staff were kind."),
    keywords=("hotel", "clean", "staff"),
    style=("writes short sentences", "friendly tone"),
    context="Our stay in Lisbon",
    entries=("Great breakfast. Would return.",),
):
    return PromptDoc(
        immediate_context=context,
        summary=tuple(Element.sentence(s) for s in summary),
        keywords=tuple(Element.keyword(k) for k in keywords),
        style=tuple(Element.style(s) for s in style),
        ranked_entries=tuple(entries),
    )


def make_task(task_id="u1:d3", prompt=None, ground_truth="our stay in lisbon hotel clean", split="test"):
    return PromptedTask(
        task_id=task_id,
        user_id=task_id.split(":")[0],
        split=split,
        domain=Domain.REVIEW,
        prompt=prompt or make_prompt(),
        ground_truth=ground_truth,
    )


@pytest.fixture
def prompt():
    return make_prompt()


@pytest.fixture
def rich_prompt():
    """Four or more elements in every section."""
    return make_prompt(
        summary=("One is here.", "Two is here.", "Three is here.", "Four is here.", "Five is here."),
        keywords=("alpha", "beta", "gamma", "delta", "epsilon"),
        style=("calm", "direct", "warm", "precise"),
    )


@pytest.fixture
def sim_generator():
    return Generator(GeneratorConfig(), profile=SimProfile())


@pytest.fixture
def fake_backend():
    """Backend that echoes a fixed transform of the prompt and counts calls."""

    class EchoBackend:
        name = "echo"

        def __init__(self):
            self.calls = []

        def __call__(self, prompt_text):
            self.calls.append(prompt_text)
            return prompt_text.upper()

    return EchoBackend()
