# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

from prompt_rewriter.module_utils.prompt_model import STYLE_INSTRUCTION, Element, render
from prompt_rewriter.module_utils.simulator import DEFAULT_STYLE_REPLY, SimProfile, sim_generate
from tests.conftest import make_prompt


def test_context_then_keywords_then_summary():
    prompt = make_prompt(summary=("Nice view.",), keywords=("hotel", "clean"), style=("calm",))
    assert sim_generate(render(prompt)) == "our stay in lisbon hotel clean nice view ."


def test_keyword_order_is_kept():
    prompt = make_prompt(summary=(), keywords=("clean", "hotel"), style=())
    assert sim_generate(render(prompt)).endswith("clean hotel")


def test_trigger_phrase_adds_first_entry_sentence():
    plain = make_prompt(summary=(), keywords=(), style=("calm",))
    triggered = plain.with_sections(style=(Element.style("the author is thorough"),))
    assert sim_generate(render(plain)) == "our stay in lisbon"
    assert sim_generate(render(triggered)) == "our stay in lisbon great breakfast ."


def test_output_is_truncated():
    profile = SimProfile(max_words=3)
    assert sim_generate(render(make_prompt()), profile) == "our stay in"


def test_style_prompt_gets_canned_reply():
    assert sim_generate(STYLE_INSTRUCTION + "\nsome text\n1.") == DEFAULT_STYLE_REPLY
    custom = SimProfile(canned_style_reply="1. terse")
    assert sim_generate(STYLE_INSTRUCTION, custom) == "1. terse"


def test_output_depends_on_prompt_only():
    text = render(make_prompt())
    assert sim_generate(text) == sim_generate(text)


def test_unknown_lines_do_not_reach_the_output():
    prompt = make_prompt(summary=("Nice view.",), keywords=("hotel", "clean"), style=())
    lines = render(prompt).split("\n")
    lines.insert(2, "Notes: stray words")
    assert sim_generate("\n".join(lines)) == sim_generate(render(prompt))
