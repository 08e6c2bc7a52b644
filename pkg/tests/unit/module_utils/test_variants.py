# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

from collections import Counter

import numpy as np
import pytest

from prompt_rewriter.module_utils.exceptions import VariantGenerationError
from prompt_rewriter.module_utils.gateway import Generator, GeneratorConfig
from prompt_rewriter.module_utils.prompt_model import SECTION_KINDS, label_of, render, render_label
from prompt_rewriter.module_utils.variants import (
    label_task,
    read_sl_examples,
    sample_variants,
    select_best,
    task_seed,
    task_variants,
    write_sl_examples,
)
from tests.conftest import make_prompt, make_task


def test_four_elements_per_type_give_65_variants(rich_prompt):
    vset = sample_variants(rich_prompt, seed=7)
    assert len(vset.variants) == 65
    assert vset.variants[0] == rich_prompt
    assert len({render_label(label_of(v)) for v in vset.variants}) == 65


def test_sampling_is_seeded(rich_prompt):
    assert sample_variants(rich_prompt, seed=11) == sample_variants(rich_prompt, seed=11)


def test_variant_sections_are_truncated_permutations(rich_prompt):
    for variant in sample_variants(rich_prompt, seed=3).variants:
        for kind in SECTION_KINDS:
            original = rich_prompt.texts(kind)
            texts = variant.texts(kind)
            assert len(set(texts)) == len(texts)
            assert set(texts) <= set(original)
            assert len(texts) >= len(original) - len(original) // 2


def test_single_element_sections_have_no_variants():
    prompt = make_prompt(summary=("Only one.",), keywords=("solo",), style=("calm",))
    vset = sample_variants(prompt, seed=1)
    assert vset.variants == (prompt,)


def test_task_seed_depends_on_task_not_order():
    assert task_seed(5, "u1:a") == task_seed(5, "u1:a")
    assert task_seed(5, "u1:a") != task_seed(5, "u2:a")
    task = make_task("u1:a")
    assert task_variants(task, 5) == sample_variants(task.prompt, task_seed(5, "u1:a"))


def test_ties_keep_the_original(rich_prompt):
    generator = Generator(GeneratorConfig(), backend=lambda text: "same words")
    task = make_task(prompt=rich_prompt, ground_truth="same words")
    best, scored = select_best(task, sample_variants(rich_prompt, seed=2), generator)
    assert best.index == 0
    assert len({s.score for s in scored}) == 1


def test_best_is_earliest_maximum(rich_prompt, sim_generator):
    task = make_task(prompt=rich_prompt, ground_truth="our stay in lisbon epsilon alpha five is here .")
    best, scored = select_best(task, sample_variants(rich_prompt, seed=4), sim_generator)
    top = max(s.score for s in scored)
    assert best.score == top
    assert best.index == min(s.index for s in scored if s.score == top)


def test_failed_generation_reports_variant_index(rich_prompt):
    original = render(rich_prompt)

    def backend(text):
        if text != original:
            raise ValueError("backend down")
        return "fine"

    generator = Generator(GeneratorConfig(), backend=backend)
    with pytest.raises(VariantGenerationError) as exc:
        select_best(make_task(prompt=rich_prompt), sample_variants(rich_prompt, seed=2), generator)
    assert exc.value.index == 1


def test_label_task_emits_one_example_per_variant(rich_prompt, sim_generator):
    task = make_task(prompt=rich_prompt, ground_truth="our stay in lisbon beta gamma")
    examples, record = label_task(task, sim_generator, seed=9)
    assert len(examples) == record.variant_count == 65
    assert len({render_label(e.label) for e in examples}) == 1
    assert render_label(examples[0].label) == record.best_label
    assert record.best_score >= record.original_score


def test_sl_examples_file_filters_by_task(tmp_path, rich_prompt, sim_generator):
    first, _ = label_task(make_task("u1:a", prompt=rich_prompt), sim_generator, seed=1)
    second, _ = label_task(make_task("u2:b"), sim_generator, seed=1)
    path = tmp_path / "sl_examples.jsonl"
    assert write_sl_examples(first + second, path) == len(first) + len(second)
    loaded = read_sl_examples(path, task_ids={"u2:b"})
    assert len(loaded) == len(second)
    assert [e.label for e in loaded] == [e.label for e in second]


def random_sections(rng):
    sizes = rng.integers(0, 7, size=3)
    return dict(
        summary=tuple(f"Sentence number {i}." for i in range(sizes[0])),
        keywords=tuple(f"word{i}" for i in range(sizes[1])),
        style=tuple(f"style trait {i}" for i in range(sizes[2])),
    )


def test_variant_laws_hold_on_random_prompts():
    rng = np.random.default_rng(0)
    full = 0
    for seed in range(1000):
        prompt = make_prompt(**random_sections(rng))
        vset = sample_variants(prompt, seed=seed)
        assert vset.variants[0] == prompt
        assert len(vset.variants) <= 65
        assert len({render_label(label_of(v)) for v in vset.variants}) == len(vset.variants)
        if all(len(prompt.section(kind)) >= 4 for kind in SECTION_KINDS):
            full += 1
            assert len(vset.variants) == 65
        for variant in vset.variants:
            for kind in SECTION_KINDS:
                original = Counter(prompt.texts(kind))
                texts = variant.texts(kind)
                n = len(prompt.texts(kind))
                assert not Counter(texts) - original
                assert len(texts) >= n - n // 2
                if n <= 1:
                    assert texts == prompt.texts(kind)
        if seed % 100 == 0:
            assert sample_variants(prompt, seed=seed) == vset
    assert full > 0
