# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

import pytest

from prompt_rewriter.module_utils.exceptions import MissingArtifactError
from prompt_rewriter.module_utils.gateway import Generator, GeneratorConfig
from prompt_rewriter.module_utils.harness import (
    AblationKind,
    MethodName,
    MethodSpec,
    ablation_methods,
    apply_mask,
    mask_label,
    method_for_key,
    read_summary_csv,
    rewrite_with,
    run_ablation,
    run_eval,
    summary_rows,
)
from prompt_rewriter.module_utils.policy import PolicyParams
from prompt_rewriter.module_utils.prompt_model import ElementKind
from tests.conftest import make_task

TASKS = [
    make_task("u1:a", ground_truth="our stay in lisbon hotel clean the hotel was clean ."),
    make_task("u2:b", ground_truth="our stay in lisbon staff were kind"),
    make_task("u3:c", ground_truth="a quiet street near the river"),
]


def test_mask_labels():
    assert mask_label(0) == "Original(none)"
    assert mask_label(0b010) == "Original(keywords)"
    assert mask_label(7) == "Original(summary,keywords,style)"


def test_apply_mask_keeps_selected_sections(prompt):
    masked = apply_mask(prompt, 0b101)
    assert masked.keywords == ()
    assert masked.summary == prompt.summary
    assert masked.style == prompt.style


def test_method_keys():
    assert method_for_key("rules").name is MethodName.RULE_REWRITER
    assert method_for_key("slrl", "policy.json").policy_path == "policy.json"
    with pytest.raises(ValueError):
        method_for_key("bogus")


def test_identical_methods_are_not_significant(sim_generator):
    methods = [
        MethodSpec(name=MethodName.ORIGINAL),
        MethodSpec(name=MethodName.ORIGINAL_VARIANT, mask=7, label="Full"),
    ]
    result = run_eval(methods, TASKS, sim_generator)
    assert result.reference == "Original"
    test = result.significance["Full"]["bleu"]
    assert test.p_two_sided == 1.0
    assert result.reports["Full"].aggregates == result.reports["Original"].aggregates


def test_missing_policy_fails_before_generation(tmp_path, fake_backend):
    generator = Generator(GeneratorConfig(), backend=fake_backend)
    methods = [MethodSpec(name=MethodName.ORIGINAL), method_for_key("sl", tmp_path / "nope.json")]
    with pytest.raises(MissingArtifactError):
        run_eval(methods, TASKS, generator)
    assert fake_backend.calls == []


def test_duplicate_labels_are_rejected(sim_generator):
    methods = [MethodSpec(name=MethodName.ORIGINAL), MethodSpec(name=MethodName.ORIGINAL)]
    with pytest.raises(ValueError):
        run_eval(methods, TASKS, sim_generator)


def test_element_ablation_hides_section_from_policy(tmp_path):
    path = tmp_path / "policy.json"
    PolicyParams.zeros().save(path)
    method = MethodSpec(
        name=MethodName.ELEMENT_ABLATION, policy_path=str(path), drop=(ElementKind.STYLE_PHRASE,)
    )
    policies = {str(path): PolicyParams.zeros()}
    task = make_task()
    rewritten = rewrite_with(method, task.rewrite_input(), policies)
    assert rewritten.style == ()
    assert rewritten.keywords == task.prompt.keywords


def test_presence_grid_has_eight_rows(tmp_path, sim_generator):
    assert len(ablation_methods(AblationKind.ORIGINAL_VARIANTS)) == 8
    result = run_ablation(AblationKind.ORIGINAL_VARIANTS, TASKS, sim_generator, out=tmp_path)
    assert len(result.reports) == 8
    best = max(r.aggregates["bleu"] for r in result.reports.values())
    assert result.reports[result.reference].aggregates["bleu"] == best
    assert result.reference not in result.significance

    rows = read_summary_csv(tmp_path / "summary.csv")
    assert [row["method"] for row in rows] == [mask_label(m) for m in range(8)]
    assert (tmp_path / "Original_none.csv").is_file()
    assert "reference: " + result.reference in (tmp_path / "summary.txt").read_text(encoding="utf-8")


def test_element_removal_rows(tmp_path):
    labels = [m.display for m in ablation_methods(AblationKind.ELEMENT_REMOVAL, "p.json")]
    assert labels == ["Original", "Rewriter(-summary)", "Rewriter(-keywords)", "Rewriter(-style)"]


def test_uniform_style_row_rewrites_style(sim_generator):
    result = run_ablation(AblationKind.UNIFORM_STYLE, TASKS, sim_generator)
    assert set(result.reports) == {"Original", "Original(uniform style)"}
    rows = summary_rows(result)
    assert rows[0]["p_bleu"] == ""
    assert rows[1]["p_bleu"] != ""


def test_single_task_skips_significance(sim_generator):
    result = run_eval([MethodSpec(name=MethodName.ORIGINAL)], TASKS[:1], sim_generator)
    assert result.significance == {}


def test_missing_summary_csv(tmp_path):
    with pytest.raises(MissingArtifactError):
        read_summary_csv(tmp_path / "summary.csv")
