# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""Method comparison, ablation grids and report output."""

import csv
import io
import logging
import re
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field
from rich.console import Console
from rich.table import Table

from prompt_rewriter.module_utils.corpus import PromptedTask, RewriteInput
from prompt_rewriter.module_utils.exceptions import MissingArtifactError
from prompt_rewriter.module_utils.metrics import (
    METRIC_COLUMNS,
    ScoreReport,
    TTestResult,
    build_report,
    paired_t_test,
    score_document,
    write_report_csv,
)
from prompt_rewriter.module_utils.policy import PolicyParams, RewriteMode, policy_rewrite
from prompt_rewriter.module_utils.prompt_model import (
    SECTION_FIELDS,
    SECTION_KINDS,
    ElementKind,
    PromptDoc,
    render,
)
from prompt_rewriter.module_utils.rules import Rule, RuleSet, rule_rewrite

LOG = logging.getLogger(__name__)

SIGNIFICANCE_LEVEL = 0.01
SUMMARY_COLUMNS = ("method", "n") + METRIC_COLUMNS + ("corpus_bleu", "p_bleu", "significant")


class MethodName(str, Enum):
    ORIGINAL = "Original"
    REWRITER_SL = "RewriterSl"
    REWRITER_RL = "RewriterRl"
    REWRITER_SL_RL = "RewriterSlRl"
    RULE_REWRITER = "RuleRewriter"
    ORIGINAL_VARIANT = "OriginalVariant"
    ELEMENT_ABLATION = "ElementAblation"


POLICY_METHODS = frozenset(
    {
        MethodName.REWRITER_SL,
        MethodName.REWRITER_RL,
        MethodName.REWRITER_SL_RL,
        MethodName.ELEMENT_ABLATION,
    }
)


class AblationKind(str, Enum):
    ORIGINAL_VARIANTS = "OriginalVariants"
    ELEMENT_REMOVAL = "ElementRemoval"
    UNIFORM_STYLE = "UniformStyle"


class MethodSpec(BaseModel):
    """One row of a comparison.

    ``mask`` bit ``i`` marks the presence of the i-th section kind (summary,
    keywords, style) for ``OriginalVariant``; ``drop`` lists the kinds emptied
    before the policy sees the prompt for ``ElementAblation``.
    """

    model_config = ConfigDict(frozen=True)

    name: MethodName
    label: str = ""
    policy_path: Optional[str] = None
    ruleset: Optional[RuleSet] = None
    mask: Optional[int] = Field(default=None, ge=0, le=7)
    drop: Tuple[ElementKind, ...] = ()

    @property
    def display(self) -> str:
        return self.label or self.name.value


# CLI method keys -> method names; policy keys also name the workdir policy file.
METHOD_KEYS = {
    "original": MethodName.ORIGINAL,
    "rules": MethodName.RULE_REWRITER,
    "sl": MethodName.REWRITER_SL,
    "rl": MethodName.REWRITER_RL,
    "slrl": MethodName.REWRITER_SL_RL,
}


def method_for_key(key: str, policy_path: Optional[Path] = None) -> MethodSpec:
    """Build the MethodSpec of a CLI method key such as ``slrl`` or ``rules``."""
    if key not in METHOD_KEYS:
        raise ValueError(f"unknown method '{key}', expected one of {sorted(METHOD_KEYS)}")
    name = METHOD_KEYS[key]
    if name in POLICY_METHODS:
        return MethodSpec(name=name, policy_path=str(policy_path) if policy_path else None)
    return MethodSpec(name=name)


class EvalResult(BaseModel):
    reports: Dict[str, ScoreReport]
    significance: Dict[str, Dict[str, TTestResult]] = Field(default_factory=dict)
    reference: str = ""


def mask_label(mask: int) -> str:
    present = [SECTION_FIELDS[kind] for bit, kind in enumerate(SECTION_KINDS) if mask & (1 << bit)]
    return f"Original({','.join(present) or 'none'})"


def apply_mask(prompt: PromptDoc, mask: int) -> PromptDoc:
    return prompt.with_sections(
        **{SECTION_FIELDS[kind]: () for bit, kind in enumerate(SECTION_KINDS) if not mask & (1 << bit)}
    )


def load_policies(methods: Sequence[MethodSpec]) -> Dict[str, PolicyParams]:
    """Load every policy file up front so missing artifacts fail before any generation."""
    policies = {}
    for method in methods:
        if method.name not in POLICY_METHODS:
            continue
        if not method.policy_path or not Path(method.policy_path).is_file():
            raise MissingArtifactError(method.policy_path or f"<policy for {method.display}>")
        policies.setdefault(method.policy_path, PolicyParams.load(Path(method.policy_path)))
    return policies


def rewrite_with(method: MethodSpec, rewrite_input: RewriteInput, policies: Dict[str, PolicyParams]) -> PromptDoc:
    """The prompt a method sends to the generator; never sees the ground truth."""
    prompt = rewrite_input.prompt
    if method.name is MethodName.ORIGINAL:
        return prompt
    if method.name is MethodName.ORIGINAL_VARIANT:
        return apply_mask(prompt, 7 if method.mask is None else method.mask)
    if method.name is MethodName.RULE_REWRITER:
        return rule_rewrite(rewrite_input, method.ruleset)
    if method.name is MethodName.ELEMENT_ABLATION:
        stripped = prompt.with_sections(**{SECTION_FIELDS[kind]: () for kind in method.drop})
        rewrite_input = rewrite_input.model_copy(update={"prompt": stripped})
    params = policies[method.policy_path]
    return policy_rewrite(rewrite_input, params, RewriteMode.GREEDY)[0]


def evaluate_method(
    method: MethodSpec,
    tasks: Sequence[PromptedTask],
    generator,
    policies: Dict[str, PolicyParams],
) -> ScoreReport:
    prompts = [render(rewrite_with(method, task.rewrite_input(), policies)) for task in tasks]
    records = generator.generate_many(prompts)
    rows = []
    pairs = []
    for task, record in zip(tasks, records):
        rows.append(score_document(task.task_id, record.output, task.ground_truth))
        pairs.append((record.output, task.ground_truth))
    return build_report(rows, method=method.display, pairs=pairs)


def significance_against(reports: Dict[str, ScoreReport], reference: str) -> Dict[str, Dict[str, TTestResult]]:
    """Paired t-tests of every report against ``reference``, per metric."""
    matrix: Dict[str, Dict[str, TTestResult]] = {}
    base = reports[reference]
    if base.n < 2:
        return matrix
    for name, report in reports.items():
        if name == reference:
            continue
        matrix[name] = {
            metric: paired_t_test(report.column(metric), base.column(metric)) for metric in METRIC_COLUMNS
        }
    return matrix


def run_eval(
    methods: Sequence[MethodSpec],
    tasks: Sequence[PromptedTask],
    generator,
    out: Optional[Path] = None,
    reference: Optional[str] = None,
) -> EvalResult:
    """Evaluate methods on prompted tasks and test each against a reference row.

    Args:
        methods: Rows to evaluate; labels must be unique.
        tasks: Tasks of the evaluated split.
        generator: Generator client.
        out: Directory for per-method CSVs and the summary CSV/text table.
        reference: Label of the significance reference; defaults to the
            ``Original`` row when present.

    Raises:
        MissingArtifactError: When a policy file is missing (before any generation).
    """
    labels = [m.display for m in methods]
    if len(set(labels)) != len(labels):
        raise ValueError(f"method labels must be unique: {labels}")
    policies = load_policies(methods)

    reports: Dict[str, ScoreReport] = {}
    for method in methods:
        LOG.info("evaluating %s on %d task(s)", method.display, len(tasks))
        reports[method.display] = evaluate_method(method, tasks, generator, policies)

    if reference is None and MethodName.ORIGINAL.value in reports:
        reference = MethodName.ORIGINAL.value
    significance = significance_against(reports, reference) if reference else {}
    result = EvalResult(reports=reports, significance=significance, reference=reference or "")
    if out is not None:
        write_eval_outputs(result, out)
    return result


def ablation_methods(kind: AblationKind, policy_path: Optional[str] = None) -> List[MethodSpec]:
    kind = AblationKind(kind)
    if kind is AblationKind.ORIGINAL_VARIANTS:
        return [
            MethodSpec(name=MethodName.ORIGINAL_VARIANT, mask=mask, label=mask_label(mask))
            for mask in range(8)
        ]
    if kind is AblationKind.ELEMENT_REMOVAL:
        rows = [MethodSpec(name=MethodName.ORIGINAL)]
        for ablated in SECTION_KINDS:
            rows.append(
                MethodSpec(
                    name=MethodName.ELEMENT_ABLATION,
                    policy_path=policy_path,
                    drop=(ablated,),
                    label=f"Rewriter(-{SECTION_FIELDS[ablated]})",
                )
            )
        return rows
    return [
        MethodSpec(name=MethodName.ORIGINAL),
        MethodSpec(
            name=MethodName.RULE_REWRITER,
            ruleset=RuleSet(rules=frozenset({Rule.UNIFORM_THOROUGH_STYLE})),
            label="Original(uniform style)",
        ),
    ]


def run_ablation(
    kind: AblationKind,
    tasks: Sequence[PromptedTask],
    generator,
    out: Optional[Path] = None,
    policy_path: Optional[str] = None,
) -> EvalResult:
    """Run an ablation grid.

    The presence grid is tested against its best row by BLEU; the other grids
    against the Original row.
    """
    kind = AblationKind(kind)
    methods = ablation_methods(kind, policy_path)
    result = run_eval(methods, tasks, generator, out=None)
    if kind is AblationKind.ORIGINAL_VARIANTS:
        position = {m.display: i for i, m in enumerate(methods)}
        best = max(result.reports, key=lambda name: (result.reports[name].aggregates["bleu"], -position[name]))
        result = EvalResult(
            reports=result.reports, significance=significance_against(result.reports, best), reference=best
        )
    if out is not None:
        write_eval_outputs(result, out)
    return result


def summary_rows(result: EvalResult) -> List[Dict[str, str]]:
    rows = []
    for name, report in result.reports.items():
        test = result.significance.get(name, {}).get("bleu")
        significant = test is not None and test.p_two_sided < SIGNIFICANCE_LEVEL
        row = {"method": name, "n": str(report.n)}
        row.update({m: f"{report.aggregates[m]:.2f}" for m in METRIC_COLUMNS})
        row["corpus_bleu"] = f"{report.corpus_bleu:.2f}"
        row["p_bleu"] = "" if test is None else f"{test.p_two_sided:.4g}"
        row["significant"] = "*" if significant else ""
        rows.append(row)
    return rows


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", label).strip("_") or "method"


def render_table(rows: Sequence[Dict[str, str]], title: str = "") -> str:
    """Plain-text table; starred BLEU values differ from the reference at p < 0.01."""
    table = Table(title=title or None)
    for column in ("method", "n") + METRIC_COLUMNS + ("corpus_bleu",):
        table.add_column(column, justify="left" if column == "method" else "right")
    for row in rows:
        bleu_cell = row["bleu"] + row.get("significant", "")
        table.add_row(
            row["method"], row["n"], bleu_cell, *(row[m] for m in METRIC_COLUMNS[1:]), row["corpus_bleu"]
        )
    console = Console(file=io.StringIO(), width=120, record=True, color_system=None)
    console.print(table)
    return console.export_text()


def write_summary_csv(rows: Sequence[Dict[str, str]], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def read_summary_csv(path: Path) -> List[Dict[str, str]]:
    if not path.is_file():
        raise MissingArtifactError(str(path))
    with path.open(encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))


def write_eval_outputs(result: EvalResult, out: Path) -> Dict[str, str]:
    """Write ``<method>.csv`` per method plus ``summary.csv`` and ``summary.txt``."""
    out.mkdir(parents=True, exist_ok=True)
    for name, report in result.reports.items():
        write_report_csv(report, out / f"{_slug(name)}.csv")
    rows = summary_rows(result)
    write_summary_csv(rows, out / "summary.csv")
    title = f"reference: {result.reference}" if result.reference else ""
    (out / "summary.txt").write_text(render_table(rows, title), encoding="utf-8")
    return {"summary_csv": str(out / "summary.csv"), "summary_txt": str(out / "summary.txt")}
