# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""Randomized prompt variants, best-prompt selection and SL example emission."""

import hashlib
import itertools
import json
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from prompt_rewriter.module_utils.corpus import PromptedTask
from prompt_rewriter.module_utils.exceptions import VariantGenerationError
from prompt_rewriter.module_utils.metrics import (
    BleuMode,
    ScoreReport,
    bleu,
    build_report,
    score_document,
    tokenize,
)
from prompt_rewriter.module_utils.prompt_model import (
    SECTION_FIELDS,
    SECTION_KINDS,
    Element,
    PromptDoc,
    RewriteLabel,
    label_of,
    parse_label,
    parse_prompt,
    render,
    render_label,
)

LOG = logging.getLogger(__name__)

PER_TYPE = 4
CAP_ATTEMPTS = 64


class VariantSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    original: PromptDoc
    variants: Tuple[PromptDoc, ...]
    seed: int


class ScoredVariant(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int
    prompt: PromptDoc
    generated: str
    score: float


class SlExample(BaseModel):
    model_config = ConfigDict(frozen=True)

    task_id: str
    input: PromptDoc
    label: RewriteLabel


class BestRecord(BaseModel):
    task_id: str
    best_index: int
    best_score: float
    original_score: float
    variant_count: int
    best_label: str


def task_seed(seed: int, task_id: str) -> int:
    """A per-task seed that does not depend on task order."""
    digest = hashlib.sha256(f"{seed}:{task_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def randomize_sequence(elements: Sequence, rng: np.random.Generator) -> list:
    """Shuffle ``elements`` and drop the trailing ``k`` items, ``k`` uniform in [0, N // 2]."""
    n = len(elements)
    order = rng.permutation(n)
    k = int(rng.integers(0, n // 2 + 1))
    return [elements[int(i)] for i in order[: n - k]]


def _draw_sequences(
    original: Tuple[Element, ...], rng: np.random.Generator, per_type: int, cap_attempts: int
) -> List[Tuple[Element, ...]]:
    drawn: List[Tuple[Element, ...]] = []
    seen = {tuple(e.text for e in original)}
    for _ in range(cap_attempts):
        if len(drawn) == per_type:
            break
        candidate = tuple(randomize_sequence(original, rng))
        key = tuple(e.text for e in candidate)
        if key in seen:
            continue
        seen.add(key)
        drawn.append(candidate)
    return drawn or [original]


def sample_variants(
    prompt: PromptDoc, seed: int, per_type: int = PER_TYPE, cap_attempts: int = CAP_ATTEMPTS
) -> VariantSet:
    """Build the randomized variants of ``prompt``.

    Per element type, up to ``per_type`` unique sequences different from the
    original section are drawn (at most ``cap_attempts`` draws). Variants are
    the original followed by the cross product of the drawn sequences in
    summary-major order, deduplicated; with at least four elements per type
    this gives 4 x 4 x 4 + 1 = 65 variants.
    """
    rng = np.random.default_rng(seed)
    per_kind = [
        _draw_sequences(prompt.section(kind), rng, per_type, cap_attempts) for kind in SECTION_KINDS
    ]

    variants = [prompt]
    seen = {render_label(label_of(prompt))}
    for combo in itertools.product(*per_kind):
        variant = prompt.with_sections(
            **{SECTION_FIELDS[kind]: seq for kind, seq in zip(SECTION_KINDS, combo)}
        )
        key = render_label(label_of(variant))
        if key in seen:
            continue
        seen.add(key)
        variants.append(variant)
    return VariantSet(original=prompt, variants=tuple(variants), seed=seed)


def select_best(
    task: PromptedTask,
    vset: VariantSet,
    generator,
    mode: BleuMode = BleuMode.SMOOTHED,
) -> Tuple[ScoredVariant, List[ScoredVariant]]:
    """Generate and score every variant against the ground truth.

    Ties go to the earliest variant, so the original wins any tie.

    Raises:
        VariantGenerationError: With the index of the first variant whose
            generation failed.
        EmptyReferenceError: When the ground truth has no tokens.
    """
    results = generator.generate_many([render(v) for v in vset.variants], return_exceptions=True)
    reference = tokenize(task.ground_truth)
    scored = []
    for index, (variant, result) in enumerate(zip(vset.variants, results)):
        if isinstance(result, Exception):
            raise VariantGenerationError(index, result)
        score = bleu(tokenize(result.output), reference, mode=mode)
        scored.append(ScoredVariant(index=index, prompt=variant, generated=result.output, score=score))

    best = scored[0]
    for candidate in scored[1:]:
        if candidate.score > best.score:
            best = candidate
    return best, scored


def emit_sl_examples(task_id: str, vset: VariantSet, best: ScoredVariant) -> List[SlExample]:
    """One example per variant, every one labelled with the best prompt's sections."""
    label = label_of(best.prompt)
    return [SlExample(task_id=task_id, input=variant, label=label) for variant in vset.variants]


def task_variants(
    task: PromptedTask, seed: int, per_type: int = PER_TYPE, cap_attempts: int = CAP_ATTEMPTS
) -> VariantSet:
    return sample_variants(task.prompt, task_seed(seed, task.task_id), per_type, cap_attempts)


def label_task(
    task: PromptedTask,
    generator,
    seed: int,
    per_type: int = PER_TYPE,
    cap_attempts: int = CAP_ATTEMPTS,
    vset: Optional[VariantSet] = None,
) -> Tuple[List[SlExample], BestRecord]:
    """Select the best variant of one task and emit its SL examples."""
    if vset is None:
        vset = task_variants(task, seed, per_type, cap_attempts)
    best, scored = select_best(task, vset, generator)
    record = BestRecord(
        task_id=task.task_id,
        best_index=best.index,
        best_score=best.score,
        original_score=scored[0].score,
        variant_count=len(vset.variants),
        best_label=render_label(label_of(best.prompt)),
    )
    return emit_sl_examples(task.task_id, vset, best), record


def best_prompt_report(
    tasks: Sequence[PromptedTask],
    generator,
    seed: int,
    per_type: int = PER_TYPE,
    cap_attempts: int = CAP_ATTEMPTS,
    method: str = "BestPrompt",
) -> ScoreReport:
    """Score the per-task best variant; an oracle upper reference, never a rewriter."""
    rows = []
    pairs = []
    for task in tasks:
        best, _ = select_best(task, task_variants(task, seed, per_type, cap_attempts), generator)
        rows.append(score_document(task.task_id, best.generated, task.ground_truth))
        pairs.append((best.generated, task.ground_truth))
    return build_report(rows, method=method, pairs=pairs)


def write_sl_examples(examples: Iterable[SlExample], path: Path) -> int:
    """Write ``{task_id, input, label}`` lines; input and label are rendered text."""
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8") as handle:
        for example in examples:
            record = {
                "task_id": example.task_id,
                "input": render(example.input),
                "label": render_label(example.label),
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    return count


def read_sl_examples(path: Path, task_ids: Optional[set] = None) -> List[SlExample]:
    examples = []
    with Path(path).open(encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            record = json.loads(line)
            if task_ids is not None and record["task_id"] not in task_ids:
                continue
            examples.append(
                SlExample(
                    task_id=record["task_id"],
                    input=parse_prompt(record["input"]),
                    label=parse_label(record["label"]),
                )
            )
    return examples
