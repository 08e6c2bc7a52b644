# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""
Pipeline module that assembles the original prompt of every writing task.
"""

from ansible.module_utils.common.text.converters import to_text

from prompt_rewriter.module_utils.api_spec.prompts import PromptsSpec
from prompt_rewriter.module_utils.authenticate import get_generator_client
from prompt_rewriter.module_utils.corpus import (
    SPLIT_NAMES,
    filter_tasks,
    prepare_prompts,
    write_jsonl,
)
from prompt_rewriter.module_utils.runner import ModuleFailure, PipelineModule
from prompt_rewriter.module_utils.serialize_response import serialize_response
from prompt_rewriter.module_utils.variants import task_variants
from prompt_rewriter.module_utils.workspace import Workspace

DOCUMENTATION = r"""
---
module: prompts

short_description: Assemble original prompts from retrieved history entries.

description:
    - Ranks each user's history with BM25 against the immediate context and keeps the top C(k).
    - Builds the summary and keyword sections extractively and the writing style section by
      asking the generator; sections precomputed in the corpus take precedence.
    - Drops ranked entries from the end until the rendered prompt fits C(prompt_budget_tokens).
    - Tasks with fewer than C(min_variants) prompt variants are dropped.

options:
    k:
        description: Number of ranked history entries.
        type: int
        default: 5
    max_sentences:
        description: Summary size limit.
        type: int
        default: 6
    max_keywords:
        description: Keyword section size limit.
        type: int
        default: 28
    style_docs:
        description: Earliest history documents shown to the style synthesis prompt.
        type: int
        default: 5
    prompt_budget_tokens:
        description: Token budget of the rendered prompt.
        type: int
        default: 1024
    instruction:
        description: Instruction line of every prompt.
        type: str
    min_variants:
        description: Minimum number of prompt variants for a task to be kept.
        type: int
        default: 5
    per_type:
        description: Unique randomized sequences per element type when counting variants.
        type: int
        default: 4
    cap_attempts:
        description: Draw limit per element type when counting variants.
        type: int
        default: 64
    generator:
        description: Generator options, see the C([generator]) config section.
        type: dict
"""

EXAMPLES = r"""
prompt-rewriter prompts
prompt-rewriter --backend remote --endpoint https://llm.example.com/v1/completions prompts --k 3
"""

RETURN = r"""
prompts:
    description: Number of prompted tasks per split.
    returned: always
    type: dict
dropped:
    description: Tasks dropped for having too few variants, per split.
    returned: always
    type: dict
generator_stats:
    description: Cache hits, misses and backend calls.
    returned: always
    type: dict
"""


def main(params, producers=None):
    """
    Main execution path for the prompts module.

    :return: Module result
    :rtype: dict
    """
    module = PipelineModule(argument_spec=PromptsSpec.spec(), params=params)
    workspace = Workspace(module.params["workdir"], producers)

    try:
        generator = get_generator_client(module)
        p = module.params

        prompted = []
        counts = {}
        dropped = {}
        for split in SPLIT_NAMES:
            tasks = prepare_prompts(
                workspace.load_tasks(split),
                split,
                generator=generator,
                k=p["k"],
                max_sentences=p["max_sentences"],
                max_keywords=p["max_keywords"],
                style_docs=p["style_docs"],
                prompt_budget_tokens=p["prompt_budget_tokens"],
                instruction=p["instruction"],
            )
            kept = filter_tasks(
                tasks,
                lambda task: task_variants(task, p["seed"], p["per_type"], p["cap_attempts"]),
                p["min_variants"],
            )
            counts[split] = len(kept)
            dropped[split] = len(tasks) - len(kept)
            prompted.extend(kept)

        write_jsonl(prompted, workspace.prompts)
        return module.exit_json(
            changed=True,
            prompts=counts,
            dropped=dropped,
            generator_stats=serialize_response(generator.stats),
        )

    except ModuleFailure:
        raise
    except Exception as e:
        module.fail_json(msg=to_text(e), error_code=getattr(e, "error_code", None))
