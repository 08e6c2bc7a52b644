# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""
Pipeline module that labels every task with its best-scoring prompt variant.
"""

import logging

from ansible.module_utils.common.text.converters import to_text

from prompt_rewriter.module_utils.api_spec.label import LabelSpec
from prompt_rewriter.module_utils.authenticate import get_generator_client
from prompt_rewriter.module_utils.corpus import write_jsonl
from prompt_rewriter.module_utils.exceptions import VariantGenerationError
from prompt_rewriter.module_utils.prompt_model import parse_prompt
from prompt_rewriter.module_utils.runner import ModuleFailure, PipelineModule
from prompt_rewriter.module_utils.serialize_response import serialize_response
from prompt_rewriter.module_utils.variants import VariantSet, label_task, write_sl_examples
from prompt_rewriter.module_utils.workspace import Workspace

LOG = logging.getLogger(__name__)

DOCUMENTATION = r"""
---
module: label

short_description: Pick the best prompt variant per task and emit supervised examples.

description:
    - Every variant is sent to the generator and scored with smoothed sentence BLEU against
      the ground truth; ties go to the earliest variant, so the original wins any tie.
    - Each variant becomes one supervised example whose label is the best variant's sections.
    - Uses the sampled variants file and samples it first when it is missing.

options:
    splits:
        description: Splits to label; the test split is never labelled.
        type: list
        elements: str
        default: ['train', 'validation']
    generator:
        description: Generator options, see the C([generator]) config section.
        type: dict
"""

EXAMPLES = r"""
prompt-rewriter label
prompt-rewriter --budget 20000 --cache-dir ./work/cache label --splits train
"""

RETURN = r"""
tasks:
    description: Number of labelled tasks.
    returned: always
    type: int
examples:
    description: Number of supervised examples written.
    returned: always
    type: int
mean_gain:
    description: Mean BLEU of the best variant minus the original's, over labelled tasks.
    returned: always
    type: float
improved:
    description: Tasks whose best variant beats the original.
    returned: always
    type: int
generator_stats:
    description: Cache hits, misses and backend calls.
    returned: always
    type: dict
"""


def main(params, producers=None):
    """
    Main execution path for the label module.

    :return: Module result
    :rtype: dict
    """
    module = PipelineModule(argument_spec=LabelSpec.spec(), params=params)
    workspace = Workspace(module.params["workdir"], producers)

    try:
        generator = get_generator_client(module)
        variants = workspace.load_variants()

        examples = []
        records = []
        for split in module.params["splits"]:
            for task in workspace.load_prompts(split):
                stored = variants.get(task.task_id)
                vset = None
                if stored is not None:
                    vset = VariantSet(
                        original=task.prompt,
                        variants=tuple(parse_prompt(text) for text in stored.variants),
                        seed=stored.seed,
                    )
                else:
                    LOG.warning("no stored variants for task %s, sampling them", task.task_id)
                try:
                    task_examples, record = label_task(
                        task, generator, module.params["seed"], vset=vset
                    )
                except VariantGenerationError as e:
                    module.fail_json(
                        msg=f"Labelling task '{task.task_id}' failed: {to_text(e)}",
                        error_code=e.error_code,
                        task_id=task.task_id,
                        variant_index=e.index,
                    )
                examples.extend(task_examples)
                records.append(record)

        write_sl_examples(examples, workspace.sl_examples)
        write_jsonl(records, workspace.best)

        gains = [r.best_score - r.original_score for r in records]
        return module.exit_json(
            changed=True,
            tasks=len(records),
            examples=len(examples),
            mean_gain=sum(gains) / len(gains) if gains else 0.0,
            improved=sum(1 for r in records if r.best_index != 0),
            generator_stats=serialize_response(generator.stats),
        )

    except ModuleFailure:
        raise
    except Exception as e:
        module.fail_json(msg=to_text(e), error_code=getattr(e, "error_code", None))
