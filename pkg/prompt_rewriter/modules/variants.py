# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""
Pipeline module that samples randomized prompt variants per task.
"""

from ansible.module_utils.common.text.converters import to_text

from prompt_rewriter.module_utils.api_spec.variants import VariantsSpec
from prompt_rewriter.module_utils.corpus import write_jsonl
from prompt_rewriter.module_utils.prompt_model import render
from prompt_rewriter.module_utils.runner import ModuleFailure, PipelineModule
from prompt_rewriter.module_utils.variants import task_variants
from prompt_rewriter.module_utils.workspace import VariantFileRecord, Workspace

DOCUMENTATION = r"""
---
module: variants

short_description: Sample randomized variants of every original prompt.

description:
    - Each element type gets up to C(per_type) unique shuffled-and-truncated sequences.
    - Variants are the original prompt followed by the cross product of those sequences,
      which is 65 variants when every section has at least four elements.
    - Sampling is seeded per task, so reruns give identical variants.

options:
    per_type:
        description: Unique randomized sequences per element type.
        type: int
        default: 4
    cap_attempts:
        description: Draw limit per element type.
        type: int
        default: 64
    splits:
        description: Splits to sample variants for.
        type: list
        elements: str
        default: ['train', 'validation']
"""

EXAMPLES = r"""
prompt-rewriter variants
prompt-rewriter variants --splits train
"""

RETURN = r"""
tasks:
    description: Number of tasks with sampled variants.
    returned: always
    type: int
variants:
    description: Total number of variants.
    returned: always
    type: int
full_sets:
    description: Tasks with the full 4 x 4 x 4 + 1 variant set.
    returned: always
    type: int
"""


def main(params, producers=None):
    """
    Main execution path for the variants module.

    :return: Module result
    :rtype: dict
    """
    module = PipelineModule(argument_spec=VariantsSpec.spec(), params=params)
    workspace = Workspace(module.params["workdir"], producers)

    try:
        p = module.params
        records = []
        for split in p["splits"]:
            for task in workspace.load_prompts(split):
                vset = task_variants(task, p["seed"], p["per_type"], p["cap_attempts"])
                records.append(
                    VariantFileRecord(
                        task_id=task.task_id,
                        seed=vset.seed,
                        variants=[render(v) for v in vset.variants],
                    )
                )

        write_jsonl(records, workspace.variants)
        full = p["per_type"] ** 3 + 1
        return module.exit_json(
            changed=True,
            tasks=len(records),
            variants=sum(len(r.variants) for r in records),
            full_sets=sum(1 for r in records if len(r.variants) == full),
        )

    except ModuleFailure:
        raise
    except Exception as e:
        module.fail_json(msg=to_text(e), error_code=getattr(e, "error_code", None))
