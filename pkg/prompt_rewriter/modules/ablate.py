# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""
Pipeline module that runs the prompt element ablation grids.
"""

from pathlib import Path

from ansible.module_utils.common.text.converters import to_text

from prompt_rewriter.module_utils.api_spec.ablate import AblateSpec
from prompt_rewriter.module_utils.authenticate import get_generator_client
from prompt_rewriter.module_utils.exceptions import MissingArtifactError
from prompt_rewriter.module_utils.harness import (
    AblationKind,
    render_table,
    run_ablation,
    summary_rows,
)
from prompt_rewriter.module_utils.runner import ModuleFailure, PipelineModule
from prompt_rewriter.module_utils.serialize_response import serialize_response
from prompt_rewriter.module_utils.workspace import Workspace

DOCUMENTATION = r"""
---
module: ablate

short_description: Measure how much each prompt section contributes.

description:
    - C(OriginalVariants) evaluates the original prompt with every subset of the summary,
      keyword and writing style sections (8 rows) and tests each row against the best one.
    - C(ElementRemoval) empties one section before the supervised-plus-PPO policy rewrites
      the prompt and compares against C(Original).
    - C(UniformStyle) replaces every writing style section with one fixed phrase.

options:
    kind:
        description: Ablation grid.
        type: str
        choices: ['OriginalVariants', 'ElementRemoval', 'UniformStyle']
        default: OriginalVariants
    split:
        description: Split to evaluate on.
        type: str
        choices: ['train', 'validation', 'test']
        default: test
    policy:
        description: Policy for C(ElementRemoval); defaults to C(policy_slrl.json) in the workdir.
        type: path
    name:
        description: Report directory name under C(reports/); defaults to the kind.
        type: str
    generator:
        description: Generator options, see the C([generator]) config section.
        type: dict
"""

EXAMPLES = r"""
prompt-rewriter ablate
prompt-rewriter ablate --kind ElementRemoval --policy ./policies/slrl.json
"""

RETURN = r"""
report_dir:
    description: Directory with per-row CSVs, C(summary.csv) and C(summary.txt).
    returned: always
    type: str
reference:
    description: Row every other row is tested against.
    returned: always
    type: str
summary:
    description: Summary rows.
    returned: always
    type: list
table:
    description: Rendered summary table.
    returned: always
    type: str
generator_stats:
    description: Cache hits, misses and backend calls.
    returned: always
    type: dict
"""


def main(params, producers=None):
    """
    Main execution path for the ablate module.

    :return: Module result
    :rtype: dict
    """
    module = PipelineModule(argument_spec=AblateSpec.spec(), params=params)
    workspace = Workspace(module.params["workdir"], producers)

    try:
        p = module.params
        kind = AblationKind(p["kind"])
        policy = Path(p["policy"]) if p["policy"] else workspace.policy("slrl")

        tasks = workspace.load_prompts(p["split"])
        if not tasks:
            module.fail_json(msg=f"No prompted tasks in split '{p['split']}'")
        generator = get_generator_client(module)

        out = workspace.reports(p["name"] or kind.value)
        try:
            result = run_ablation(kind, tasks, generator, out=out, policy_path=str(policy))
        except MissingArtifactError as e:
            module.fail_json(msg=f"Policy file missing: {to_text(e)}", error_code=e.error_code)

        rows = summary_rows(result)
        return module.exit_json(
            changed=True,
            report_dir=str(out),
            reference=result.reference,
            summary=rows,
            table=render_table(rows, f"reference: {result.reference}"),
            generator_stats=serialize_response(generator.stats),
        )

    except ModuleFailure:
        raise
    except Exception as e:
        module.fail_json(msg=to_text(e), error_code=getattr(e, "error_code", None))
