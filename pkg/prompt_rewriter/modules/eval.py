# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""
Pipeline module that compares rewriting methods on one split.
"""

from pathlib import Path

from ansible.module_utils.common.text.converters import to_text

from prompt_rewriter.module_utils.api_spec.eval import EvalSpec
from prompt_rewriter.module_utils.authenticate import get_generator_client
from prompt_rewriter.module_utils.exceptions import MissingArtifactError
from prompt_rewriter.module_utils.harness import (
    EvalResult,
    method_for_key,
    render_table,
    run_eval,
    significance_against,
    summary_rows,
    write_eval_outputs,
)
from prompt_rewriter.module_utils.runner import ModuleFailure, PipelineModule
from prompt_rewriter.module_utils.serialize_response import serialize_response
from prompt_rewriter.module_utils.variants import best_prompt_report
from prompt_rewriter.module_utils.workspace import Workspace

DOCUMENTATION = r"""
---
module: eval

short_description: Compare rewriting methods by generation quality on a split.

description:
    - Every method rewrites every prompt of the split, the generator writes from the
      rewritten prompt and the output is scored with BLEU, ROUGE-1, ROUGE-2 and ROUGE-L.
    - Each method is compared to C(Original) with a paired t-test; BLEU values that differ
      at p < 0.01 are starred in the summary table.
    - C(best) adds the best-prompt row, which picks variants by reading the ground truth and
      is an upper reference, never a rewriter.
    - Policy files default to C(policy_<method>.json) in the workdir; a missing one fails
      before any generation.

options:
    methods:
        description: Methods to compare.
        type: list
        elements: str
        choices: ['original', 'rules', 'sl', 'rl', 'slrl', 'best']
        default: ['original', 'rules', 'sl', 'slrl']
    split:
        description: Split to evaluate on.
        type: str
        choices: ['train', 'validation', 'test']
        default: test
    policy_sl:
        description: Supervised policy file.
        type: path
    policy_rl:
        description: Policy trained with PPO from scratch.
        type: path
    policy_slrl:
        description: Supervised policy fine-tuned with PPO.
        type: path
    name:
        description: Report directory name under C(reports/) in the workdir.
        type: str
        default: eval
    generator:
        description: Generator options, see the C([generator]) config section.
        type: dict
"""

EXAMPLES = r"""
prompt-rewriter eval
prompt-rewriter eval --methods original,rules,best --split validation --name val
"""

RETURN = r"""
report_dir:
    description: Directory with per-method CSVs, C(summary.csv) and C(summary.txt).
    returned: always
    type: str
summary:
    description: Summary rows, one per method.
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

BEST_PROMPT = "BestPrompt"


def main(params, producers=None):
    """
    Main execution path for the eval module.

    :return: Module result
    :rtype: dict
    """
    module = PipelineModule(argument_spec=EvalSpec.spec(), params=params)
    workspace = Workspace(module.params["workdir"], producers)

    try:
        p = module.params
        methods = []
        for key in dict.fromkeys(p["methods"]):
            if key == "best":
                continue
            override = p.get(f"policy_{key}")
            methods.append(
                method_for_key(key, Path(override) if override else workspace.policy(key))
            )

        tasks = workspace.load_prompts(p["split"])
        if not tasks:
            module.fail_json(msg=f"No prompted tasks in split '{p['split']}'")
        generator = get_generator_client(module)

        try:
            result = run_eval(methods, tasks, generator)
        except MissingArtifactError as e:
            module.fail_json(
                msg=f"Policy file missing: {to_text(e)}; train it first or pass its path",
                error_code=e.error_code,
            )

        if "best" in p["methods"]:
            reports = dict(result.reports)
            reports[BEST_PROMPT] = best_prompt_report(tasks, generator, p["seed"], method=BEST_PROMPT)
            reference = result.reference
            result = EvalResult(
                reports=reports,
                significance=significance_against(reports, reference) if reference else {},
                reference=reference,
            )

        out = workspace.reports(p["name"])
        write_eval_outputs(result, out)
        rows = summary_rows(result)
        title = f"reference: {result.reference}" if result.reference else ""
        return module.exit_json(
            changed=True,
            report_dir=str(out),
            summary=rows,
            table=render_table(rows, title),
            generator_stats=serialize_response(generator.stats),
        )

    except ModuleFailure:
        raise
    except Exception as e:
        module.fail_json(msg=to_text(e), error_code=getattr(e, "error_code", None))

