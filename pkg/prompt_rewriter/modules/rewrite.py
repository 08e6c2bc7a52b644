# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""
Pipeline module that rewrites the prompts of one split without generating.
"""

from pathlib import Path

from ansible.module_utils.common.text.converters import to_text
from pydantic import BaseModel

from prompt_rewriter.module_utils.api_spec.rewrite import RewriteSpec
from prompt_rewriter.module_utils.corpus import write_jsonl
from prompt_rewriter.module_utils.exceptions import MissingArtifactError
from prompt_rewriter.module_utils.harness import (
    POLICY_METHODS,
    load_policies,
    method_for_key,
    rewrite_with,
)
from prompt_rewriter.module_utils.prompt_model import render
from prompt_rewriter.module_utils.runner import ModuleFailure, PipelineModule
from prompt_rewriter.module_utils.workspace import Workspace

DOCUMENTATION = r"""
---
module: rewrite

short_description: Rewrite the prompts of a split with one method.

description:
    - Each rewriter only sees the task's domain and original prompt, never the ground truth.
    - Policy methods use greedy decoding, so reruns give identical prompts.
    - Writes one C({task_id, prompt}) line per task.

options:
    method:
        description: Rewriting method.
        type: str
        choices: ['original', 'rules', 'sl', 'rl', 'slrl']
        default: slrl
    split:
        description: Split whose prompts are rewritten.
        type: str
        choices: ['train', 'validation', 'test']
        default: test
    policy:
        description: Policy file for policy methods; defaults to C(policy_<method>.json) in the workdir.
        type: path
    output:
        description: Output file; defaults to C(rewritten_<method>_<split>.jsonl) in the workdir.
        type: path
"""

EXAMPLES = r"""
prompt-rewriter rewrite --method rules
prompt-rewriter rewrite --method sl --split validation --output ./sl_validation.jsonl
"""

RETURN = r"""
output:
    description: Path of the rewritten prompts.
    returned: always
    type: str
prompts:
    description: Number of rewritten prompts.
    returned: always
    type: int
"""


class RewrittenPrompt(BaseModel):
    task_id: str
    prompt: str


def main(params, producers=None):
    """
    Main execution path for the rewrite module.

    :return: Module result
    :rtype: dict
    """
    module = PipelineModule(argument_spec=RewriteSpec.spec(), params=params)
    workspace = Workspace(module.params["workdir"], producers)

    try:
        p = module.params
        key = p["method"]
        policy_path = Path(p["policy"]) if p["policy"] else workspace.policy(key)
        method = method_for_key(key, policy_path)
        try:
            policies = load_policies([method])
        except MissingArtifactError as e:
            module.fail_json(
                msg=f"Policy for method '{key}' not found: {to_text(e)}",
                error_code=e.error_code,
            )

        tasks = workspace.load_prompts(p["split"])
        rewritten = [
            RewrittenPrompt(
                task_id=task.task_id,
                prompt=render(rewrite_with(method, task.rewrite_input(), policies)),
            )
            for task in tasks
        ]

        if p["output"]:
            output = Path(p["output"])
        else:
            output = workspace.root / f"rewritten_{key}_{p['split']}.jsonl"
        write_jsonl(rewritten, output)
        return module.exit_json(
            changed=True,
            output=str(output),
            prompts=len(rewritten),
            uses_policy=method.name in POLICY_METHODS,
        )

    except ModuleFailure:
        raise
    except Exception as e:
        module.fail_json(msg=to_text(e), error_code=getattr(e, "error_code", None))
