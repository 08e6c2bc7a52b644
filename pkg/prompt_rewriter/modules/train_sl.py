# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""
Pipeline module that fits the rewriter policy to best-prompt labels.
"""

from pathlib import Path

from ansible.module_utils.common.text.converters import to_text

from prompt_rewriter.module_utils.api_spec.train_sl import TrainSlSpec
from prompt_rewriter.module_utils.policy import PolicyParams
from prompt_rewriter.module_utils.runner import ModuleFailure, PipelineModule
from prompt_rewriter.module_utils.training import sl_fit
from prompt_rewriter.module_utils.variants import read_sl_examples
from prompt_rewriter.module_utils.workspace import Workspace

DOCUMENTATION = r"""
---
module: train_sl

short_description: Fit the rewriter policy to the supervised examples of the train split.

description:
    - Minimizes the negative log-likelihood of the labelled drop, keep and duplicate actions,
      element order and additions with full-batch gradient descent.
    - Only examples of train-split tasks are used.
    - Writes the fitted policy to C(policy_sl.json) in the workdir unless C(policy_out) is set.

options:
    epochs:
        description: Gradient steps.
        type: int
        default: 300
    learning_rate:
        description: Step size.
        type: float
        default: 0.2
    init:
        description: Starting weights; C(random) is seeded with the global seed.
        type: str
        choices: ['zeros', 'random']
        default: zeros
    balance_classes:
        description:
            - Weigh the target classes of every decision group equally.
            - Without it, actions that labels choose less than half of the time are never
              picked in Greedy mode.
        type: bool
        default: true
    policy_out:
        description: Policy file to write.
        type: path
"""

EXAMPLES = r"""
prompt-rewriter train-sl
prompt-rewriter train-sl --epochs 500 --policy-out ./policies/sl.json
"""

RETURN = r"""
policy:
    description: Path of the written policy.
    returned: always
    type: str
examples:
    description: Number of supervised examples used.
    returned: always
    type: int
initial_loss:
    description: Loss before the first step.
    returned: always
    type: float
final_loss:
    description: Loss before the last step.
    returned: always
    type: float
"""


def main(params, producers=None):
    """
    Main execution path for the train_sl module.

    :return: Module result
    :rtype: dict
    """
    module = PipelineModule(argument_spec=TrainSlSpec.spec(), params=params)
    workspace = Workspace(module.params["workdir"], producers)

    try:
        p = module.params
        train_ids = {task.task_id for task in workspace.load_prompts("train")}
        examples = read_sl_examples(workspace.require("sl_examples"), train_ids)
        if not examples:
            module.fail_json(msg="No supervised examples for train-split tasks; run 'label' first")

        if p["init"] == "random":
            start = PolicyParams.random(p["seed"])
        else:
            start = PolicyParams.zeros()

        losses = []
        fitted = sl_fit(
            start,
            examples,
            epochs=p["epochs"],
            learning_rate=p["learning_rate"],
            loss_log=losses,
            balance_classes=p["balance_classes"],
        )

        output = Path(p["policy_out"]) if p["policy_out"] else workspace.policy("sl")
        fitted.save(output)
        return module.exit_json(
            changed=True,
            policy=str(output),
            examples=len(examples),
            initial_loss=losses[0] if losses else None,
            final_loss=losses[-1] if losses else None,
        )

    except ModuleFailure:
        raise
    except Exception as e:
        module.fail_json(msg=to_text(e), error_code=getattr(e, "error_code", None))
