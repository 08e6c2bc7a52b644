# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""
Pipeline module that partitions users into train, validation and test splits.
"""

from ansible.module_utils.common.text.converters import to_text

from prompt_rewriter.module_utils.api_spec.split import SplitSpec
from prompt_rewriter.module_utils.corpus import (
    SPLIT_NAMES,
    load_corpus,
    split_by_users,
    write_jsonl,
    write_split_manifest,
)
from prompt_rewriter.module_utils.exceptions import SplitError
from prompt_rewriter.module_utils.runner import ModuleFailure, PipelineModule
from prompt_rewriter.module_utils.workspace import Workspace

DOCUMENTATION = r"""
---
module: split

short_description: Split users into train, validation and test and build writing tasks.

description:
    - Users are shuffled with the seed and partitioned by largest-remainder rounding of C(ratios).
    - All tasks of a user land in the same split.
    - Review and Social users contribute their latest document; Email users every
      qualified document with at least one earlier document.

options:
    domain:
        description: Corpus domain; decides task selection and immediate context extras.
        type: str
        choices: ['Email', 'Review', 'Social']
        default: Review
    ratios:
        description: Train, validation and test percentages; must sum to 100.
        type: list
        elements: int
        default: [85, 5, 10]
    context_budget_tokens:
        description: Tokens of the current document body kept in the immediate context.
        type: int
        default: 30
"""

EXAMPLES = r"""
prompt-rewriter split --ratios 80,10,10
prompt-rewriter split --domain Email
"""

RETURN = r"""
tasks:
    description: Number of tasks per split.
    returned: always
    type: dict
users:
    description: Number of users per split.
    returned: always
    type: dict
"""


def main(params, producers=None):
    """
    Main execution path for the split module.

    :return: Module result
    :rtype: dict
    """
    module = PipelineModule(argument_spec=SplitSpec.spec(), params=params)
    workspace = Workspace(module.params["workdir"], producers)

    try:
        histories = load_corpus(workspace.require("histories"))
        try:
            splits = split_by_users(
                histories,
                module.params["domain"],
                ratios=module.params["ratios"],
                seed=module.params["seed"],
                context_budget_tokens=module.params["context_budget_tokens"],
            )
        except SplitError as e:
            module.fail_json(msg=to_text(e), error_code=getattr(e, "error_code", None))

        for name in SPLIT_NAMES:
            write_jsonl(splits.split(name), workspace.tasks(name))
        write_split_manifest(splits, workspace.split_manifest)

        users = {name: 0 for name in SPLIT_NAMES}
        for name in splits.users.values():
            users[name] += 1
        return module.exit_json(
            changed=True,
            tasks={name: len(splits.split(name)) for name in SPLIT_NAMES},
            users=users,
        )

    except ModuleFailure:
        raise
    except Exception as e:
        module.fail_json(msg=to_text(e), error_code=getattr(e, "error_code", None))
