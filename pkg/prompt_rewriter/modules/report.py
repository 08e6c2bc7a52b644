# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""
Pipeline module that renders a stored summary as a table.
"""

from pathlib import Path

from ansible.module_utils.common.text.converters import to_text

from prompt_rewriter.module_utils.api_spec.report import ReportSpec
from prompt_rewriter.module_utils.exceptions import MissingArtifactError
from prompt_rewriter.module_utils.harness import read_summary_csv, render_table
from prompt_rewriter.module_utils.runner import ModuleFailure, PipelineModule
from prompt_rewriter.module_utils.workspace import Workspace

DOCUMENTATION = r"""
---
module: report

short_description: Print the summary table of an earlier eval or ablate run.

description:
    - Reads C(summary.csv) of a report directory without generating anything.

options:
    name:
        description: Report directory name under C(reports/) in the workdir.
        type: str
        default: eval
    summary:
        description: Summary CSV to render instead of the named report's.
        type: path
"""

EXAMPLES = r"""
prompt-rewriter report
prompt-rewriter report --name OriginalVariants
"""

RETURN = r"""
summary:
    description: Summary rows.
    returned: always
    type: list
table:
    description: Rendered summary table.
    returned: always
    type: str
"""


def main(params, producers=None):
    """
    Main execution path for the report module.

    :return: Module result
    :rtype: dict
    """
    module = PipelineModule(argument_spec=ReportSpec.spec(), params=params)
    workspace = Workspace(module.params["workdir"], producers)

    try:
        if module.params["summary"]:
            path = Path(module.params["summary"])
        else:
            path = workspace.reports(module.params["name"]) / "summary.csv"

        try:
            rows = read_summary_csv(path)
        except MissingArtifactError as e:
            module.fail_json(
                msg=f"No summary at '{path}'; run eval or ablate first",
                error_code=e.error_code,
            )

        return module.exit_json(changed=False, summary=rows, table=render_table(rows, path.parent.name))

    except ModuleFailure:
        raise
    except Exception as e:
        module.fail_json(msg=to_text(e), error_code=getattr(e, "error_code", None))
