# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""
Pipeline module that validates a raw corpus and stores the user histories.
"""

from pathlib import Path

from ansible.module_utils.common.text.converters import to_text

from prompt_rewriter.module_utils.api_spec.ingest import IngestSpec
from prompt_rewriter.module_utils.corpus import load_corpus, write_histories
from prompt_rewriter.module_utils.exceptions import CorpusSchemaError
from prompt_rewriter.module_utils.runner import ModuleFailure, PipelineModule
from prompt_rewriter.module_utils.workspace import Workspace

DOCUMENTATION = r"""
---
module: ingest

short_description: Load a line-delimited JSON corpus into per-user histories.

description:
    - Every record needs C(user_id), C(doc_id), C(timestamp), C(title) and C(body);
      C(extras) is optional.
    - Documents are grouped per user and sorted by timestamp.
    - Without C(corpus), the workdir corpus is used and produced by C(synth) when missing.

options:
    corpus:
        description: Corpus file to read.
        type: path
    lenient:
        description: Skip malformed records with a warning instead of failing.
        type: bool
        default: false
"""

EXAMPLES = r"""
prompt-rewriter ingest --corpus ./data/reviews.jsonl
prompt-rewriter ingest --corpus ./data/emails.jsonl --lenient
"""

RETURN = r"""
histories:
    description: Path of the stored histories.
    returned: always
    type: str
users:
    description: Number of users.
    returned: always
    type: int
documents:
    description: Number of documents.
    returned: always
    type: int
"""


def main(params, producers=None):
    """
    Main execution path for the ingest module.

    :return: Module result
    :rtype: dict
    """
    module = PipelineModule(argument_spec=IngestSpec.spec(), params=params)
    workspace = Workspace(module.params["workdir"], producers)

    try:
        if module.params["corpus"]:
            corpus = Path(module.params["corpus"])
        else:
            corpus = workspace.require("corpus")

        try:
            histories = load_corpus(corpus, lenient=module.params["lenient"])
        except CorpusSchemaError as e:
            module.fail_json(
                msg=f"Invalid corpus '{corpus}': {to_text(e)}",
                error_code=getattr(e, "error_code", None),
            )

        write_histories(histories, workspace.histories)
        return module.exit_json(
            changed=True,
            histories=str(workspace.histories),
            users=len(histories),
            documents=sum(len(h.docs) for h in histories),
        )

    except ModuleFailure:
        raise
    except Exception as e:
        module.fail_json(msg=to_text(e), error_code=getattr(e, "error_code", None))
