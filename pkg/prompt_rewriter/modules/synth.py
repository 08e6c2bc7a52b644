# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""
Pipeline module that writes a synthetic corpus.

The corpus has a known reward structure under the simulated generator, so
the rest of the pipeline can be checked end to end without a remote model.
"""

from pathlib import Path

from ansible.module_utils.common.text.converters import to_text
from pydantic import ValidationError

from prompt_rewriter.module_utils.api_spec.synth import SynthSpec
from prompt_rewriter.module_utils.runner import ModuleFailure, PipelineModule
from prompt_rewriter.module_utils.synthetic import SyntheticSpec, write_synthetic_corpus
from prompt_rewriter.module_utils.workspace import Workspace

DOCUMENTATION = r"""
---
module: synth

short_description: Write a synthetic corpus with a known reward structure.

description:
    - Builds one user history per synthetic user and writes it as a line-delimited JSON corpus.
    - The most recent document of every user carries precomputed prompt sections that mix
      relevant and noise elements.
    - Output is byte-identical for the same options and seed.

options:
    output:
        description: Corpus file to write; defaults to C(corpus.jsonl) in the workdir.
        type: path
    num_users:
        description: Number of synthetic users.
        type: int
        default: 200
    docs_per_user:
        description: Documents per user, the last one being the writing task.
        type: int
        default: 4
    relevant_keywords:
        description: Keywords that appear in the ground truth, in canonical order.
        type: int
        default: 6
    noise_keywords:
        description: Keywords mixed into the prompt that never appear in the ground truth.
        type: int
        default: 4
    relevant_sentences:
        description: Summary sentences that appear verbatim in the ground truth.
        type: int
        default: 0
    noise_sentences:
        description: Off-topic summary sentences.
        type: int
        default: 4
    noise_sentence_words:
        description: Words per noise sentence.
        type: int
        default: 12
    style_phrases:
        description: Writing style phrases per prompt.
        type: int
        default: 4
    style_mix:
        description: Probability that a style phrase mentions the simulator trigger token.
        type: float
        default: 0.0
    shuffle_sections:
        description: Shuffle keyword and summary sections; when false they keep canonical order.
        type: bool
        default: true
    domain:
        description: Domain of the corpus.
        type: str
        choices: ['Email', 'Review', 'Social']
        default: Review
    context_budget_tokens:
        description: Length of the start segment, equal to the immediate context budget.
        type: int
        default: 30
"""

EXAMPLES = r"""
prompt-rewriter --workdir ./work --seed 0 synth --num-users 50
prompt-rewriter synth --noise-keywords 0 --noise-sentences 0 --no-shuffle-sections
"""

RETURN = r"""
corpus:
    description: Path of the written corpus.
    returned: always
    type: str
users:
    description: Number of users written.
    returned: always
    type: int
documents:
    description: Number of documents written.
    returned: always
    type: int
"""


def build_synthetic_spec(module_params):
    """Map module parameters onto a SyntheticSpec."""
    return SyntheticSpec(
        seed=module_params["seed"],
        num_users=module_params["num_users"],
        docs_per_user=module_params["docs_per_user"],
        relevant_keywords_per_task=module_params["relevant_keywords"],
        noise_keywords_per_task=module_params["noise_keywords"],
        relevant_sentences=module_params["relevant_sentences"],
        noise_sentences=module_params["noise_sentences"],
        noise_sentence_words=module_params["noise_sentence_words"],
        style_phrases=module_params["style_phrases"],
        style_mix=module_params["style_mix"],
        shuffle_sections=module_params["shuffle_sections"],
        domain=module_params["domain"],
        context_budget_tokens=module_params["context_budget_tokens"],
    )


def main(params, producers=None):
    """
    Main execution path for the synth module.

    :return: Module result
    :rtype: dict
    """
    module = PipelineModule(argument_spec=SynthSpec.spec(), params=params)
    workspace = Workspace(module.params["workdir"], producers)

    try:
        try:
            spec = build_synthetic_spec(module.params)
        except ValidationError as e:
            module.fail_json(msg=f"Invalid synthetic corpus options: {to_text(e)}")

        output = module.params["output"] or str(workspace.corpus)
        histories = write_synthetic_corpus(spec, Path(output))
        return module.exit_json(
            changed=True,
            corpus=output,
            users=len(histories),
            documents=sum(len(h.docs) for h in histories),
        )

    except ModuleFailure:
        raise
    except Exception as e:
        module.fail_json(msg=to_text(e), error_code=getattr(e, "error_code", None))