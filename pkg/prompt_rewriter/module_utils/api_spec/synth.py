# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

from prompt_rewriter.module_utils.api_spec.generator import GeneratorSpec


class SynthSpec:
    """
    Synthetic corpus specification for the synth module.

    The counts describe one user's most recent document: its relevant and
    noise keywords, its relevant and noise summary sentences, and its style
    phrases.
    """

    @staticmethod
    def spec():
        """
        Returns the module spec for synthetic corpus generation.

        Returns:
            Dict: A dictionary containing the module specification.
        """
        spec = GeneratorSpec.workspace()
        spec.update(
            output=dict(
                type="path",
                required=False,
            ),
            num_users=dict(
                type="int",
                required=False,
                default=200,
            ),
            docs_per_user=dict(
                type="int",
                required=False,
                default=4,
            ),
            relevant_keywords=dict(
                type="int",
                required=False,
                default=6,
            ),
            noise_keywords=dict(
                type="int",
                required=False,
                default=4,
            ),
            relevant_sentences=dict(
                type="int",
                required=False,
                default=0,
            ),
            noise_sentences=dict(
                type="int",
                required=False,
                default=4,
            ),
            noise_sentence_words=dict(
                type="int",
                required=False,
                default=12,
            ),
            style_phrases=dict(
                type="int",
                required=False,
                default=4,
            ),
            style_mix=dict(
                type="float",
                required=False,
                default=0.0,
            ),
            shuffle_sections=dict(
                type="bool",
                required=False,
                default=True,
            ),
            domain=dict(
                type="str",
                required=False,
                default="Review",
                choices=["Email", "Review", "Social"],
            ),
            context_budget_tokens=dict(
                type="int",
                required=False,
                default=30,
            ),
        )
        return spec
