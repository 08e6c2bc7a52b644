# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

from prompt_rewriter.module_utils.api_spec.generator import GeneratorSpec
from prompt_rewriter.module_utils.prompt_model import DEFAULT_INSTRUCTION


class PromptsSpec:
    """
    Original prompt assembly specification for the prompts module.

    Style synthesis calls go through the generator, so the generator option
    is part of this spec.
    """

    @staticmethod
    def spec():
        """
        Returns the module spec for original prompt assembly.

        Returns:
            Dict: A dictionary containing the module specification.
        """
        spec = GeneratorSpec.module_spec()
        spec.update(
            k=dict(
                type="int",
                required=False,
                default=5,
            ),
            max_sentences=dict(
                type="int",
                required=False,
                default=6,
            ),
            max_keywords=dict(
                type="int",
                required=False,
                default=28,
            ),
            style_docs=dict(
                type="int",
                required=False,
                default=5,
            ),
            prompt_budget_tokens=dict(
                type="int",
                required=False,
                default=1024,
            ),
            instruction=dict(
                type="str",
                required=False,
                default=DEFAULT_INSTRUCTION,
            ),
            min_variants=dict(
                type="int",
                required=False,
                default=5,
            ),
            per_type=dict(
                type="int",
                required=False,
                default=4,
            ),
            cap_attempts=dict(
                type="int",
                required=False,
                default=64,
            ),
        )
        return spec
