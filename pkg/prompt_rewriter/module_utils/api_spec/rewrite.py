# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

from prompt_rewriter.module_utils.api_spec.generator import GeneratorSpec


class RewriteSpec:
    """Prompt rewriting specification for the rewrite module."""

    @staticmethod
    def spec():
        """
        Returns the module spec for prompt rewriting.

        Returns:
            Dict: A dictionary containing the module specification.
        """
        spec = GeneratorSpec.workspace()
        spec.update(
            method=dict(
                type="str",
                required=False,
                default="slrl",
                choices=["original", "rules", "sl", "rl", "slrl"],
            ),
            split=dict(
                type="str",
                required=False,
                default="test",
                choices=["train", "validation", "test"],
            ),
            policy=dict(
                type="path",
                required=False,
            ),
            output=dict(
                type="path",
                required=False,
            ),
        )
        return spec
