# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

from prompt_rewriter.module_utils.api_spec.generator import GeneratorSpec


class SplitSpec:
    """User split specification for the split module."""

    @staticmethod
    def spec():
        """
        Returns the module spec for user splits.

        Returns:
            Dict: A dictionary containing the module specification.
        """
        spec = GeneratorSpec.workspace()
        spec.update(
            domain=dict(
                type="str",
                required=False,
                default="Review",
                choices=["Email", "Review", "Social"],
            ),
            ratios=dict(
                type="list",
                elements="int",
                required=False,
                default=[85, 5, 10],
            ),
            context_budget_tokens=dict(
                type="int",
                required=False,
                default=30,
            ),
        )
        return spec
