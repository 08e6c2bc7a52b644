# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

from prompt_rewriter.module_utils.api_spec.generator import GeneratorSpec


class VariantsSpec:
    """Prompt variant sampling specification for the variants module."""

    @staticmethod
    def spec():
        """
        Returns the module spec for variant sampling.

        Returns:
            Dict: A dictionary containing the module specification.
        """
        spec = GeneratorSpec.workspace()
        spec.update(
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
            splits=dict(
                type="list",
                elements="str",
                required=False,
                default=["train", "validation"],
                choices=["train", "validation", "test"],
            ),
        )
        return spec
