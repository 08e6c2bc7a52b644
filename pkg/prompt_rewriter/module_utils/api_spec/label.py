# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

from prompt_rewriter.module_utils.api_spec.generator import GeneratorSpec


class LabelSpec:
    """Best-prompt labelling specification for the label module."""

    @staticmethod
    def spec():
        """
        Returns the module spec for best-prompt labelling.

        Returns:
            Dict: A dictionary containing the module specification.
        """
        spec = GeneratorSpec.module_spec()
        spec.update(
            splits=dict(
                type="list",
                elements="str",
                required=False,
                default=["train", "validation"],
                choices=["train", "validation"],
            ),
        )
        return spec
