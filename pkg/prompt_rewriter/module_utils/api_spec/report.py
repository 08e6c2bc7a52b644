# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

from prompt_rewriter.module_utils.api_spec.generator import GeneratorSpec


class ReportSpec:
    """Report rendering specification for the report module."""

    @staticmethod
    def spec():
        """
        Returns the module spec for report rendering.

        Returns:
            Dict: A dictionary containing the module specification.
        """
        spec = GeneratorSpec.workspace()
        spec.update(
            name=dict(
                type="str",
                required=False,
                default="eval",
            ),
            summary=dict(
                type="path",
                required=False,
            ),
        )
        return spec
