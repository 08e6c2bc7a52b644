# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

from prompt_rewriter.module_utils.api_spec.generator import GeneratorSpec


class AblateSpec:
    """Ablation grid specification for the ablate module."""

    @staticmethod
    def spec():
        """
        Returns the module spec for ablation grids.

        Returns:
            Dict: A dictionary containing the module specification.
        """
        spec = GeneratorSpec.module_spec()
        spec.update(
            kind=dict(
                type="str",
                required=False,
                default="OriginalVariants",
                choices=["OriginalVariants", "ElementRemoval", "UniformStyle"],
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
            name=dict(
                type="str",
                required=False,
            ),
        )
        return spec
