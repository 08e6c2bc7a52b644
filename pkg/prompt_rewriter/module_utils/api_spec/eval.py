# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

from prompt_rewriter.module_utils.api_spec.generator import GeneratorSpec


class EvalSpec:
    """
    Method comparison specification for the eval module.

    best adds the oracle best-prompt row, which reads the ground truth to
    pick variants and is reported for reference only.
    """

    @staticmethod
    def spec():
        """
        Returns the module spec for method comparison.

        Returns:
            Dict: A dictionary containing the module specification.
        """
        spec = GeneratorSpec.module_spec()
        spec.update(
            methods=dict(
                type="list",
                elements="str",
                required=False,
                default=["original", "rules", "sl", "slrl"],
                choices=["original", "rules", "sl", "rl", "slrl", "best"],
            ),
            split=dict(
                type="str",
                required=False,
                default="test",
                choices=["train", "validation", "test"],
            ),
            policy_sl=dict(
                type="path",
                required=False,
            ),
            policy_rl=dict(
                type="path",
                required=False,
            ),
            policy_slrl=dict(
                type="path",
                required=False,
            ),
            name=dict(
                type="str",
                required=False,
                default="eval",
            ),
        )
        return spec
