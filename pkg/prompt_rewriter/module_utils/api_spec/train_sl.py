# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

from prompt_rewriter.module_utils.api_spec.generator import GeneratorSpec


class TrainSlSpec:
    """Supervised policy fit specification for the train_sl module."""

    @staticmethod
    def spec():
        """
        Returns the module spec for supervised policy fitting.

        Returns:
            Dict: A dictionary containing the module specification.
        """
        spec = GeneratorSpec.workspace()
        spec.update(
            epochs=dict(
                type="int",
                required=False,
                default=300,
            ),
            learning_rate=dict(
                type="float",
                required=False,
                default=0.2,
            ),
            init=dict(
                type="str",
                required=False,
                default="zeros",
                choices=["zeros", "random"],
            ),
            balance_classes=dict(
                type="bool",
                required=False,
                default=True,
            ),
            policy_out=dict(
                type="path",
                required=False,
            ),
        )
        return spec
