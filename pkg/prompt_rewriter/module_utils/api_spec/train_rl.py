# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

from prompt_rewriter.module_utils.api_spec.generator import GeneratorSpec


class TrainRlSpec:
    """
    PPO training specification for the train_rl module.

    init=sl starts from the supervised policy; zeros and random
    train from scratch.
    """

    @staticmethod
    def spec():
        """
        Returns the module spec for PPO training.

        Returns:
            Dict: A dictionary containing the module specification.
        """
        spec = GeneratorSpec.module_spec()
        spec.update(
            init=dict(
                type="str",
                required=False,
                default="sl",
                choices=["sl", "zeros", "random"],
            ),
            init_scale=dict(
                type="float",
                required=False,
                default=1.0,
            ),
            policy_in=dict(
                type="path",
                required=False,
            ),
            policy_out=dict(
                type="path",
                required=False,
            ),
            clip_epsilon=dict(
                type="float",
                required=False,
                default=0.2,
            ),
            learning_rate=dict(
                type="float",
                required=False,
                default=0.05,
            ),
            ppo_epochs=dict(
                type="int",
                required=False,
                default=4,
            ),
            batch_episodes=dict(
                type="int",
                required=False,
                default=32,
            ),
            entropy_coef=dict(
                type="float",
                required=False,
                default=0.01,
            ),
            baseline_decay=dict(
                type="float",
                required=False,
                default=0.9,
            ),
            max_episodes=dict(
                type="int",
                required=False,
                default=3000,
            ),
            eval_every=dict(
                type="int",
                required=False,
                default=10,
            ),
        )
        return spec
