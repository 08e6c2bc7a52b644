# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.


class GeneratorSpec:
    """
    Shared options of every pipeline module.

    ``workdir``, ``seed`` and ``log_level`` come from the ``[workspace]`` and
    ``[logging]`` config sections or the global CLI flags; the ``generator``
    dictionary comes from the ``[generator]`` section and the gateway flags.
    """

    @staticmethod
    def workspace():
        """
        Returns the workspace options.

        Returns:
            Dict: workdir, seed and log_level option definitions.
        """
        return dict(
            workdir=dict(
                type="path",
                required=False,
                default="./work",
            ),
            seed=dict(
                type="int",
                required=False,
                default=0,
            ),
            log_level=dict(
                type="str",
                required=False,
                default="INFO",
                choices=["DEBUG", "INFO", "WARNING", "ERROR"],
            ),
        )

    @staticmethod
    def spec():
        """
        Returns the generator option.

        Returns:
            Dict: The ``generator`` dict option with its suboptions.
        """
        return dict(
            generator=dict(
                type="dict",
                required=False,
                default={},
                apply_defaults=True,
                options=dict(
                    backend=dict(
                        type="str",
                        required=False,
                        default="simulated",
                        choices=["simulated", "remote"],
                    ),
                    endpoint_url=dict(
                        type="str",
                        required=False,
                    ),
                    model_name=dict(
                        type="str",
                        required=False,
                        default="simulator",
                    ),
                    auth_env_var=dict(
                        type="str",
                        required=False,
                        default="GENERATOR_API_KEY",
                    ),
                    temperature=dict(
                        type="float",
                        required=False,
                        default=0.0,
                    ),
                    allow_sampling=dict(
                        type="bool",
                        required=False,
                        default=False,
                    ),
                    max_output_tokens=dict(
                        type="int",
                        required=False,
                        default=256,
                    ),
                    max_inflight=dict(
                        type="int",
                        required=False,
                        default=4,
                    ),
                    budget_calls=dict(
                        type="int",
                        required=False,
                        default=100000,
                    ),
                    cache_dir=dict(
                        type="path",
                        required=False,
                    ),
                    timeout_seconds=dict(
                        type="float",
                        required=False,
                        default=60.0,
                    ),
                    backoff_seconds=dict(
                        type="float",
                        required=False,
                        default=1.0,
                    ),
                    sim_max_words=dict(
                        type="int",
                        required=False,
                        default=120,
                    ),
                    style_trigger_token=dict(
                        type="str",
                        required=False,
                        default="thorough",
                    ),
                    canned_style_reply=dict(
                        type="str",
                        required=False,
                    ),
                ),
                required_if=[["backend", "remote", ["endpoint_url"]]],
            ),
        )

    @staticmethod
    def module_spec():
        """Workspace options plus the generator option."""
        spec = GeneratorSpec.workspace()
        spec.update(GeneratorSpec.spec())
        return spec
