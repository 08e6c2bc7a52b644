# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

from prompt_rewriter.module_utils.api_spec.generator import GeneratorSpec


class IngestSpec:
    """Corpus ingestion specification for the ingest module."""

    @staticmethod
    def spec():
        """
        Returns the module spec for corpus ingestion.

        Returns:
            Dict: A dictionary containing the module specification.
        """
        spec = GeneratorSpec.workspace()
        spec.update(
            corpus=dict(
                type="path",
                required=False,
            ),
            lenient=dict(
                type="bool",
                required=False,
                default=False,
            ),
        )
        return spec
