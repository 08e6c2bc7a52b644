# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""Prompt rewriting for personalized generation with a frozen text generator."""

__version__ = "0.1.0"
