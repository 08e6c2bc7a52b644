# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

import logging

from rich.console import Console
from rich.logging import RichHandler

LOG_FORMAT = "%(name)s: %(message)s"


def configure_logging(log_level: str = "INFO") -> None:
    """Install a single Rich handler on the package logger.

    Calling this more than once replaces the previous handler, so every
    subcommand can call it with its own ``log_level``.

    Args:
        log_level: Standard level name such as ``"DEBUG"`` or ``"INFO"``.
    """
    logger = logging.getLogger("prompt_rewriter")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    handler = RichHandler(
        console=Console(stderr=True),
        show_time=False,
        show_path=False,
        rich_tracebacks=False,
    )
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(handler)
    logger.setLevel(log_level.upper())
    logger.propagate = False
