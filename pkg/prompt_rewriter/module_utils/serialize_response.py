# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

from enum import Enum
from pathlib import Path
from typing import Any


def serialize_response(response: Any) -> Any:
    """
    Convert a module result value into plain JSON-compatible data.

    Pydantic models are dumped in JSON mode, paths become strings, enums their
    values; containers are converted recursively.

    Args:
        response: The value to serialize.

    Returns:
        Any: Dicts, lists, strings, numbers, booleans or None.

    Examples:
        >>> serialize_response(CacheStats(hits=2))
        {'hits': 2, 'misses': 0, 'calls': 0}
    """
    if hasattr(response, "model_dump"):
        return response.model_dump(mode="json")
    if isinstance(response, Path):
        return str(response)
    if isinstance(response, Enum):
        return response.value
    if isinstance(response, dict):
        return {str(key): serialize_response(value) for key, value in response.items()}
    if isinstance(response, (list, tuple)):
        return [serialize_response(value) for value in response]
    return response
