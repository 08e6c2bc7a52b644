# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""Pipeline configuration files.

The configuration is an INI file in the same dialect as ``ansible.cfg``: one
section per subcommand (``[label]``, ``[train_rl]`` ...) plus the shared
sections ``[workspace]``, ``[logging]`` and ``[generator]``. Values stay
strings here; type coercion happens when a module validates its parameters
against its argument spec.
"""

import configparser
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from prompt_rewriter.module_utils.exceptions import ConfigError

SHARED_SECTIONS = ("workspace", "logging")
GENERATOR_SECTION = "generator"

# CLI gateway flags -> keys of the ``generator`` option.
GENERATOR_FLAGS = {
    "backend": "backend",
    "endpoint": "endpoint_url",
    "model": "model_name",
    "budget": "budget_calls",
    "max_inflight": "max_inflight",
    "cache_dir": "cache_dir",
}


def load_config(path: Optional[str]) -> Dict[str, Dict[str, str]]:
    """Read an INI config file into ``{section: {key: value}}``.

    Args:
        path: File to read; ``None`` yields an empty configuration.

    Returns:
        Dict[str, Dict[str, str]]: Raw string values per section.

    Raises:
        ConfigError: When the file is missing or not valid INI.
    """
    if path is None:
        return {}
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError(f"config file '{path}' does not exist")

    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(config_path, encoding="utf-8")
    except configparser.Error as e:
        raise ConfigError(f"config file '{path}' is not valid: {e}") from e

    return {section: dict(parser.items(section)) for section in parser.sections()}


def build_params(
    argument_spec: Mapping[str, Any],
    config: Mapping[str, Mapping[str, str]],
    section: str,
    overrides: Optional[Mapping[str, Any]] = None,
    generator_overrides: Optional[Mapping[str, Any]] = None,
) -> Dict[str, Any]:
    """Merge config sections and CLI overrides for one subcommand.

    Precedence is argument spec defaults < config file < CLI flags. Keys from the shared
    sections are only taken when the argument spec declares them; keys in the module's
    own section are passed through untouched so the validator reports typos.

    Args:
        argument_spec: The subcommand's argument spec.
        config: Output of :func:`load_config`.
        section: Name of the subcommand's own section.
        overrides: Values given on the command line (``None`` values are ignored).
        generator_overrides: Gateway flags keyed by CLI flag name.

    Returns:
        Dict[str, Any]: Raw parameters ready for validation.
    """
    params: Dict[str, Any] = {}
    for shared in SHARED_SECTIONS:
        for key, value in config.get(shared, {}).items():
            if key in argument_spec:
                params[key] = value

    params.update(config.get(section, {}))

    if GENERATOR_SECTION in argument_spec:
        generator = dict(config.get(GENERATOR_SECTION, {}))
        for flag, value in (generator_overrides or {}).items():
            if value is not None:
                generator[GENERATOR_FLAGS[flag]] = value
        params[GENERATOR_SECTION] = generator

    for key, value in (overrides or {}).items():
        if value is not None and key in argument_spec:
            params[key] = value

    return params
