# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

from traceback import format_exc

from ansible.module_utils.common.text.converters import to_text
from pydantic import ValidationError

from prompt_rewriter.module_utils.exceptions import AuthMissingError
from prompt_rewriter.module_utils.gateway import Generator, GeneratorConfig
from prompt_rewriter.module_utils.simulator import SimProfile

PROFILE_KEYS = {
    "sim_max_words": "max_words",
    "style_trigger_token": "style_trigger_token",
    "canned_style_reply": "canned_style_reply",
}


def generator_settings(options):
    """Split the ``generator`` option into a gateway config and a simulator profile."""
    options = {key: value for key, value in (options or {}).items() if value is not None}
    profile = {PROFILE_KEYS[key]: options.pop(key) for key in list(options) if key in PROFILE_KEYS}
    return GeneratorConfig(**options), SimProfile(**profile)


def get_generator_client(module):
    """Initialize and return a generator client with proper error handling.

    Args:
        module: A PipelineModule whose parameters include the ``generator``
            dictionary (backend, endpoint_url, model_name, auth_env_var, ...).

    Returns:
        Generator: A ready generator client.

    Raises:
        ModuleFailure: When the token is missing or the options are invalid.
    """
    try:
        config, profile = generator_settings(module.params["generator"])
        return Generator(config, profile)
    except AuthMissingError as e:
        module.fail_json(
            msg="Authentication failed: {0}".format(to_text(e)),
            error_code=getattr(e, "error_code", None),
            http_status=getattr(e, "http_status_code", None),
        )
    except ValidationError as e:
        module.fail_json(msg="Invalid generator options: {0}".format(to_text(e)))
    except Exception as e:
        module.fail_json(msg=to_text(e), exception=format_exc())
