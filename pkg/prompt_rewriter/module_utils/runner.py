# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""Parameter validation and result reporting for pipeline modules.

``PipelineModule`` plays the role ``AnsibleModule`` plays for a collection
module: it validates the raw parameters against the module's argument spec and
offers ``fail_json`` / ``exit_json`` to end the run.
"""

from typing import Any, Dict, List, Mapping, Optional, Sequence

from ansible.module_utils.common.arg_spec import ArgumentSpecValidator

from prompt_rewriter.module_utils.exceptions import PromptRewriterError


class ModuleUsageError(PromptRewriterError):
    """Parameters failed validation against the argument spec."""

    def __init__(self, messages: Sequence[str]):
        super().__init__("; ".join(messages), error_code="UsageError")
        self.messages = list(messages)


class ModuleFailure(PromptRewriterError):
    """Raised by :meth:`PipelineModule.fail_json`."""

    def __init__(self, msg: str, result: Optional[Dict[str, Any]] = None):
        result = result or {}
        super().__init__(
            msg,
            error_code=result.get("error_code"),
            http_status_code=result.get("http_status"),
        )
        self.result = result


class PipelineModule:
    """Validated parameters plus the fail/exit protocol for one subcommand.

    Args:
        argument_spec: Spec dict as returned by an ``XxxSpec.spec()``.
        params: Raw parameters (strings from config files are coerced).
        mutually_exclusive: Groups of parameters that cannot be combined.
        required_if: ``[key, value, [requirements], any]`` entries.
        required_one_of: Groups where at least one parameter must be set.

    Raises:
        ModuleUsageError: When validation fails.
    """

    def __init__(
        self,
        argument_spec: Mapping[str, Any],
        params: Mapping[str, Any],
        mutually_exclusive: Optional[List[List[str]]] = None,
        required_if: Optional[List[list]] = None,
        required_one_of: Optional[List[List[str]]] = None,
    ):
        validator = ArgumentSpecValidator(
            dict(argument_spec),
            mutually_exclusive=mutually_exclusive,
            required_if=required_if,
            required_one_of=required_one_of,
        )
        result = validator.validate(dict(params))
        if result.error_messages:
            raise ModuleUsageError(result.error_messages)
        self.params: Dict[str, Any] = result.validated_parameters
        self.result: Dict[str, Any] = {}

    def fail_json(self, msg: str, **kwargs: Any) -> None:
        """Abort the module run with ``msg`` and extra result fields."""
        raise ModuleFailure(msg, result=dict(kwargs, failed=True, msg=msg))

    def exit_json(self, **kwargs: Any) -> Dict[str, Any]:
        """Record and return the module result."""
        self.result = dict(kwargs)
        self.result.setdefault("changed", False)
        return self.result
