# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""Exception hierarchy shared by every pipeline stage.

All errors carry a human readable message plus optional ``error_code`` and
``http_status_code`` attributes, so callers can report them uniformly with
``getattr(e, "error_code", None)``.
"""

from typing import Optional


class PromptRewriterError(Exception):
    """Base class for all pipeline errors."""

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        http_status_code: Optional[int] = None,
    ):
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.http_status_code = http_status_code

    def __str__(self) -> str:
        if self.error_code:
            return f"{self.error_code}: {self.message}"
        return self.message


class ConfigError(PromptRewriterError):
    """Invalid or unreadable configuration."""

    def __init__(self, message: str):
        super().__init__(message, error_code="ConfigError")


class LabelParseError(PromptRewriterError):
    """A label or prompt text does not follow the section grammar.

    Attributes:
        kind: One of ``UnknownHeader``, ``MalformedSeparator``, ``DuplicateSection``.
        offset: Byte offset (UTF-8) of the offending position in the input text.
    """

    def __init__(self, kind: str, offset: int, detail: str = ""):
        message = f"{kind} at offset {offset}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message, error_code=kind)
        self.kind = kind
        self.offset = offset


class EmptyReferenceError(PromptRewriterError):
    def __init__(self):
        super().__init__("reference token sequence is empty", error_code="EmptyReference")


class InvalidSampleError(PromptRewriterError):
    def __init__(self, message: str):
        super().__init__(message, error_code="InvalidSample")


class CorpusSchemaError(PromptRewriterError):
    """A corpus record is missing a required field or is not valid JSON."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}", error_code="SchemaError")
        self.line = line


class TooShortHistoryError(PromptRewriterError):
    def __init__(self, user_id: str, count: int):
        super().__init__(
            f"user '{user_id}' has {count} document(s); at least 2 are required",
            error_code="TooShortHistory",
        )


class EmptyDocumentError(PromptRewriterError):
    def __init__(self, user_id: str, doc_id: str):
        super().__init__(
            f"document '{doc_id}' of user '{user_id}' has an empty body",
            error_code="EmptyDocument",
        )


class SplitError(PromptRewriterError):
    def __init__(self, message: str):
        super().__init__(message, error_code="SplitError")


class BudgetExhaustedError(PromptRewriterError):
    def __init__(self, budget: int):
        super().__init__(
            f"generator call budget of {budget} call(s) is exhausted",
            error_code="BudgetExhausted",
        )


class AuthMissingError(PromptRewriterError):
    def __init__(self, env_var: str):
        super().__init__(
            f"environment variable '{env_var}' holding the generator API token is not set",
            error_code="AuthMissing",
        )


class RemoteError(PromptRewriterError):
    """The remote completion endpoint answered with a non-success status."""

    def __init__(self, status: Optional[int], body: str):
        super().__init__(
            f"generator endpoint returned status {status}: {body[:200]}",
            error_code="RemoteError",
            http_status_code=status,
        )
        self.status = status
        self.body = body


class VariantGenerationError(PromptRewriterError):
    """Generation failed for one prompt variant; ``index`` is its position."""

    def __init__(self, index: int, cause: Exception):
        super().__init__(
            f"generation failed for variant {index}: {cause}",
            error_code=getattr(cause, "error_code", None) or "VariantGenerationError",
            http_status_code=getattr(cause, "http_status_code", None),
        )
        self.index = index
        self.cause = cause


class InformationFlowError(PromptRewriterError):
    """A rewrite path was handed a record that carries the ground truth."""

    def __init__(self, message: str):
        super().__init__(message, error_code="InformationFlow")


class MissingArtifactError(PromptRewriterError):
    def __init__(self, path: str):
        super().__init__(f"required artifact '{path}' does not exist", error_code="MissingArtifact")
        self.path = path


class NonFiniteGradientError(PromptRewriterError):
    def __init__(self):
        super().__init__("policy gradient contains non-finite values", error_code="NonFiniteGradient")
