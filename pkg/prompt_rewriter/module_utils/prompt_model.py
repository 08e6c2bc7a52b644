# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""Structured prompts, their canonical text form, and rewrite labels.

A prompt is rendered line by line::

    <instruction>
    <immediate context>
    Past document summary: <sentence> <sentence> ...
    Keywords: <keyword> | <keyword> | ...
    Writing style: <phrase> | <phrase> | ...
    Past document: <entry>
    Past document: <entry>

Empty sections are omitted. The rendered text is the exact string sent to the
generator and the cache key material, so the format must never drift.
"""

import logging
import re
from enum import Enum
from typing import Dict, List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from prompt_rewriter.module_utils.exceptions import LabelParseError

LOG = logging.getLogger(__name__)

DEFAULT_INSTRUCTION = "Finish the passage in the user voice."
STYLE_INSTRUCTION = "Summarize the author's writing style in detail."

SUMMARY_HEADER = "Past document summary: "
KEYWORDS_HEADER = "Keywords: "
STYLE_HEADER = "Writing style: "
ENTRY_HEADER = "Past document: "
ELEMENT_SEPARATOR = " | "

_SENTENCE_END = ".!?"
_INTERNAL_BOUNDARY = re.compile(r"[.!?]\s")
_SENTENCE_SPLIT = re.compile(r"(?<=[.!?]) (?=\S)")


class ElementKind(str, Enum):
    SUMMARY_SENTENCE = "SummarySentence"
    KEYWORD = "Keyword"
    STYLE_PHRASE = "StylePhrase"


SECTION_KINDS: Tuple[ElementKind, ...] = (
    ElementKind.SUMMARY_SENTENCE,
    ElementKind.KEYWORD,
    ElementKind.STYLE_PHRASE,
)

SECTION_FIELDS: Dict[ElementKind, str] = {
    ElementKind.SUMMARY_SENTENCE: "summary",
    ElementKind.KEYWORD: "keywords",
    ElementKind.STYLE_PHRASE: "style",
}

SECTION_HEADERS: Dict[ElementKind, str] = {
    ElementKind.SUMMARY_SENTENCE: SUMMARY_HEADER,
    ElementKind.KEYWORD: KEYWORDS_HEADER,
    ElementKind.STYLE_PHRASE: STYLE_HEADER,
}


class Element(BaseModel):
    """One rewriteable unit: a summary sentence, a keyword, or a style phrase."""

    model_config = ConfigDict(frozen=True)

    kind: ElementKind
    text: str

    @model_validator(mode="after")
    def _check_text(self) -> "Element":
        text = self.text
        if not text or text != text.strip():
            raise ValueError("element text must be nonempty and stripped")
        if "\n" in text or "\r" in text:
            raise ValueError("element text must be a single line")
        if self.kind is ElementKind.SUMMARY_SENTENCE:
            if text[-1] not in _SENTENCE_END:
                raise ValueError("summary sentence must end with terminal punctuation")
            if _INTERNAL_BOUNDARY.search(text):
                raise ValueError("summary sentence must not contain a sentence boundary")
        else:
            if ELEMENT_SEPARATOR in text:
                raise ValueError(f"element text must not contain '{ELEMENT_SEPARATOR}'")
            if text.startswith("|") or text.endswith("|"):
                raise ValueError("element text must not start or end with '|'")
        return self

    @classmethod
    def sentence(cls, text: str) -> "Element":
        return cls(kind=ElementKind.SUMMARY_SENTENCE, text=text)

    @classmethod
    def keyword(cls, text: str) -> "Element":
        return cls(kind=ElementKind.KEYWORD, text=text)

    @classmethod
    def style(cls, text: str) -> "Element":
        return cls(kind=ElementKind.STYLE_PHRASE, text=text)


def _check_kinds(elements: Sequence[Element], kind: ElementKind) -> None:
    for element in elements:
        if element.kind is not kind:
            raise ValueError(f"expected {kind.value} elements, got {element.kind.value}")


class _Sections(BaseModel):
    model_config = ConfigDict(frozen=True)

    summary: Tuple[Element, ...] = ()
    keywords: Tuple[Element, ...] = ()
    style: Tuple[Element, ...] = ()

    @model_validator(mode="after")
    def _check_sections(self):
        for kind in SECTION_KINDS:
            _check_kinds(getattr(self, SECTION_FIELDS[kind]), kind)
        return self

    def section(self, kind: ElementKind) -> Tuple[Element, ...]:
        return getattr(self, SECTION_FIELDS[kind])

    def texts(self, kind: ElementKind) -> Tuple[str, ...]:
        return tuple(element.text for element in self.section(kind))


class RewriteLabel(_Sections):
    """The three rewriteable sections only; the SL training target."""


class PromptDoc(_Sections):
    """A complete prompt: fixed components plus the rewriteable sections."""

    instruction: str = DEFAULT_INSTRUCTION
    immediate_context: str = ""
    ranked_entries: Tuple[str, ...] = ()

    @field_validator("instruction", "immediate_context")
    @classmethod
    def _single_line(cls, value: str) -> str:
        if "\n" in value or "\r" in value:
            raise ValueError("fixed prompt components must be single lines")
        return value

    @field_validator("ranked_entries")
    @classmethod
    def _single_line_entries(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        for entry in value:
            if "\n" in entry or "\r" in entry:
                raise ValueError("ranked entries must be single lines")
        return value

    def with_sections(self, **sections: Sequence[Element]) -> "PromptDoc":
        """Return a copy with some rewriteable sections replaced."""
        data = self.model_dump()
        data.update({name: tuple(elements) for name, elements in sections.items()})
        return PromptDoc.model_validate(data)


def _section_line(kind: ElementKind, elements: Sequence[Element]) -> str:
    joiner = " " if kind is ElementKind.SUMMARY_SENTENCE else ELEMENT_SEPARATOR
    return SECTION_HEADERS[kind] + joiner.join(element.text for element in elements)


def _section_lines(sections: _Sections) -> List[str]:
    lines = []
    for kind in SECTION_KINDS:
        elements = sections.section(kind)
        if elements:
            lines.append(_section_line(kind, elements))
    return lines


def render(prompt: PromptDoc) -> str:
    """Render a prompt into its canonical text form."""
    lines = [prompt.instruction, prompt.immediate_context]
    lines.extend(_section_lines(prompt))
    lines.extend(ENTRY_HEADER + entry for entry in prompt.ranked_entries)
    return "\n".join(lines)


def render_label(label: RewriteLabel) -> str:
    """Render only the rewriteable sections, with the prompt's header grammar."""
    return "\n".join(_section_lines(label))


def label_of(prompt: PromptDoc) -> RewriteLabel:
    return RewriteLabel(summary=prompt.summary, keywords=prompt.keywords, style=prompt.style)


def count_elements(prompt: _Sections) -> Dict[ElementKind, int]:
    return {kind: len(prompt.section(kind)) for kind in SECTION_KINDS}


def apply_label(prompt: PromptDoc, label: RewriteLabel) -> PromptDoc:
    """Put a label's sections back into ``prompt``; fixed components are kept."""
    return prompt.with_sections(summary=label.summary, keywords=label.keywords, style=label.style)


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def _lines_with_offsets(text: str) -> List[Tuple[str, int]]:
    lines = []
    index = 0
    for line in text.split("\n"):
        lines.append((line, index))
        index += len(line) + 1
    return lines


def _match_header(line: str):
    for kind in SECTION_KINDS:
        if line.startswith(SECTION_HEADERS[kind]):
            return kind
    return None


def _parse_section(text: str, line: str, start: int, kind: ElementKind) -> Tuple[Element, ...]:
    header = SECTION_HEADERS[kind]
    body = line[len(header):]
    body_start = start + len(header)
    if kind is ElementKind.SUMMARY_SENTENCE:
        parts = _SENTENCE_SPLIT.split(body)
        joiner = " "
    else:
        parts = body.split(ELEMENT_SEPARATOR)
        joiner = ELEMENT_SEPARATOR

    elements = []
    position = body_start
    for part in parts:
        try:
            elements.append(Element(kind=kind, text=part))
        except ValueError:
            raise LabelParseError(
                "MalformedSeparator", _byte_offset(text, position), f"invalid {kind.value} {part!r}"
            ) from None
        position += len(part) + len(joiner)
    return tuple(elements)


def _parse_sections(text: str, lines: Sequence[Tuple[str, int]]) -> Dict[str, Tuple[Element, ...]]:
    sections: Dict[str, Tuple[Element, ...]] = {}
    for line, start in lines:
        kind = _match_header(line)
        if kind is None:
            raise LabelParseError("UnknownHeader", _byte_offset(text, start), repr(line[:40]))
        name = SECTION_FIELDS[kind]
        if name in sections:
            raise LabelParseError("DuplicateSection", _byte_offset(text, start), name)
        sections[name] = _parse_section(text, line, start, kind)
    return sections


def parse_label(text: str) -> RewriteLabel:
    """Parse text produced by :func:`render_label`.

    Raises:
        LabelParseError: On an unknown header, a repeated section, or an element
            that violates the element invariants.
    """
    if text == "":
        return RewriteLabel()
    return RewriteLabel(**_parse_sections(text, _lines_with_offsets(text)))


def parse_prompt(text: str, lenient: bool = False) -> PromptDoc:
    """Parse text produced by :func:`render` back into a prompt.

    Args:
        text: Rendered prompt.
        lenient: Skip unrecognised lines and sections that fail to parse
            instead of raising.

    Raises:
        LabelParseError: In strict mode, on any grammar violation.
    """
    lines = _lines_with_offsets(text)
    instruction = lines[0][0]
    immediate_context = lines[1][0] if len(lines) > 1 else ""

    section_lines = []
    entries = []
    for line, start in lines[2:]:
        if line.startswith(ENTRY_HEADER):
            entries.append(line[len(ENTRY_HEADER):])
        elif entries and not lenient:
            raise LabelParseError("UnknownHeader", _byte_offset(text, start), "section after entries")
        elif _match_header(line) is not None:
            section_lines.append((line, start))
        elif lenient:
            LOG.debug("skipping unrecognised prompt line %r", line[:40])
        else:
            raise LabelParseError("UnknownHeader", _byte_offset(text, start), repr(line[:40]))

    if lenient:
        sections: Dict[str, Tuple[Element, ...]] = {}
        for line, start in section_lines:
            try:
                sections.update(_parse_sections(text, [(line, start)]))
            except LabelParseError:
                LOG.debug("skipping unparsable section line %r", line[:40])
    else:
        sections = _parse_sections(text, section_lines)

    return PromptDoc(
        instruction=instruction,
        immediate_context=immediate_context,
        ranked_entries=tuple(entries),
        **sections,
    )
