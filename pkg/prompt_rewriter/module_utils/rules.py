# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""Hand-written rewrite rules distilled from the edits a trained rewriter makes."""

from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field

from prompt_rewriter.module_utils.corpus import Domain, RewriteInput, check_rewrite_input
from prompt_rewriter.module_utils.extraction import cosine_tf, is_content_token, load_stopwords
from prompt_rewriter.module_utils.metrics import tokenize
from prompt_rewriter.module_utils.prompt_model import Element, PromptDoc

UNIFORM_STYLE_PHRASE = "the author is thorough, and they make the changes they have"


class Rule(str, Enum):
    DROP_SUMMARY = "DropSummary"
    FILTER_KEYWORDS = "FilterKeywords"
    REORDER_KEYWORDS_BY_APPEARANCE = "ReorderKeywordsByAppearance"
    REPEAT_TOP_KEYWORDS = "RepeatTopKeywords"
    DROP_STYLE = "DropStyle"
    UNIFORM_THOROUGH_STYLE = "UniformThoroughStyle"
    KEEP_INTEREST_STYLE_PHRASES = "KeepInterestStylePhrases"


# Application order.
RULE_ORDER = tuple(Rule)

_COMMON = frozenset(
    {
        Rule.DROP_SUMMARY,
        Rule.FILTER_KEYWORDS,
        Rule.REORDER_KEYWORDS_BY_APPEARANCE,
        Rule.REPEAT_TOP_KEYWORDS,
    }
)

DOMAIN_PRESETS: Dict[Domain, FrozenSet[Rule]] = {
    Domain.EMAIL: _COMMON | {Rule.UNIFORM_THOROUGH_STYLE},
    Domain.REVIEW: _COMMON | {Rule.DROP_STYLE},
    Domain.SOCIAL: _COMMON | {Rule.KEEP_INTEREST_STYLE_PHRASES},
}


class RuleSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    rules: FrozenSet[Rule] = frozenset()
    relevance_threshold: float = Field(default=0.1, ge=0)
    repeat_top: int = Field(default=2, ge=0)

    @classmethod
    def for_domain(cls, domain: Domain, **kwargs) -> "RuleSet":
        return cls(rules=DOMAIN_PRESETS[Domain(domain)], **kwargs)


def _relevance(text: str, context_tokens: Sequence[str]) -> float:
    return cosine_tf(tokenize(text), context_tokens)


def _first_position(tokens: Sequence[str], haystack: Sequence[str]) -> Optional[int]:
    n = len(tokens)
    if not n:
        return None
    for start in range(len(haystack) - n + 1):
        if list(haystack[start:start + n]) == list(tokens):
            return start
    return None


def reorder_by_appearance(keywords: Sequence[Element], prompt: PromptDoc) -> List[Element]:
    """Stable sort by first occurrence in the context followed by the entries; unseen go last."""
    haystack = tokenize(prompt.immediate_context)
    for entry in prompt.ranked_entries:
        haystack.extend(tokenize(entry))
    unseen = len(haystack) + 1
    positions = [_first_position(tokenize(k.text), haystack) for k in keywords]
    order = sorted(
        range(len(keywords)),
        key=lambda i: (positions[i] if positions[i] is not None else unseen, i),
    )
    return [keywords[i] for i in order]


def repeat_top_keywords(keywords: Sequence[Element], context_tokens: Sequence[str], m: int) -> List[Element]:
    """Emit the ``m`` most relevant keywords twice, adjacently; ties keep list order."""
    ranked = sorted(range(len(keywords)), key=lambda i: (-_relevance(keywords[i].text, context_tokens), i))
    top = set(ranked[:m])
    result = []
    for i, keyword in enumerate(keywords):
        result.append(keyword)
        if i in top:
            result.append(keyword)
    return result


def rule_rewrite(rewrite_input: RewriteInput, ruleset: Optional[RuleSet] = None) -> PromptDoc:
    """Apply the enabled rules, in their fixed order, to the prompt's sections.

    Without a ruleset the domain preset is used.
    """
    rewrite_input = check_rewrite_input(rewrite_input)
    prompt = rewrite_input.prompt
    ruleset = ruleset or RuleSet.for_domain(rewrite_input.domain)
    context_tokens = tokenize(prompt.immediate_context)

    summary = list(prompt.summary)
    keywords = list(prompt.keywords)
    style = list(prompt.style)

    for rule in RULE_ORDER:
        if rule not in ruleset.rules:
            continue
        if rule is Rule.DROP_SUMMARY:
            summary = []
        elif rule is Rule.FILTER_KEYWORDS:
            keywords = [
                k for k in keywords if _relevance(k.text, context_tokens) >= ruleset.relevance_threshold
            ]
        elif rule is Rule.REORDER_KEYWORDS_BY_APPEARANCE:
            keywords = reorder_by_appearance(keywords, prompt)
        elif rule is Rule.REPEAT_TOP_KEYWORDS:
            keywords = repeat_top_keywords(keywords, context_tokens, ruleset.repeat_top)
        elif rule is Rule.DROP_STYLE:
            style = []
        elif rule is Rule.UNIFORM_THOROUGH_STYLE:
            style = [Element.style(UNIFORM_STYLE_PHRASE)]
        elif rule is Rule.KEEP_INTEREST_STYLE_PHRASES:
            stopwords = load_stopwords()
            interest = {t for t in context_tokens if is_content_token(t, stopwords)}
            style = [s for s in style if interest.intersection(tokenize(s.text))]

    return prompt.with_sections(summary=summary, keywords=keywords, style=style)
