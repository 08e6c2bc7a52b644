# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""Corpus loading, writing tasks, user splits and original prompt assembly."""

import json
import logging
import re
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from prompt_rewriter.module_utils.exceptions import (
    CorpusSchemaError,
    EmptyDocumentError,
    InformationFlowError,
    SplitError,
    TooShortHistoryError,
)
from prompt_rewriter.module_utils.extraction import (
    extract_summary_and_keywords,
    normalize_whitespace,
    split_sentences,
)
from prompt_rewriter.module_utils.metrics import tokenize
from prompt_rewriter.module_utils.prompt_model import (
    DEFAULT_INSTRUCTION,
    STYLE_INSTRUCTION,
    Element,
    PromptDoc,
    render,
)
from prompt_rewriter.module_utils.retrieval import BM25

LOG = logging.getLogger(__name__)

REQUIRED_FIELDS = ("user_id", "doc_id", "timestamp", "title", "body")
SPLIT_NAMES = ("train", "validation", "test")

# Extras appended to the immediate context, per domain.
DOMAIN_EXTRAS = {
    "Review": ("product_title", "product_description"),
    "Social": ("top_level_post", "parent_comment"),
    "Email": (),
}

# Precomputed sections a current document may carry in ``extras``.
ANNOTATION_KEYS = ("summary", "keywords", "style")

_TOKEN_SPAN = re.compile(r"[^\W_]+|\S")
_STYLE_ITEM = re.compile(r"(?:^|\s+)\d+\.(?=\s|$)")

MIN_EMAIL_SENTENCES = 2
MIN_EMAIL_TOKENS = 20


class Domain(str, Enum):
    EMAIL = "Email"
    REVIEW = "Review"
    SOCIAL = "Social"


class HistoryDoc(BaseModel):
    model_config = ConfigDict(frozen=True)

    doc_id: str
    timestamp: float
    title: str
    body: str
    extras: Dict[str, Any] = Field(default_factory=dict)


class UserHistory(BaseModel):
    model_config = ConfigDict(frozen=True)

    user_id: str
    docs: Tuple[HistoryDoc, ...] = ()


class WritingTask(BaseModel):
    model_config = ConfigDict(frozen=True)

    task_id: str
    user_id: str
    doc_id: str
    domain: Domain
    immediate_context: str
    ground_truth: str
    history: UserHistory
    annotations: Dict[str, Tuple[str, ...]] = Field(default_factory=dict)


class CorpusSplits(BaseModel):
    train: List[WritingTask] = Field(default_factory=list)
    validation: List[WritingTask] = Field(default_factory=list)
    test: List[WritingTask] = Field(default_factory=list)
    users: Dict[str, str] = Field(default_factory=dict)

    def split(self, name: str) -> List[WritingTask]:
        return getattr(self, name)


class RewriteInput(BaseModel):
    """What a rewriter may see: the prompt and the domain, never the ground truth."""

    model_config = ConfigDict(frozen=True)

    task_id: str
    domain: Domain
    prompt: PromptDoc


class PromptedTask(BaseModel):
    """A writing task with its assembled original prompt."""

    model_config = ConfigDict(frozen=True)

    task_id: str
    user_id: str
    split: str
    domain: Domain
    prompt: PromptDoc
    ground_truth: str

    def rewrite_input(self) -> RewriteInput:
        return RewriteInput(task_id=self.task_id, domain=self.domain, prompt=self.prompt)


def check_rewrite_input(value: Any) -> RewriteInput:
    """Reject anything that is not a bare :class:`RewriteInput`."""
    if not isinstance(value, RewriteInput) or hasattr(value, "ground_truth"):
        raise InformationFlowError(
            f"rewriters accept RewriteInput only, got {type(value).__name__}"
        )
    return value


def load_corpus(path: Path, lenient: bool = False) -> List[UserHistory]:
    """Read a line-delimited JSON corpus and group it per user.

    Args:
        path: Corpus file, one record per line.
        lenient: Skip malformed lines with a warning instead of raising.

    Returns:
        List[UserHistory]: Users sorted by id, documents sorted by timestamp.

    Raises:
        CorpusSchemaError: On invalid JSON, a missing field, or a duplicate doc_id.
        OSError: When the file cannot be read.
    """
    grouped: Dict[str, Dict[str, HistoryDoc]] = {}
    with Path(path).open(encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                user_id, doc = _parse_record(line, line_number)
                if doc.doc_id in grouped.get(user_id, {}):
                    raise CorpusSchemaError(line_number, f"duplicate doc_id '{doc.doc_id}'")
            except CorpusSchemaError as e:
                if not lenient:
                    raise
                LOG.warning("skipping malformed record: %s", e)
                continue
            grouped.setdefault(user_id, {})[doc.doc_id] = doc

    return [
        UserHistory(
            user_id=user_id,
            docs=tuple(sorted(docs.values(), key=lambda d: (d.timestamp, d.doc_id))),
        )
        for user_id, docs in sorted(grouped.items())
    ]


def _parse_record(line: str, line_number: int) -> Tuple[str, HistoryDoc]:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as e:
        raise CorpusSchemaError(line_number, f"invalid JSON ({e.msg})") from None
    if not isinstance(record, dict):
        raise CorpusSchemaError(line_number, "record is not an object")
    missing = [field for field in REQUIRED_FIELDS if field not in record]
    if missing:
        raise CorpusSchemaError(line_number, f"missing required field(s): {', '.join(missing)}")
    try:
        doc = HistoryDoc(
            doc_id=str(record["doc_id"]),
            timestamp=record["timestamp"],
            title=record["title"] or "",
            body=record["body"] or "",
            extras=record.get("extras") or {},
        )
    except ValidationError as e:
        raise CorpusSchemaError(line_number, e.errors()[0]["msg"]) from None
    return str(record["user_id"]), doc


def write_histories(histories: Iterable[UserHistory], path: Path) -> None:
    """Write histories back as corpus records (the ``load_corpus`` format)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for history in histories:
            for doc in history.docs:
                record = {"user_id": history.user_id, **doc.model_dump()}
                if not record["extras"]:
                    del record["extras"]
                handle.write(json.dumps(record, sort_keys=True) + "\n")


def largest_remainder(total: int, ratios: Sequence[int]) -> List[int]:
    """Split ``total`` proportionally to ``ratios``; ties go to the earlier slot."""
    weight = sum(ratios)
    quotas = [total * r / weight for r in ratios]
    counts = [int(q) for q in quotas]
    leftover = total - sum(counts)
    order = sorted(range(len(ratios)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:leftover]:
        counts[i] += 1
    return counts


def is_qualified(doc: HistoryDoc) -> bool:
    """Email documents need at least 2 sentences and 20 tokens to become tasks."""
    return (
        len(split_sentences(doc.body)) >= MIN_EMAIL_SENTENCES
        and len(tokenize(doc.body)) >= MIN_EMAIL_TOKENS
    )


def body_prefix(body: str, budget_tokens: int) -> str:
    """The body up to the end of its ``budget_tokens``-th token, original casing kept."""
    body = normalize_whitespace(body)
    spans = list(_TOKEN_SPAN.finditer(body))
    if len(spans) <= budget_tokens:
        return body
    if budget_tokens <= 0:
        return ""
    return body[: spans[budget_tokens - 1].end()]


def _immediate_context(doc: HistoryDoc, domain: Domain, budget_tokens: int) -> str:
    parts = [doc.title, body_prefix(doc.body, budget_tokens)]
    for key in DOMAIN_EXTRAS[domain.value]:
        value = doc.extras.get(key)
        if value:
            parts.append(str(value))
    return normalize_whitespace(" ".join(part for part in parts if part))


def _annotations(doc: HistoryDoc) -> Dict[str, Tuple[str, ...]]:
    found = {}
    for key in ANNOTATION_KEYS:
        value = doc.extras.get(key)
        if isinstance(value, list):
            found[key] = tuple(str(item) for item in value)
    return found


def _make_task(history: UserHistory, index: int, domain: Domain, budget_tokens: int) -> WritingTask:
    doc = history.docs[index]
    return WritingTask(
        task_id=f"{history.user_id}:{doc.doc_id}",
        user_id=history.user_id,
        doc_id=doc.doc_id,
        domain=domain,
        immediate_context=_immediate_context(doc, domain, budget_tokens),
        ground_truth=doc.body,
        history=UserHistory(user_id=history.user_id, docs=history.docs[:index]),
        annotations=_annotations(doc),
    )


def build_tasks(history: UserHistory, domain: Domain, context_budget_tokens: int = 30) -> List[WritingTask]:
    """All writing tasks of one user.

    Review and Social users contribute their most recent document only; Email
    users contribute every qualified document that has at least one earlier
    document.

    Raises:
        TooShortHistoryError: When the user has fewer than two documents.
    """
    domain = Domain(domain)
    if len(history.docs) < 2:
        raise TooShortHistoryError(history.user_id, len(history.docs))
    if domain is not Domain.EMAIL:
        try:
            return [build_task(history, domain, context_budget_tokens)]
        except EmptyDocumentError as e:
            LOG.warning("skipping user %s: %s", history.user_id, e)
            return []
    return [
        _make_task(history, index, domain, context_budget_tokens)
        for index in range(1, len(history.docs))
        if history.docs[index].body.strip() and is_qualified(history.docs[index])
    ]


def build_task(history: UserHistory, domain: Domain, context_budget_tokens: int = 30) -> WritingTask:
    """The task whose current document is the user's most recent document.

    Raises:
        TooShortHistoryError: When the user has fewer than two documents.
        EmptyDocumentError: When the most recent document has no body.
    """
    if len(history.docs) < 2:
        raise TooShortHistoryError(history.user_id, len(history.docs))
    current = history.docs[-1]
    if not current.body.strip():
        raise EmptyDocumentError(history.user_id, current.doc_id)
    return _make_task(history, len(history.docs) - 1, Domain(domain), context_budget_tokens)


def split_by_users(
    histories: Sequence[UserHistory],
    domain: Domain,
    ratios: Sequence[int] = (85, 5, 10),
    seed: int = 0,
    context_budget_tokens: int = 30,
) -> CorpusSplits:
    """Partition users into train/validation/test and build their tasks.

    Raises:
        SplitError: When ratios do not sum to 100 or there are fewer users than
            nonzero splits.
    """
    if len(ratios) != 3 or sum(ratios) != 100 or any(r < 0 for r in ratios):
        raise SplitError(f"ratios must be three non-negative integers summing to 100, got {ratios}")
    nonzero = sum(1 for r in ratios if r > 0)
    users = sorted(histories, key=lambda h: h.user_id)
    if len(users) < nonzero:
        raise SplitError(f"{len(users)} user(s) cannot fill {nonzero} nonzero split(s)")

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(users))
    counts = largest_remainder(len(users), ratios)

    splits = CorpusSplits()
    start = 0
    skipped = 0
    for name, count in zip(SPLIT_NAMES, counts):
        for position in order[start:start + count]:
            history = users[int(position)]
            splits.users[history.user_id] = name
            try:
                tasks = build_tasks(history, domain, context_budget_tokens)
            except TooShortHistoryError as e:
                LOG.info("no task for user %s: %s", history.user_id, e)
                tasks = []
            skipped += not tasks
            splits.split(name).extend(tasks)
        start += count
    if skipped:
        LOG.warning("%d of %d user(s) contributed no task", skipped, len(users))
    return splits


def write_split_manifest(splits: CorpusSplits, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        handle.write("user_id,split\n")
        for user_id, name in sorted(splits.users.items()):
            handle.write(f"{user_id},{name}\n")


def read_split_manifest(path: Path) -> Dict[str, str]:
    manifest = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines()[1:]:
        if line.strip():
            user_id, name = line.rsplit(",", 1)
            manifest[user_id] = name
    return manifest


def retrieve_rank(task: WritingTask, k: int = 5) -> List[str]:
    """Rank the user's history against the immediate context with BM25.

    Returns:
        List[str]: Up to ``k`` entry bodies, best first; ties go to newer documents.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    docs = task.history.docs
    if not docs:
        return []
    bm25 = BM25([tokenize(doc.body) for doc in docs])
    scores = bm25.scores(tokenize(task.immediate_context))
    order = sorted(range(len(docs)), key=lambda i: (-scores[i], -i))
    return [normalize_whitespace(docs[i].body) for i in order[:k]]


def _clean_phrase(text: str) -> str:
    return normalize_whitespace(text).replace("|", "/").strip(" /")


def parse_style_reply(reply: str) -> List[str]:
    """Split a numbered-list reply into phrases.

    The style prompt ends with ``1.``, so the reply may start with the first
    phrase directly; later items are introduced by ``<digit>.``.
    """
    if not _STYLE_ITEM.search(reply):
        text = normalize_whitespace(reply)
        if text:
            LOG.warning("style reply is not a numbered list, keeping it as one phrase")
            return [text]
        return []
    phrases = []
    for piece in _STYLE_ITEM.split(reply):
        phrase = _clean_phrase(piece)
        if phrase:
            phrases.append(phrase)
    return phrases


def style_prompt(history: UserHistory, num_docs: int = 5) -> str:
    """The writing-style synthesis prompt over the user's earliest documents."""
    lines = [STYLE_INSTRUCTION]
    lines.extend(normalize_whitespace(doc.body) for doc in history.docs[:num_docs])
    lines.append("1.")
    return "\n".join(lines)


def style_synthesis(
    histories: Sequence[UserHistory], generator, num_docs: int = 5
) -> List[List[Element]]:
    """Ask the generator to describe each user's writing style.

    The prompts go out as one concurrent batch; the result holds one phrase
    list per history. Generator failures propagate to the caller.
    """
    records = generator.generate_many([style_prompt(history, num_docs) for history in histories])
    return [[Element.style(phrase) for phrase in parse_style_reply(r.output)] for r in records]


def assemble_original_prompt(
    task: WritingTask,
    entries: Sequence[str],
    summary: Sequence[Element],
    keywords: Sequence[Element],
    style: Sequence[Element],
    instruction: str = DEFAULT_INSTRUCTION,
) -> PromptDoc:
    return PromptDoc(
        instruction=instruction,
        immediate_context=task.immediate_context,
        summary=tuple(summary),
        keywords=tuple(keywords),
        style=tuple(style),
        ranked_entries=tuple(entries),
    )


def fit_to_budget(prompt: PromptDoc, max_tokens: int = 1024) -> PromptDoc:
    """Drop ranked entries from the end until the rendered prompt fits."""
    entries = list(prompt.ranked_entries)
    while entries and len(tokenize(render(prompt))) > max_tokens:
        entries.pop()
        prompt = PromptDoc.model_validate({**prompt.model_dump(), "ranked_entries": tuple(entries)})
    return prompt


def _annotated_section(task: WritingTask, key: str) -> Optional[List[Element]]:
    """An annotated section as elements, or None when absent or unusable.

    Summaries are re-split into sentences and phrases are cleaned the way
    generated style phrases are; whatever still fails validation is reported
    and the section falls back to the heuristics or to style synthesis.
    """
    texts = task.annotations.get(key)
    if texts is None:
        return None
    if key == "summary":
        pieces = [sentence for text in texts for sentence in split_sentences(text)]
        make = Element.sentence
    else:
        pieces = [_clean_phrase(text) for text in texts]
        make = Element.keyword if key == "keywords" else Element.style
    try:
        elements = [make(piece) for piece in pieces if piece]
    except ValidationError as e:
        LOG.warning("ignoring %s annotation of task %s: %s", key, task.task_id, e.errors()[0]["msg"])
        return None
    if pieces and not elements:
        LOG.warning("ignoring blank %s annotation of task %s", key, task.task_id)
        return None
    return elements


def prepare_prompts(
    tasks: Sequence[WritingTask],
    split: str,
    generator=None,
    k: int = 5,
    max_sentences: int = 6,
    max_keywords: int = 28,
    style_docs: int = 5,
    prompt_budget_tokens: int = 1024,
    instruction: str = DEFAULT_INSTRUCTION,
) -> List[PromptedTask]:
    """Build the original prompt of every task.

    Sections found in the current document's annotations win over the
    extractive heuristics; style synthesis calls go through ``generator`` in
    one concurrent batch. Without a generator, unannotated style stays empty.
    """
    entries_per_task = [retrieve_rank(task, k) for task in tasks]

    styles = [_annotated_section(task, "style") for task in tasks]
    pending = [i for i, style in enumerate(styles) if style is None]
    if generator is not None and pending:
        synthesized = style_synthesis([tasks[i].history for i in pending], generator, style_docs)
        for i, phrases in zip(pending, synthesized):
            styles[i] = phrases

    prompted = []
    for i, task in enumerate(tasks):
        summary, keywords = extract_summary_and_keywords(
            task.immediate_context, entries_per_task[i], max_sentences, max_keywords
        )
        annotated = _annotated_section(task, "summary")
        summary = summary if annotated is None else annotated
        annotated = _annotated_section(task, "keywords")
        keywords = keywords if annotated is None else annotated
        style = styles[i] or []

        prompt = assemble_original_prompt(
            task, entries_per_task[i], summary, keywords, style, instruction
        )
        prompted.append(
            PromptedTask(
                task_id=task.task_id,
                user_id=task.user_id,
                split=split,
                domain=task.domain,
                prompt=fit_to_budget(prompt, prompt_budget_tokens),
                ground_truth=task.ground_truth,
            )
        )
    return prompted


def filter_tasks(
    tasks: Sequence[PromptedTask],
    sampler: Callable[[PromptedTask], Any],
    min_variants: int = 5,
) -> List[PromptedTask]:
    """Drop tasks whose original prompt yields fewer than ``min_variants`` variants.

    ``sampler`` maps a task to its variant set (anything with ``.variants``).
    """
    kept = [task for task in tasks if len(sampler(task).variants) >= min_variants]
    if len(kept) < len(tasks):
        LOG.info("dropped %d task(s) with fewer than %d variants", len(tasks) - len(kept), min_variants)
    return kept


def write_jsonl(records: Iterable[BaseModel], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(record.model_dump_json() + "\n")


def read_jsonl(path: Path, model: type) -> List[Any]:
    with Path(path).open(encoding="utf-8") as handle:
        return [model.model_validate_json(line) for line in handle if line.strip()]


def load_prompted_tasks(path: Path, split: Optional[str] = None) -> List[PromptedTask]:
    tasks = read_jsonl(path, PromptedTask)
    if split is None:
        return tasks
    return [task for task in tasks if task.split == split]
