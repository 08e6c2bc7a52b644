# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""Artifact layout of a pipeline working directory.

Stages hand artifacts to each other through files. When a stage needs an
artifact that does not exist yet, the workspace runs the registered producer
of that artifact (synth -> ingest -> split -> prompts -> variants -> label)
instead of failing.
"""

import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional

from pydantic import BaseModel

from prompt_rewriter.module_utils.corpus import (
    SPLIT_NAMES,
    PromptedTask,
    WritingTask,
    load_prompted_tasks,
    read_jsonl,
)
from prompt_rewriter.module_utils.exceptions import MissingArtifactError

LOG = logging.getLogger(__name__)

# artifact -> stage that produces it
PRODUCERS = {
    "corpus": "synth",
    "histories": "ingest",
    "tasks": "split",
    "prompts": "prompts",
    "variants": "variants",
    "sl_examples": "label",
    "best": "label",
}


class VariantFileRecord(BaseModel):
    task_id: str
    seed: int
    variants: List[str]


class Workspace:
    """Paths of every artifact under ``root`` plus on-demand production."""

    def __init__(self, root: Path, producers: Optional[Dict[str, Callable[[], object]]] = None):
        self.root = Path(root)
        self.producers = dict(producers or {})
        self._producing: set = set()

    @property
    def corpus(self) -> Path:
        return self.root / "corpus.jsonl"

    @property
    def histories(self) -> Path:
        return self.root / "histories.jsonl"

    @property
    def split_manifest(self) -> Path:
        return self.root / "splits.csv"

    def tasks(self, split: str) -> Path:
        return self.root / f"tasks_{split}.jsonl"

    @property
    def prompts(self) -> Path:
        return self.root / "prompts.jsonl"

    @property
    def variants(self) -> Path:
        return self.root / "variants.jsonl"

    @property
    def sl_examples(self) -> Path:
        return self.root / "sl_examples.jsonl"

    @property
    def best(self) -> Path:
        return self.root / "best.jsonl"

    def policy(self, name: str) -> Path:
        return self.root / f"policy_{name}.json"

    def training_log(self, name: str) -> Path:
        return self.root / f"training_log_{name}.csv"

    def reports(self, name: str) -> Path:
        return self.root / "reports" / name

    def path_of(self, artifact: str) -> Path:
        if artifact == "tasks":
            return self.tasks(SPLIT_NAMES[0])
        return getattr(self, artifact)

    def require(self, artifact: str) -> Path:
        """Return the artifact's path, producing it first when missing.

        Raises:
            MissingArtifactError: When it is missing and no producer is registered.
        """
        path = self.path_of(artifact)
        if path.exists():
            return path
        stage = PRODUCERS.get(artifact)
        producer = self.producers.get(stage) if stage else None
        if producer is None or stage in self._producing:
            raise MissingArtifactError(str(path))
        LOG.info("%s is missing, running stage '%s'", path.name, stage)
        self._producing.add(stage)
        try:
            producer()
        finally:
            self._producing.discard(stage)
        if not path.exists():
            raise MissingArtifactError(str(path))
        return path

    def load_tasks(self, split: str) -> List[WritingTask]:
        self.require("tasks")
        path = self.tasks(split)
        return read_jsonl(path, WritingTask) if path.exists() else []

    def load_prompts(self, split: Optional[str] = None) -> List[PromptedTask]:
        return load_prompted_tasks(self.require("prompts"), split)

    def load_variants(self) -> Dict[str, VariantFileRecord]:
        return {r.task_id: r for r in read_jsonl(self.require("variants"), VariantFileRecord)}
