# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""Linear element-edit policy over the rewriteable prompt sections.

Per section kind the policy holds an action matrix ``W`` (rows drop, keep,
duplicate; only keywords use the duplicate row), an ordering vector ``v`` and
a section gate vector ``u``. A shared ``w_add`` vector scores the keyword
candidate pool. Every decision is taken on a five-value feature vector::

    [1, relevance, position, length, author_frequency]

The parameters are stored as one flat vector with the layout::

    summary:  W (3 x 5), v (5), u (5)
    keywords: W (3 x 5), v (5), u (5)
    style:    W (3 x 5), v (5), u (5)
    w_add (5)
"""

import json
import logging
from collections import Counter
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.special import expit, log_expit, logsumexp, softmax

from prompt_rewriter.module_utils.corpus import RewriteInput, check_rewrite_input
from prompt_rewriter.module_utils.extraction import cosine_tf, is_content_token, load_stopwords
from prompt_rewriter.module_utils.metrics import tokenize
from prompt_rewriter.module_utils.prompt_model import (
    SECTION_FIELDS,
    SECTION_KINDS,
    Element,
    ElementKind,
    PromptDoc,
)

LOG = logging.getLogger(__name__)

NUM_FEATURES = 5
NUM_ACTIONS = 3
DROP, KEEP, DUPLICATE = 0, 1, 2
POOL_SIZE = 8
PARAMS_VERSION = 1

_KIND_BLOCK = NUM_ACTIONS * NUM_FEATURES + 2 * NUM_FEATURES
NUM_PARAMS = len(SECTION_KINDS) * _KIND_BLOCK + NUM_FEATURES

LAYOUT = [
    f"{SECTION_FIELDS[kind]}.{part}" for kind in SECTION_KINDS for part in ("W", "v", "u")
] + ["w_add"]


class RewriteMode(str, Enum):
    SAMPLE = "Sample"
    GREEDY = "Greedy"


class DecisionType(str, Enum):
    GATE = "gate"
    ACTION = "action"
    ADD = "add"


def num_actions(kind: ElementKind) -> int:
    return NUM_ACTIONS if kind is ElementKind.KEYWORD else 2


def _kind_offset(kind: ElementKind) -> int:
    return SECTION_KINDS.index(kind) * _KIND_BLOCK


def action_slice(kind: ElementKind) -> slice:
    start = _kind_offset(kind)
    return slice(start, start + NUM_ACTIONS * NUM_FEATURES)


def order_slice(kind: ElementKind) -> slice:
    start = _kind_offset(kind) + NUM_ACTIONS * NUM_FEATURES
    return slice(start, start + NUM_FEATURES)


def gate_slice(kind: ElementKind) -> slice:
    start = _kind_offset(kind) + NUM_ACTIONS * NUM_FEATURES + NUM_FEATURES
    return slice(start, start + NUM_FEATURES)


ADD_SLICE = slice(NUM_PARAMS - NUM_FEATURES, NUM_PARAMS)


class PolicyParams:
    """Policy weights plus the reward baseline used by PPO."""

    def __init__(self, theta: np.ndarray, baseline: float = 0.0, baseline_decay: float = 0.9):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (NUM_PARAMS,):
            raise ValueError(f"expected {NUM_PARAMS} weights, got shape {theta.shape}")
        if not np.all(np.isfinite(theta)):
            raise ValueError("policy weights must be finite")
        self.theta = theta
        self.baseline = float(baseline)
        self.baseline_decay = float(baseline_decay)

    @classmethod
    def zeros(cls, baseline_decay: float = 0.9) -> "PolicyParams":
        return cls(np.zeros(NUM_PARAMS), baseline_decay=baseline_decay)

    @classmethod
    def random(cls, seed: int, scale: float = 0.01, baseline_decay: float = 0.9) -> "PolicyParams":
        rng = np.random.default_rng(seed)
        return cls(rng.normal(0.0, scale, NUM_PARAMS), baseline_decay=baseline_decay)

    def replace(self, theta: Optional[np.ndarray] = None, baseline: Optional[float] = None) -> "PolicyParams":
        return PolicyParams(
            self.theta.copy() if theta is None else theta,
            self.baseline if baseline is None else baseline,
            self.baseline_decay,
        )

    def action_matrix(self, kind: ElementKind) -> np.ndarray:
        return self.theta[action_slice(kind)].reshape(NUM_ACTIONS, NUM_FEATURES)

    def order_vector(self, kind: ElementKind) -> np.ndarray:
        return self.theta[order_slice(kind)]

    def gate_vector(self, kind: ElementKind) -> np.ndarray:
        return self.theta[gate_slice(kind)]

    @property
    def add_vector(self) -> np.ndarray:
        return self.theta[ADD_SLICE]

    def to_dict(self) -> Dict:
        return {
            "version": PARAMS_VERSION,
            "num_features": NUM_FEATURES,
            "layout": LAYOUT,
            "theta": [float(x) for x in self.theta],
            "baseline": self.baseline,
            "baseline_decay": self.baseline_decay,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "PolicyParams":
        if data.get("version") != PARAMS_VERSION:
            raise ValueError(f"unsupported policy file version {data.get('version')!r}")
        return cls(np.array(data["theta"], dtype=float), data["baseline"], data["baseline_decay"])

    def save(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> "PolicyParams":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


class FeatureContext:
    """Per-prompt data shared by every feature vector of that prompt."""

    def __init__(self, immediate_context: str, entries: Sequence[str]):
        self.context_tokens = tokenize(immediate_context)
        self.author_counts: Counter = Counter()
        for entry in entries:
            self.author_counts.update(tokenize(entry))
        self.max_count = max(self.author_counts.values(), default=0)

    @classmethod
    def from_prompt(cls, prompt: PromptDoc) -> "FeatureContext":
        return cls(prompt.immediate_context, prompt.ranked_entries)

    def author_frequency(self, tokens: Sequence[str]) -> float:
        if not tokens or self.max_count == 0:
            return 0.0
        return sum(self.author_counts[t] for t in tokens) / (len(tokens) * self.max_count)


def featurize(text: str, ctx: FeatureContext, index: int, total: int) -> np.ndarray:
    """Feature vector of one element (or candidate) at ``index`` of ``total``."""
    tokens = tokenize(text)
    return np.array(
        [
            1.0,
            cosine_tf(tokens, ctx.context_tokens),
            index / total if total else 0.0,
            min(len(tokens) / 20.0, 1.0),
            ctx.author_frequency(tokens),
        ]
    )


def candidate_pool(prompt: PromptDoc, pool_size: int = POOL_SIZE) -> List[str]:
    """Addable keywords: context tokens first, then author-frequent entry tokens.

    Each source gets half the pool; a short source leaves its slots to the
    other. Tokens already present as keywords are never candidates.
    """
    stopwords = load_stopwords()
    present = set(prompt.texts(ElementKind.KEYWORD))

    context_counts: Counter = Counter()
    for token in tokenize(prompt.immediate_context):
        if is_content_token(token, stopwords) and token not in present:
            context_counts[token] += 1
    from_context = [t for t, _ in context_counts.most_common()]

    entry_counts: Counter = Counter()
    for entry in prompt.ranked_entries:
        for token in tokenize(entry):
            if is_content_token(token, stopwords) and token not in present:
                entry_counts[token] += 1
    from_author = [t for t, _ in entry_counts.most_common() if t not in context_counts]

    half = pool_size // 2
    take_context = min(len(from_context), max(half, pool_size - len(from_author)))
    take_author = min(len(from_author), pool_size - take_context)
    return from_context[:take_context] + from_author[:take_author]


class Decision(BaseModel):
    """One policy decision with everything needed to recompute its probability."""

    model_config = ConfigDict(frozen=True)

    type: DecisionType
    kind: ElementKind
    action: int
    features: Tuple[float, ...]
    log_prob: float
    ref: str = ""


class Trajectory(BaseModel):
    model_config = ConfigDict(frozen=True)

    decisions: Tuple[Decision, ...] = ()
    total_log_prob: float = 0.0
    prompt: Optional[PromptDoc] = None


def decision_logits(theta: np.ndarray, decision: Decision) -> np.ndarray:
    """Logit (Bernoulli decisions) or logit vector (action decisions) under ``theta``."""
    x = np.asarray(decision.features)
    if decision.type is DecisionType.GATE:
        return np.array(theta[gate_slice(decision.kind)] @ x)
    if decision.type is DecisionType.ADD:
        return np.array(theta[ADD_SLICE] @ x)
    weights = theta[action_slice(decision.kind)].reshape(NUM_ACTIONS, NUM_FEATURES)
    return weights[: num_actions(decision.kind)] @ x


def bernoulli_log_prob(z: float, action: int) -> float:
    return float(log_expit(z) if action else log_expit(-z))


def decision_log_prob(theta: np.ndarray, decision: Decision) -> float:
    logits = decision_logits(theta, decision)
    if decision.type is DecisionType.ACTION:
        return float(logits[decision.action] - logsumexp(logits))
    return bernoulli_log_prob(float(logits), decision.action)


def decision_grad(theta: np.ndarray, decision: Decision) -> Tuple[np.ndarray, float, np.ndarray]:
    """Log-probability gradient, entropy and entropy gradient of one decision."""
    x = np.asarray(decision.features)
    grad_logp = np.zeros_like(theta)
    grad_entropy = np.zeros_like(theta)
    logits = decision_logits(theta, decision)

    if decision.type is DecisionType.ACTION:
        n = num_actions(decision.kind)
        pi = softmax(logits)
        onehot = np.zeros(n)
        onehot[decision.action] = 1.0
        log_pi = logits - logsumexp(logits)
        entropy = float(-np.sum(pi * log_pi))
        d_entropy = -pi * (logits - np.dot(pi, logits))
        block = np.zeros((NUM_ACTIONS, NUM_FEATURES))
        block[:n] = np.outer(onehot - pi, x)
        grad_logp[action_slice(decision.kind)] = block.ravel()
        block = np.zeros((NUM_ACTIONS, NUM_FEATURES))
        block[:n] = np.outer(d_entropy, x)
        grad_entropy[action_slice(decision.kind)] = block.ravel()
        return grad_logp, entropy, grad_entropy

    z = float(logits)
    p = float(expit(z))
    entropy = float(-(p * log_expit(z) + (1 - p) * log_expit(-z)))
    where = gate_slice(decision.kind) if decision.type is DecisionType.GATE else ADD_SLICE
    grad_logp[where] = (decision.action - p) * x
    grad_entropy[where] = -z * p * (1 - p) * x
    return grad_logp, entropy, grad_entropy


class _Decider:
    def __init__(self, params: PolicyParams, mode: RewriteMode, rng: Optional[np.random.Generator]):
        if mode is RewriteMode.SAMPLE and rng is None:
            raise ValueError("Sample mode needs a random generator")
        self.params = params
        self.mode = mode
        self.rng = rng
        self.decisions: List[Decision] = []

    def _record(self, dtype, kind, action, x, ref) -> int:
        decision = Decision(
            type=dtype, kind=kind, action=action, features=tuple(float(v) for v in x), log_prob=0.0, ref=ref
        )
        log_prob = decision_log_prob(self.params.theta, decision)
        self.decisions.append(decision.model_copy(update={"log_prob": log_prob}))
        return action

    def bernoulli(self, dtype: DecisionType, kind: ElementKind, x: np.ndarray, ref: str) -> int:
        weights = self.params.gate_vector(kind) if dtype is DecisionType.GATE else self.params.add_vector
        p = float(expit(weights @ x))
        if self.mode is RewriteMode.GREEDY:
            action = int(p > 0.5)
        else:
            action = int(self.rng.random() < p)
        return self._record(dtype, kind, action, x, ref)

    def element_action(self, kind: ElementKind, x: np.ndarray, ref: str) -> int:
        n = num_actions(kind)
        logits = self.params.action_matrix(kind)[:n] @ x
        if self.mode is RewriteMode.GREEDY:
            best = float(np.max(logits))
            action = KEEP if logits[KEEP] >= best else int(np.argmax(logits))
        else:
            action = int(self.rng.choice(n, p=softmax(logits)))
        return self._record(DecisionType.ACTION, kind, action, x, ref)


def policy_rewrite(
    rewrite_input: RewriteInput,
    params: PolicyParams,
    mode: RewriteMode = RewriteMode.GREEDY,
    rng: Optional[np.random.Generator] = None,
    pool_size: int = POOL_SIZE,
) -> Tuple[PromptDoc, Trajectory]:
    """Rewrite the sections of a prompt with the element-edit policy.

    Per section: a gate may empty it; otherwise each element is dropped, kept or
    (keywords only) duplicated. Kept keywords and style phrases are ordered by
    descending ``v . phi`` (stable), summary keeps its order. Candidate-pool
    keywords are then appended when their add gate fires. Greedy mode resolves
    every tie toward keeping, so zero weights give the identity rewrite.

    Raises:
        InformationFlowError: When handed anything but a ``RewriteInput``.
    """
    rewrite_input = check_rewrite_input(rewrite_input)
    prompt = rewrite_input.prompt
    ctx = FeatureContext.from_prompt(prompt)
    decider = _Decider(params, RewriteMode(mode), rng)
    sections: Dict[str, List[Element]] = {}

    for kind in SECTION_KINDS:
        elements = prompt.section(kind)
        field = SECTION_FIELDS[kind]
        if not elements:
            sections[field] = []
            continue
        features = [featurize(e.text, ctx, i, len(elements)) for i, e in enumerate(elements)]
        psi = np.mean(features, axis=0)
        if decider.bernoulli(DecisionType.GATE, kind, psi, field):
            sections[field] = []
            continue

        groups: List[Tuple[float, List[Element]]] = []
        order = params.order_vector(kind)
        for element, x in zip(elements, features):
            action = decider.element_action(kind, x, element.text)
            if action == DROP:
                continue
            emitted = [element, element] if action == DUPLICATE else [element]
            groups.append((float(order @ x), emitted))
        if kind is not ElementKind.SUMMARY_SENTENCE:
            groups.sort(key=lambda group: -group[0])
        sections[field] = [e for _, emitted in groups for e in emitted]

    pool = candidate_pool(prompt, pool_size)
    for index, token in enumerate(pool):
        x = featurize(token, ctx, index, len(pool))
        if decider.bernoulli(DecisionType.ADD, ElementKind.KEYWORD, x, token):
            sections[SECTION_FIELDS[ElementKind.KEYWORD]].append(Element.keyword(token))

    rewritten = prompt.with_sections(**sections)
    decisions = tuple(decider.decisions)
    trajectory = Trajectory(
        decisions=decisions,
        total_log_prob=float(sum(d.log_prob for d in decisions)),
        prompt=rewritten,
    )
    return rewritten, trajectory


def trajectory_log_prob(theta: np.ndarray, trajectory: Trajectory) -> float:
    return float(sum(decision_log_prob(theta, d) for d in trajectory.decisions))
