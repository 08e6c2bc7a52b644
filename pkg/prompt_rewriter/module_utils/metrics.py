# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""Tokenization, BLEU, ROUGE and the paired t-test.

All scores are on a 0-100 scale. Smoothed sentence BLEU is the reward and the
best-prompt selection metric; Plain corpus BLEU is what reports show.
"""

import csv
import math
import re
from collections import Counter
from enum import Enum
from pathlib import Path
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

from pydantic import BaseModel, Field
from scipy.special import betainc

from prompt_rewriter.module_utils.exceptions import EmptyReferenceError, InvalidSampleError

TokenSeq = List[str]

_TOKEN = re.compile(r"[^\W_]+|\S")


class BleuMode(str, Enum):
    SMOOTHED = "Smoothed"
    PLAIN = "Plain"


class RougeScore(NamedTuple):
    precision: float
    recall: float
    f1: float


class TTestResult(NamedTuple):
    t: float
    p_two_sided: float


class NgramStats(NamedTuple):
    matches: Tuple[int, ...]
    totals: Tuple[int, ...]
    candidate_length: int
    reference_length: int


def tokenize(text: str) -> TokenSeq:
    """Lowercase; runs of letters/digits are tokens, any other visible char stands alone."""
    return _TOKEN.findall(text.lower())


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def ngram_stats(
    candidate: Sequence[str], references: Sequence[Sequence[str]], max_n: int = 4
) -> NgramStats:
    """Clipped n-gram matches against one or more references.

    Counts are clipped by the maximum count over references; the reference
    length is the one closest to the candidate length (shorter wins ties).
    """
    matches = []
    totals = []
    for n in range(1, max_n + 1):
        cand_counts = ngrams(candidate, n)
        max_ref: Counter = Counter()
        for reference in references:
            for gram, count in ngrams(reference, n).items():
                if count > max_ref[gram]:
                    max_ref[gram] = count
        matches.append(sum(min(count, max_ref[gram]) for gram, count in cand_counts.items()))
        totals.append(max(len(candidate) - n + 1, 0))

    c = len(candidate)
    reference_length = min((abs(len(ref) - c), len(ref)) for ref in references)[1]
    return NgramStats(tuple(matches), tuple(totals), c, reference_length)


def _brevity_penalty(c: int, r: int) -> float:
    if c == 0:
        return 0.0
    if c > r:
        return 1.0
    return math.exp(1.0 - r / c)


def _bleu_from_stats(stats: NgramStats, mode: BleuMode) -> float:
    if stats.candidate_length == 0:
        return 0.0
    log_sum = 0.0
    max_n = len(stats.matches)
    for index, (match, total) in enumerate(zip(stats.matches, stats.totals)):
        if mode is BleuMode.SMOOTHED and index > 0:
            match, total = match + 1, total + 1
        if match == 0 or total == 0:
            return 0.0
        log_sum += math.log(match / total)
    score = _brevity_penalty(stats.candidate_length, stats.reference_length) * math.exp(log_sum / max_n)
    return 100.0 * score


def bleu(
    candidate: Sequence[str],
    reference: Sequence[str],
    max_n: int = 4,
    mode: BleuMode = BleuMode.SMOOTHED,
) -> float:
    """Sentence BLEU of ``candidate`` against a single reference.

    Args:
        candidate: Candidate tokens; an empty candidate scores 0.
        reference: Reference tokens.
        max_n: Highest n-gram order.
        mode: ``SMOOTHED`` adds one to numerator and denominator of p_n for
            n >= 2; ``PLAIN`` returns 0 as soon as any p_n is 0.

    Raises:
        EmptyReferenceError: If ``reference`` is empty.
        ValueError: If ``max_n`` < 1.
    """
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    if not reference:
        raise EmptyReferenceError()
    if not candidate:
        return 0.0
    return _bleu_from_stats(ngram_stats(candidate, [reference], max_n), BleuMode(mode))


def corpus_bleu(pairs: Iterable[Tuple[Sequence[str], Sequence[str]]], max_n: int = 4) -> float:
    """Plain BLEU with matches, totals and lengths summed over the corpus."""
    matches = [0] * max_n
    totals = [0] * max_n
    c = r = 0
    for candidate, reference in pairs:
        if not reference:
            raise EmptyReferenceError()
        stats = ngram_stats(candidate, [reference], max_n)
        matches = [a + b for a, b in zip(matches, stats.matches)]
        totals = [a + b for a, b in zip(totals, stats.totals)]
        c += stats.candidate_length
        r += stats.reference_length
    return _bleu_from_stats(NgramStats(tuple(matches), tuple(totals), c, r), BleuMode.PLAIN)


def _prf(overlap: int, cand_total: int, ref_total: int) -> RougeScore:
    precision = overlap / cand_total if cand_total else 0.0
    recall = overlap / ref_total if ref_total else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return RougeScore(100.0 * precision, 100.0 * recall, 100.0 * f1)


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> RougeScore:
    if n < 1:
        raise ValueError("n must be at least 1")
    cand_counts = ngrams(candidate, n)
    ref_counts = ngrams(reference, n)
    overlap = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
    return _prf(overlap, sum(cand_counts.values()), sum(ref_counts.values()))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for token in a:
        current = [0]
        for j, other in enumerate(b):
            current.append(previous[j] + 1 if token == other else max(previous[j + 1], current[j]))
        previous = current
    return previous[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    return _prf(lcs_length(candidate, reference), len(candidate), len(reference))


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-sided paired t-test on the differences ``a - b``.

    The p-value uses the Student-t tail through the regularized incomplete
    beta function: p = I_{df/(df+t^2)}(df/2, 1/2).

    Raises:
        InvalidSampleError: If the samples differ in length or have fewer than 2 pairs.
    """
    if len(a) != len(b):
        raise InvalidSampleError(f"sample lengths differ ({len(a)} vs {len(b)})")
    n = len(a)
    if n < 2:
        raise InvalidSampleError("paired t-test needs at least 2 pairs")

    diffs = [x - y for x, y in zip(a, b)]
    mean = sum(diffs) / n
    variance = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    sd = math.sqrt(variance)

    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(0.0, 1.0)
        return TTestResult(math.copysign(math.inf, mean), 0.0)

    t = mean / (sd / math.sqrt(n))
    df = n - 1
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return TTestResult(t, min(max(p, 0.0), 1.0))


class DocScore(BaseModel):
    doc_id: str
    bleu: float
    rouge1: float
    rouge2: float
    rougeL: float


class ScoreReport(BaseModel):
    """Per-document scores of one method plus their means."""

    method: str = ""
    per_doc: List[DocScore] = Field(default_factory=list)
    aggregates: dict = Field(default_factory=dict)
    corpus_bleu: float = 0.0
    n: int = 0

    def column(self, metric: str) -> List[float]:
        return [getattr(row, metric) for row in self.per_doc]


METRIC_COLUMNS = ("bleu", "rouge1", "rouge2", "rougeL")


def score_document(doc_id: str, generated: str, reference: str) -> DocScore:
    """Score one generated document; BLEU here is the smoothed sentence score."""
    cand = tokenize(generated)
    ref = tokenize(reference)
    return DocScore(
        doc_id=doc_id,
        bleu=bleu(cand, ref, mode=BleuMode.SMOOTHED),
        rouge1=rouge_n(cand, ref, 1).f1,
        rouge2=rouge_n(cand, ref, 2).f1,
        rougeL=rouge_l(cand, ref).f1,
    )


def build_report(
    rows: Sequence[DocScore],
    method: str = "",
    pairs: Optional[Sequence[Tuple[str, str]]] = None,
) -> ScoreReport:
    """Aggregate per-document rows; ``pairs`` (generated, reference) feed corpus BLEU."""
    n = len(rows)
    aggregates = {
        metric: (sum(getattr(row, metric) for row in rows) / n if n else 0.0)
        for metric in METRIC_COLUMNS
    }
    corpus = 0.0
    if pairs:
        corpus = corpus_bleu((tokenize(g), tokenize(r)) for g, r in pairs)
    return ScoreReport(method=method, per_doc=list(rows), aggregates=aggregates, corpus_bleu=corpus, n=n)


def write_report_csv(report: ScoreReport, path: Path) -> None:
    """Write per-document rows followed by a ``mean`` footer row."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(("doc_id",) + METRIC_COLUMNS)
        for row in report.per_doc:
            writer.writerow([row.doc_id] + [f"{getattr(row, m):.6f}" for m in METRIC_COLUMNS])
        writer.writerow(["mean"] + [f"{report.aggregates[m]:.6f}" for m in METRIC_COLUMNS])


def read_report_csv(path: Path, method: str = "") -> ScoreReport:
    rows = []
    with path.open(encoding="utf-8", newline="") as handle:
        for record in csv.DictReader(handle):
            if record["doc_id"] == "mean":
                continue
            rows.append(DocScore(**{k: record[k] for k in ("doc_id",) + METRIC_COLUMNS}))
    return build_report(rows, method=method or path.stem)
