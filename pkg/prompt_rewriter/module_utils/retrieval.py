# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

import math
from collections import Counter
from typing import List, Sequence


class BM25:
    """Okapi BM25 over pre-tokenized documents.

    idf uses the non-negative form ``log((N - df + 0.5) / (df + 0.5) + 1)`` and
    every query token occurrence contributes, so repeated query terms weigh more.
    """

    def __init__(self, docs: Sequence[Sequence[str]], k1: float = 1.2, b: float = 0.75):
        self.k1 = k1
        self.b = b
        self.doc_freqs = [Counter(doc) for doc in docs]
        self.doc_lengths = [len(doc) for doc in docs]
        self.num_docs = len(docs)
        self.avg_length = sum(self.doc_lengths) / self.num_docs if self.num_docs else 0.0

        df: Counter = Counter()
        for freqs in self.doc_freqs:
            df.update(freqs.keys())
        self.idf = {
            term: math.log((self.num_docs - count + 0.5) / (count + 0.5) + 1.0)
            for term, count in df.items()
        }

    def score(self, query: Sequence[str], index: int) -> float:
        if self.avg_length == 0:
            return 0.0
        freqs = self.doc_freqs[index]
        norm = self.k1 * (1 - self.b + self.b * self.doc_lengths[index] / self.avg_length)
        total = 0.0
        for term in query:
            f = freqs.get(term, 0)
            if f:
                total += self.idf[term] * f * (self.k1 + 1) / (f + norm)
        return total

    def scores(self, query: Sequence[str]) -> List[float]:
        return [self.score(query, index) for index in range(self.num_docs)]
