# leadbias/core/text_metrics.py
"""
Tokenization and ROUGE-1/-2/-L.

One canonical ROUGE: lowercase, split on runs of non-alphanumerics, no
stemming, no stopword removal, F1 with beta=1. Multi-sentence texts are
joined with a single space before scoring (no summary-level LCS union).
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Tuple

TokenSeq = Tuple[str, ...]

_SPLIT_RX = re.compile(r"[\W_]+", re.UNICODE)


# -------------------------------------------------------------------
# Tokenization
# -------------------------------------------------------------------
def raw_tokens(text: str) -> TokenSeq:
    """Split without lowercasing (capitalization features need the raw case)."""
    if not text:
        return ()
    return tuple(t for t in _SPLIT_RX.split(text) if t)


@lru_cache(maxsize=262_144)
def tokenize(text: str) -> TokenSeq:
    if not text:
        return ()
    return tuple(t for t in _SPLIT_RX.split(text.lower()) if t)


# -------------------------------------------------------------------
# Scores
# -------------------------------------------------------------------
@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float

    @staticmethod
    def from_counts(matches: int, cand_total: int, ref_total: int) -> "RougeScore":
        p = matches / cand_total if cand_total > 0 else 0.0
        r = matches / ref_total if ref_total > 0 else 0.0
        return RougeScore(p, r, f1_score(p, r))


ZERO = RougeScore(0.0, 0.0, 0.0)


def f1_score(p: float, r: float) -> float:
    return 2.0 * p * r / (p + r) if (p + r) > 0 else 0.0


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def ngram_matches(candidate: Sequence[str], reference: Sequence[str], n: int) -> int:
    """Clipped n-gram overlap count."""
    cand = _ngrams(candidate, n)
    ref = _ngrams(reference, n)
    if len(cand) > len(ref):
        cand, ref = ref, cand
    return sum(min(c, ref[g]) for g, c in cand.items() if g in ref)


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> RougeScore:
    if n < 1:
        raise ValueError(f"rouge_n needs n >= 1, got {n}")
    cand_total = max(0, len(candidate) - n + 1)
    ref_total = max(0, len(reference) - n + 1)
    if cand_total == 0 or ref_total == 0:
        return ZERO
    return RougeScore.from_counts(ngram_matches(candidate, reference, n), cand_total, ref_total)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    if len(b) > len(a):
        a, b = b, a
    # single rolling row over the shorter sequence
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(cur[j - 1] if cur[j - 1] > prev[j] else prev[j])
        prev = cur
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    if not candidate or not reference:
        return ZERO
    return RougeScore.from_counts(lcs_length(candidate, reference), len(candidate), len(reference))


def rouge_scores(candidate: Sequence[str], reference: Sequence[str]) -> Tuple[RougeScore, RougeScore, RougeScore]:
    """ROUGE-1, -2, -L for sentence lists (each side joined and tokenized once)."""
    cand = tokenize(" ".join(candidate))
    ref = tokenize(" ".join(reference))
    return rouge_n(cand, ref, 1), rouge_n(cand, ref, 2), rouge_l(cand, ref)


def avg_rouge_tokens(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """Mean of the three F1s on already-tokenized sides."""
    return (rouge_n(candidate, reference, 1).f1 + rouge_n(candidate, reference, 2).f1
            + rouge_l(candidate, reference).f1) / 3.0


def avg_rouge(candidate: Sequence[str], reference: Sequence[str]) -> float:
    return avg_rouge_tokens(tokenize(" ".join(candidate)), tokenize(" ".join(reference)))
