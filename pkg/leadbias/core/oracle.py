# leadbias/core/oracle.py
"""
Per-sentence ROUGE scores, the ROUGE target distribution P_R, the
exhaustive best-triplet oracle and its on-disk cache.
"""
from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from math import comb
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .. import config as cfg
from .corpus import Corpus, Document
from .storage import fmt_float, write_lines
from .text_metrics import TokenSeq, avg_rouge_tokens, tokenize

log = logging.getLogger(__name__)

# above this many candidate triples, prune with the unigram upper bound
_BRUTE_FORCE_MAX = 4096


class OracleError(ValueError):
    pass


# -------------------------------------------------------------------
# Records
# -------------------------------------------------------------------
@dataclass(frozen=True)
class SentenceScores:
    doc_id: str
    scores: tuple

    def __len__(self) -> int:
        return len(self.scores)


@dataclass(frozen=True)
class OracleRecord:
    doc_id: str
    best_triplet: tuple
    best_score: float
    sentence_scores: SentenceScores

    @property
    def mean_index(self) -> float:
        """Average position of the oracle sentences (partition ranking key)."""
        return sum(self.best_triplet) / len(self.best_triplet)

    def to_line(self) -> str:
        scores = ", ".join(fmt_float(s) for s in self.sentence_scores.scores)
        best = ", ".join(str(i) for i in self.best_triplet)
        return (
            f'{{"id": {json.dumps(self.doc_id, ensure_ascii=False)}, "scores": [{scores}], '
            f'"best": [{best}], "best_score": {fmt_float(self.best_score)}}}'
        )

    @staticmethod
    def from_dict(obj: dict) -> "OracleRecord":
        doc_id = str(obj["id"])
        return OracleRecord(
            doc_id=doc_id,
            best_triplet=tuple(int(i) for i in obj["best"]),
            best_score=float(obj["best_score"]),
            sentence_scores=SentenceScores(doc_id, tuple(float(s) for s in obj["scores"])),
        )


# -------------------------------------------------------------------
# Scores
# -------------------------------------------------------------------
def _ref_tokens(doc: Document) -> TokenSeq:
    return tokenize(" ".join(doc.reference))


def sentence_scores(doc: Document) -> SentenceScores:
    ref = _ref_tokens(doc)
    return SentenceScores(doc.id, tuple(avg_rouge_tokens(tokenize(s), ref) for s in doc.sentences))


def target_distribution(ss: SentenceScores | Sequence[float]) -> np.ndarray:
    scores = np.asarray(ss.scores if isinstance(ss, SentenceScores) else ss, dtype=np.float64)
    n = len(scores)
    total = scores.sum()
    if n == 0:
        return scores
    if total <= 0.0:
        return np.full(n, 1.0 / n)
    return scores / total


# -------------------------------------------------------------------
# Best triplet
# -------------------------------------------------------------------
def _concat(sent_tokens: Sequence[TokenSeq], idx: Sequence[int]) -> TokenSeq:
    out: tuple = ()
    for i in idx:
        out += sent_tokens[i]
    return out


def _brute_force(sent_tokens: List[TokenSeq], ref: TokenSeq) -> Tuple[tuple, float]:
    best, best_score = None, -1.0
    for trip in combinations(range(len(sent_tokens)), cfg.SUMMARY_SIZE):
        s = avg_rouge_tokens(_concat(sent_tokens, trip), ref)
        if s > best_score:  # strict: first (lexicographically smallest) wins ties
            best, best_score = trip, s
    return best, best_score


def _unigram_bound(sent_tokens: List[TokenSeq], ref: TokenSeq, triples: np.ndarray) -> np.ndarray:
    """Upper bound on avg_rouge per triple: LCS F1 <= ROUGE-1 F1, ROUGE-2 F1 <= 1."""
    vocab = {t: k for k, t in enumerate(sorted(set(ref)))}
    ref_counts = np.zeros(len(vocab), dtype=np.int64)
    for t in ref:
        ref_counts[vocab[t]] += 1
    counts = np.zeros((len(sent_tokens), len(vocab)), dtype=np.int64)
    for i, toks in enumerate(sent_tokens):
        for t in toks:
            k = vocab.get(t)
            if k is not None:
                counts[i, k] += 1
    lens = np.array([len(t) for t in sent_tokens], dtype=np.int64)

    summed = counts[triples[:, 0]] + counts[triples[:, 1]] + counts[triples[:, 2]]
    matches = np.minimum(summed, ref_counts).sum(axis=1).astype(np.float64)
    cand_len = lens[triples].sum(axis=1).astype(np.float64)
    p = np.divide(matches, cand_len, out=np.zeros_like(matches), where=cand_len > 0)
    r = matches / len(ref)
    f1 = np.divide(2 * p * r, p + r, out=np.zeros_like(p), where=(p + r) > 0)
    return (2.0 * f1 + 1.0) / 3.0 + 1e-9


def _pruned(sent_tokens: List[TokenSeq], ref: TokenSeq) -> Tuple[tuple, float]:
    n = len(sent_tokens)
    triples = np.array(list(combinations(range(n), cfg.SUMMARY_SIZE)), dtype=np.int64)
    bound = _unigram_bound(sent_tokens, ref, triples)
    order = np.argsort(-bound, kind="stable")

    best, best_score = None, -1.0
    for k in order:
        if bound[k] < best_score:
            break
        trip = tuple(int(i) for i in triples[k])
        s = avg_rouge_tokens(_concat(sent_tokens, trip), ref)
        if s > best_score or (s == best_score and trip < best):
            best, best_score = trip, s
    return best, best_score


def best_triplet(doc: Document, ss: SentenceScores | None = None) -> OracleRecord:
    ref = _ref_tokens(doc)
    if not ref:
        raise OracleError(f"document '{doc.id}' has an empty reference")
    sents = doc.sentences[: cfg.MAX_SENTENCES]
    sent_tokens = [tokenize(s) for s in sents]
    ss = ss or sentence_scores(doc)

    if len(sents) <= cfg.SUMMARY_SIZE:
        trip = tuple(range(len(sents)))
        score = avg_rouge_tokens(_concat(sent_tokens, trip), ref)
    elif comb(len(sents), cfg.SUMMARY_SIZE) <= _BRUTE_FORCE_MAX:
        trip, score = _brute_force(sent_tokens, ref)
    else:
        trip, score = _pruned(sent_tokens, ref)
    return OracleRecord(doc.id, tuple(trip), float(score), ss)


# -------------------------------------------------------------------
# Triplet rewards (memoized, per trainer)
# -------------------------------------------------------------------
class RewardMemo:
    """avg_rouge of selected sentences (document order) vs reference, memoized."""

    def __init__(self):
        self._memo: Dict[tuple, float] = {}
        self.hits = 0
        self.misses = 0

    def __len__(self) -> int:
        return len(self._memo)

    def reward(self, doc: Document, indices: Sequence[int]) -> float:
        picked = tuple(doc.sentences[i] for i in sorted(indices))
        key = (doc.id, picked)
        val = self._memo.get(key)
        if val is None:
            self.misses += 1
            val = triplet_reward(doc, indices)
            self._memo[key] = val
        else:
            self.hits += 1
        return val


def triplet_reward(doc: Document, indices: Sequence[int]) -> float:
    cand = _concat([tokenize(s) for s in doc.sentences], sorted(indices))
    return avg_rouge_tokens(cand, _ref_tokens(doc))


# -------------------------------------------------------------------
# Cache
# -------------------------------------------------------------------
def compute_record(doc: Document) -> OracleRecord:
    try:
        return best_triplet(doc)
    except OracleError:
        raise
    except Exception as e:
        raise OracleError(f"document '{doc.id}' could not be processed: {e}") from e


def compute_records(c: Corpus, *, workers: int | None = None) -> List[OracleRecord]:
    workers = workers or cfg.WORKERS
    docs = c.documents
    bar = dict(total=len(docs), desc="oracle", disable=not cfg.PROGRESS, leave=False)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(tqdm(ex.map(compute_record, docs), **bar))
    return [compute_record(d) for d in tqdm(docs, **bar)]


def precompute_cache(c: Corpus, path: str | Path, *, workers: int | None = None) -> List[OracleRecord]:
    records = compute_records(c, workers=workers)
    write_lines(path, (r.to_line() for r in records))
    log.info(f"[oracle] Cached {len(records)} oracle records -> {path}")
    return records


def load_cache(path: str | Path) -> Dict[str, OracleRecord]:
    out: Dict[str, OracleRecord] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                rec = OracleRecord.from_dict(json.loads(line))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise OracleError(f"cache line {lineno}: malformed record ({e})") from None
            out[rec.doc_id] = rec
    log.info(f"[oracle] Loaded {len(out)} cache records from {path}")
    return out
