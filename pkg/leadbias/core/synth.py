# leadbias/core/synth.py
"""
Synthetic news-like corpora with a controllable lead bias.

Each document has a small topic vocabulary. Three "salient" sentences
carry most of the topic words; the reference summary is those sentences
with light token dropout. With probability `lead_prob` the salient
sentences are the lead (0, 1, 2), otherwise three later positions.
"""
from __future__ import annotations

import logging
from typing import List, Sequence

import numpy as np

from .. import config as cfg
from .corpus import Corpus, Document, make_document
from .policy import stopwords

log = logging.getLogger(__name__)

_SYLLABLES = (
    "ka", "lo", "mi", "ra", "te", "vo", "su", "ne", "di", "po",
    "ga", "fi", "ru", "ze", "ba", "to", "le", "mu", "sa", "ni",
)


def _word(rng: np.random.Generator, syllables: int) -> str:
    return "".join(_SYLLABLES[int(i)] for i in rng.integers(len(_SYLLABLES), size=syllables))


def _vocab(rng: np.random.Generator, size: int, syllables: int) -> List[str]:
    out: List[str] = []
    seen: set = set()
    while len(out) < size:
        w = _word(rng, syllables)
        if w not in seen:
            seen.add(w)
            out.append(w)
    return out


def _sentence(rng, topic: Sequence[str], filler: Sequence[str], stop: Sequence[str], topic_rate: float) -> str:
    length = int(rng.integers(10, 21))
    words = []
    for _ in range(length):
        u = rng.random()
        if u < topic_rate:
            words.append(topic[int(rng.integers(len(topic)))])
        elif u < topic_rate + 0.35:
            words.append(stop[int(rng.integers(len(stop)))])
        else:
            words.append(filler[int(rng.integers(len(filler)))])
    words[0] = words[0].capitalize()
    return " ".join(words) + "."


def _reference_line(rng, sentence: str, dropout: float) -> str:
    kept = [w for w in sentence.rstrip(".").split() if rng.random() >= dropout]
    return " ".join(kept) + "."


def generate_corpus(
    n_docs: int,
    n_sentences: int = 15,
    lead_prob: float = 0.7,
    seed: int = 0,
    split: str = "train",
    *,
    salient_topic_rate: float = 0.35,
    filler_topic_rate: float = 0.12,
    dropout: float = 0.15,
    doc_vocab: int = 50,
) -> Corpus:
    if n_sentences < 2 * cfg.SUMMARY_SIZE:
        raise ValueError(f"synthetic documents need at least {2 * cfg.SUMMARY_SIZE} sentences")
    if not 0.0 <= lead_prob <= 1.0:
        raise ValueError(f"lead_prob must be in [0, 1] (got {lead_prob})")

    late = np.arange(max(cfg.SUMMARY_SIZE, n_sentences // 2), n_sentences)
    rng = np.random.default_rng(seed)
    pool = _vocab(rng, 3000, 3)
    stop = sorted(stopwords())
    docs: List[Document] = []
    lead_docs = 0

    for d in range(n_docs):
        topic = [w.capitalize() if rng.random() < 0.3 else w for w in _vocab(rng, 8, 2)]
        filler = [pool[int(i)] for i in rng.choice(len(pool), size=doc_vocab, replace=False)]
        if rng.random() < lead_prob:
            salient = (0, 1, 2)
            lead_docs += 1
        else:
            salient = tuple(sorted(int(i) for i in rng.choice(late, size=3, replace=False)))
        sentences = [
            _sentence(rng, topic, filler, stop, salient_topic_rate if i in salient else filler_topic_rate)
            for i in range(n_sentences)
        ]
        reference = [_reference_line(rng, sentences[i], dropout) for i in salient]
        docs.append(make_document(f"{split}-{d:06d}", sentences, reference))

    log.info(f"[synth] Generated {n_docs} {split} documents ({lead_docs} with lead-salient content)")
    return Corpus(docs, split)


def generate_planted(
    n_docs: int,
    positions: Sequence[int] = (0, 4, 7),
    n_sentences: int = 10,
    seed: int = 0,
    split: str = "test",
) -> Corpus:
    """Reference = the sentences at `positions` verbatim; every other sentence shares no token with it."""
    if max(positions) >= n_sentences:
        raise ValueError("planted positions must lie inside the document")
    rng = np.random.default_rng(seed)
    docs: List[Document] = []
    for d in range(n_docs):
        sentences = []
        for i in range(n_sentences):
            prefix = "k" if i in positions else "q"
            length = int(rng.integers(5, 9))
            sentences.append(" ".join(f"{prefix}{d}x{i}y{j}" for j in range(length)) + ".")
        reference = [sentences[i] for i in sorted(positions)]
        docs.append(make_document(f"{split}-{d:06d}", sentences, reference))
    return Corpus(docs, split)
