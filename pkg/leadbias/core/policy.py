# leadbias/core/policy.py
"""
Affinity-scoring extractive policy.

Hand-crafted sentence features stand in for a neural sentence encoder;
a sigmoid scorer turns them into per-sentence affinities in (0, 1).
Summaries are sampled sequentially without replacement (training) or
decoded greedily (inference).
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Sequence, Tuple

import numpy as np

from .. import config as cfg
from .corpus import Document
from .storage import read_json, write_json
from .text_metrics import raw_tokens, tokenize

log = logging.getLogger(__name__)

# clamp keeps affinities strictly inside (0, 1) when the sigmoid saturates
_A_EPS = 1e-12


# -------------------------------------------------------------------
# Stopwords (package data)
# -------------------------------------------------------------------
@lru_cache(maxsize=1)
def stopwords() -> frozenset:
    path = cfg.DATA_DIR / "stopwords.json"
    with path.open("r", encoding="utf-8") as f:
        data = json.load(f)
    words = data.get("words") if isinstance(data, dict) else None
    if not isinstance(words, list) or len(words) != 50:
        raise ValueError(f"Invalid stopword file {path}: expected 50 words.")
    return frozenset(w.lower() for w in words)


# -------------------------------------------------------------------
# Features
# -------------------------------------------------------------------
FEATURE_NAMES = (
    "position",
    "is_lead3",
    "length",
    "repeated_unigrams",
    "centroid_cosine",
    "capitalized",
    "stopwords",
    "constant",
)


def _term_matrix(toks: Sequence[Sequence[str]]) -> Tuple[np.ndarray, list]:
    """(n, V) term counts over the document's vocabulary, plus that vocabulary."""
    vocab: dict = {}
    for t in toks:
        for w in t:
            vocab.setdefault(w, len(vocab))
    tf = np.zeros((len(toks), len(vocab)), dtype=np.float64)
    for i, t in enumerate(toks):
        np.add.at(tf[i], np.array([vocab[w] for w in t], dtype=np.intp), 1.0)
    return tf, list(vocab)


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    return np.divide(num, den, out=np.zeros_like(num, dtype=np.float64), where=den > 0)


def featurize(doc: Document) -> np.ndarray:
    """(n, FEATURE_DIM) matrix; row i is sentence i's feature vector."""
    n = doc.n
    toks = [tokenize(s) for s in doc.sentences]
    tf, vocab = _term_matrix(toks)
    doc_tf = tf.sum(axis=0)
    present = tf > 0
    lengths = tf.sum(axis=1)
    stop = stopwords()
    is_stop = np.array([w in stop for w in vocab], dtype=np.float64)

    X = np.zeros((n, cfg.FEATURE_DIM), dtype=np.float64)
    X[:, 0] = np.arange(n) / n
    X[:, 1] = np.arange(n) < cfg.LEAD_SIZE
    X[:, 2] = np.minimum(1.0, lengths / cfg.LENGTH_NORM)
    # a type appears elsewhere iff the document holds more copies than this sentence
    X[:, 3] = _ratio((present & (doc_tf > tf)).sum(axis=1), present.sum(axis=1))
    X[:, 4] = _ratio(tf @ doc_tf, np.linalg.norm(tf, axis=1) * np.linalg.norm(doc_tf))
    X[:, 6] = _ratio(tf @ is_stop, lengths)
    X[:, 7] = 1.0
    for i, sent in enumerate(doc.sentences):
        raw = raw_tokens(sent)
        if raw:
            X[i, 5] = sum(1 for w in raw if w[0].isupper()) / len(raw)
    return X


# -------------------------------------------------------------------
# Scorer
# -------------------------------------------------------------------
@dataclass
class ScorerParams:
    weights: np.ndarray
    bias: float = 0.0

    @staticmethod
    def zeros(dim: int = cfg.FEATURE_DIM) -> "ScorerParams":
        return ScorerParams(np.zeros(dim, dtype=np.float64), 0.0)

    def as_vector(self) -> np.ndarray:
        return np.append(self.weights, self.bias)

    @staticmethod
    def from_vector(theta: np.ndarray) -> "ScorerParams":
        theta = np.asarray(theta, dtype=np.float64)
        return ScorerParams(theta[:-1].copy(), float(theta[-1]))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.weights)) and np.isfinite(self.bias))

    def to_dict(self) -> dict:
        return {
            "weights": [float(w) for w in self.weights],
            "bias": float(self.bias),
            "feature_version": cfg.FEATURE_VERSION,
        }

    @staticmethod
    def from_dict(d: dict) -> "ScorerParams":
        version = int(d.get("feature_version", -1))
        if version != cfg.FEATURE_VERSION:
            raise ValueError(
                f"Checkpoint feature_version {version} does not match this build ({cfg.FEATURE_VERSION})."
            )
        weights = np.asarray(d["weights"], dtype=np.float64)
        if weights.shape != (cfg.FEATURE_DIM,):
            raise ValueError(f"Checkpoint has {weights.size} weights, expected {cfg.FEATURE_DIM}.")
        return ScorerParams(weights, float(d["bias"]))


def save_params(params: ScorerParams, path: str | Path, *, step: int | None = None) -> None:
    data = params.to_dict()
    if step is not None:
        data["step"] = int(step)
    write_json(path, data)


def load_params(path: str | Path) -> Tuple[ScorerParams, int]:
    d = read_json(path)
    return ScorerParams.from_dict(d), int(d.get("step", 0))


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=np.float64)))


def score(params: ScorerParams, features: np.ndarray) -> np.ndarray:
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.weights.shape[0]:
        raise ValueError(
            f"feature dimension {X.shape[-1] if X.ndim else 0} does not match "
            f"{params.weights.shape[0]} weights"
        )
    return np.clip(sigmoid(X @ params.weights + params.bias), _A_EPS, 1.0 - _A_EPS)


def model_distribution(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    return a / a.sum()


def policy_entropy(a: np.ndarray) -> float:
    p = model_distribution(a)
    return float(-(p * np.log(p)).sum())


# -------------------------------------------------------------------
# Selection
# -------------------------------------------------------------------
def summary_size(n: int) -> int:
    return min(cfg.SUMMARY_SIZE, n)


def sample_summary(a: np.ndarray, rng: np.random.Generator) -> Tuple[int, ...]:
    """Sequential sampling without replacement, P(i) = a_i / sum of unselected a_j."""
    a = np.asarray(a, dtype=np.float64)
    n = len(a)
    if n < 1:
        raise ValueError("cannot sample a summary from an empty document")
    remaining = np.ones(n, dtype=bool)
    picked = []
    for _ in range(summary_size(n)):
        w = np.where(remaining, a, 0.0)
        cum = np.cumsum(w)
        u = rng.random() * cum[-1]
        i = int(np.searchsorted(cum, u, side="right"))
        i = min(i, n - 1)
        while not remaining[i]:  # u landed exactly on a zero-width edge
            i -= 1
        picked.append(i)
        remaining[i] = False
    return tuple(picked)


def greedy_decode(a: Sequence[float]) -> Tuple[int, ...]:
    a = np.asarray(a, dtype=np.float64)
    if len(a) < 1:
        raise ValueError("cannot decode a summary from an empty document")
    order = sorted(range(len(a)), key=lambda i: (-a[i], i))
    return tuple(order[: summary_size(len(a))])


def log_prob_and_grad(a: np.ndarray, selection: Sequence[int]) -> Tuple[float, np.ndarray]:
    """log Prob(selection) under sequential sampling, and its gradient w.r.t. a."""
    a = np.asarray(a, dtype=np.float64)
    remaining = np.ones(len(a), dtype=bool)
    logp = 0.0
    grad = np.zeros_like(a)
    for i in selection:
        total = a[remaining].sum()
        logp += np.log(a[i]) - np.log(total)
        grad[i] += 1.0 / a[i]
        grad[remaining] -= 1.0 / total
        remaining[i] = False
    return float(logp), grad
