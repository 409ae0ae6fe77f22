# leadbias/core/trainer.py
"""
Policy-gradient training of the affinity scorer.

Total loss per document is L_M + beta * L_aux, minimized by plain SGD:
  L_M   = -(1/B) sum_b (R_b - mean(R)) * log Prob(sample_b)
  L_aux = KL(P_R || P_M) (kl regimes), sum P_M ln P_M (entropy), or 0 (base).
Multi-stage regimes train their first `pretrain_epochs` epochs on
sentence-shuffled articles, reshuffled every epoch.
"""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field, fields, asdict
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from dotenv import dotenv_values
from tqdm import tqdm

from .. import config as cfg
from ..regimes import Regime, get_regime, list_registered
from .corpus import Corpus, Document, Kind, Perturbation, perturb, shuffle_order
from .oracle import OracleRecord, RewardMemo, target_distribution
from .policy import ScorerParams, featurize, log_prob_and_grad, policy_entropy, sample_summary, save_params, score
from .storage import atomic_write_text, fmt_float

log = logging.getLogger(__name__)

SOURCE_SHUFFLED = "shuffled"
SOURCE_ORIGINAL = "original"


class ConfigError(ValueError):
    pass


class GradientError(RuntimeError):
    pass


# -------------------------------------------------------------------
# Config
# -------------------------------------------------------------------
@dataclass
class TrainerConfig:
    alpha: float = cfg.DEFAULT_ALPHA
    beta: float = cfg.DEFAULT_BETA
    epochs_total: int = cfg.DEFAULT_EPOCHS
    pretrain_epochs: int = cfg.DEFAULT_PRETRAIN_EPOCHS
    samples_per_doc: int = cfg.DEFAULT_SAMPLES_PER_DOC
    regime: str = cfg.DEFAULT_REGIME
    seed: int = cfg.DEFAULT_SEED

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be > 0 (got {self.alpha})")
        if not self.beta >= 0:
            raise ConfigError(f"beta must be >= 0 (got {self.beta})")
        if self.epochs_total < 0:
            raise ConfigError(f"epochs_total must be >= 0 (got {self.epochs_total})")
        if not 0 <= self.pretrain_epochs <= self.epochs_total:
            raise ConfigError(
                f"pretrain_epochs must be in [0, epochs_total={self.epochs_total}] (got {self.pretrain_epochs})"
            )
        if self.samples_per_doc < 1:
            raise ConfigError(f"samples_per_doc must be >= 1 (got {self.samples_per_doc})")
        if self.regime not in list_registered():
            known = ", ".join(sorted(list_registered()))
            raise ConfigError(f"unknown regime '{self.regime}' (known: {known})")
        if not 0 <= self.seed < (1 << 64):
            raise ConfigError(f"seed must be an unsigned 64-bit integer (got {self.seed})")

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_mapping(d: Mapping[str, object]) -> "TrainerConfig":
        types = {f.name: f.type for f in fields(TrainerConfig)}
        kwargs: Dict[str, object] = {}
        for key, raw in d.items():
            k = key.strip().lower()
            if k not in types:
                raise ConfigError(f"unknown config key '{key}'")
            if raw is None:
                raise ConfigError(f"config key '{key}' has no value")
            try:
                if types[k] in ("float", float):
                    kwargs[k] = float(raw)
                elif types[k] in ("int", int):
                    kwargs[k] = int(str(raw).strip())
                else:
                    kwargs[k] = str(raw).strip().lower()
            except ValueError:
                raise ConfigError(f"config key '{key}': cannot parse {raw!r}") from None
        # a short run without an explicit warm-up keeps whatever warm-up fits
        if "pretrain_epochs" not in kwargs and "epochs_total" in kwargs:
            kwargs["pretrain_epochs"] = min(cfg.DEFAULT_PRETRAIN_EPOCHS, kwargs["epochs_total"])
        return TrainerConfig(**kwargs)


def load_config(path: str | Path) -> TrainerConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    conf = TrainerConfig.from_mapping(dotenv_values(p))
    log.info(f"[trainer] Config from {p}: {conf.to_dict()}")
    return conf


# -------------------------------------------------------------------
# State
# -------------------------------------------------------------------
@dataclass
class TrainState:
    params: ScorerParams = field(default_factory=ScorerParams.zeros)
    step: int = 0
    epoch: int = 0
    curve: List[Tuple[int, float]] = field(default_factory=list)
    sources: List[str] = field(default_factory=list)        # data source tag per epoch
    entropy: List[float] = field(default_factory=list)      # mean dev policy entropy per epoch


@dataclass
class LossBreakdown:
    policy_loss: float
    aux_loss: float
    reward_mean: float


# -------------------------------------------------------------------
# Losses and gradients
# -------------------------------------------------------------------
def loss_and_grad(
    theta: np.ndarray,
    features: np.ndarray,
    p_r: np.ndarray,
    samples: Sequence[Sequence[int]],
    rewards: Sequence[float],
    regime: Regime,
    beta: float,
) -> Tuple[float, np.ndarray, LossBreakdown]:
    """
    Surrogate loss and its gradient w.r.t. theta = (weights..., bias).
    Rewards and samples are constants; only the affinities depend on theta.
    """
    params = ScorerParams.from_vector(theta)
    a = score(params, features)
    rewards = np.asarray(rewards, dtype=np.float64)
    adv = rewards - rewards.mean()
    B = len(samples)

    policy_loss = 0.0
    g_a = np.zeros_like(a)
    for sel, adv_b in zip(samples, adv):
        logp, dlogp = log_prob_and_grad(a, sel)
        policy_loss -= adv_b * logp / B
        g_a -= adv_b * dlogp / B

    aux = regime.aux_loss(p_r, a)
    total = policy_loss
    if regime.has_aux and beta != 0.0:
        total = policy_loss + beta * aux
        g_a = g_a + beta * regime.aux_grad_affinity(p_r, a)

    g_z = g_a * a * (1.0 - a)
    grad = np.append(features.T @ g_z, g_z.sum())
    return float(total), grad, LossBreakdown(float(policy_loss), float(aux), float(rewards.mean()))


def _check_record(doc: Document, record: Optional[OracleRecord]) -> OracleRecord:
    if record is None:
        raise ValueError(f"no oracle cache record for document '{doc.id}'")
    if len(record.sentence_scores) != doc.n:
        raise ValueError(
            f"cache record for '{doc.id}' has {len(record.sentence_scores)} scores, document has {doc.n} sentences"
        )
    return record


def policy_gradient_step(
    state: TrainState,
    doc: Document,
    cache: OracleRecord,
    conf: TrainerConfig,
    *,
    rng: Optional[np.random.Generator] = None,
    memo: Optional[RewardMemo] = None,
    regime: Optional[Regime] = None,
    p_r: Optional[np.ndarray] = None,
    features: Optional[np.ndarray] = None,
) -> Tuple[TrainState, LossBreakdown]:
    """
    One update on one document. `p_r` overrides the cached distribution
    (shuffled epochs pass it remapped to the presented sentence order).
    """
    if p_r is None:
        p_r = target_distribution(_check_record(doc, cache).sentence_scores)
    rng = rng if rng is not None else np.random.default_rng([conf.seed, state.step])
    memo = memo if memo is not None else RewardMemo()
    regime = regime or get_regime(conf.regime)
    X = features if features is not None else featurize(doc)

    a = score(state.params, X)
    samples = [sample_summary(a, rng) for _ in range(conf.samples_per_doc)]
    rewards = [memo.reward(doc, s) for s in samples]

    theta = state.params.as_vector()
    _, grad, breakdown = loss_and_grad(theta, X, p_r, samples, rewards, regime, conf.beta)
    if not np.all(np.isfinite(grad)):
        raise GradientError(
            f"non-finite gradient at step {state.step} on document '{doc.id}' "
            f"(regime={regime.name}, affinities min={a.min():.3g} max={a.max():.3g})"
        )
    new_params = ScorerParams.from_vector(theta - conf.alpha * grad)
    if not new_params.is_finite():
        raise GradientError(f"parameters became non-finite at step {state.step} on document '{doc.id}'")

    state.params = new_params
    state.step += 1
    return state, breakdown


# -------------------------------------------------------------------
# Training loop
# -------------------------------------------------------------------
def _epoch_seed(seed: int, epoch: int) -> int:
    return int(np.random.SeedSequence([seed, epoch]).generate_state(1, np.uint64)[0])


def _presented(doc: Document, record: OracleRecord, epoch_seed: int, shuffled: bool) -> Tuple[Document, np.ndarray]:
    p_r = target_distribution(record.sentence_scores)
    if not shuffled:
        return doc, p_r
    order = shuffle_order(doc, epoch_seed)
    view = perturb(doc, Perturbation(Kind.RANDOM, epoch_seed), Corpus([doc]))
    return view, p_r[order]


def dev_metrics(params: ScorerParams, corpus_dev: Corpus) -> Tuple[float, float]:
    """Greedy-decode mean AvgRouge and mean policy entropy on dev."""
    from .evalharness import evaluate
    from .selectors import policy_selector

    if len(corpus_dev) == 0:
        return 0.0, 0.0
    report = evaluate(policy_selector(params), corpus_dev)
    ent = float(np.mean([policy_entropy(score(params, featurize(d))) for d in corpus_dev]))
    return report.avg_rouge, ent


def train(
    corpus_train: Corpus,
    corpus_dev: Corpus,
    cache: Mapping[str, OracleRecord],
    conf: TrainerConfig,
) -> TrainState:
    regime = get_regime(conf.regime)
    state = TrainState()
    rng = np.random.default_rng(conf.seed)
    memo = RewardMemo()
    base_features: Dict[str, np.ndarray] = {}

    for doc in corpus_train:
        _check_record(doc, cache.get(doc.id))

    log.info(
        f"[trainer] regime={regime.name} epochs={conf.epochs_total} "
        f"(shuffled pretrain: {conf.pretrain_epochs if regime.uses_shuffled_pretrain else 0}) "
        f"B={conf.samples_per_doc} alpha={conf.alpha} beta={conf.beta} docs={len(corpus_train)}"
    )

    for epoch in range(1, conf.epochs_total + 1):
        shuffled = regime.uses_shuffled_pretrain and epoch <= conf.pretrain_epochs
        source = SOURCE_SHUFFLED if shuffled else SOURCE_ORIGINAL
        epoch_seed = _epoch_seed(conf.seed, epoch)
        visit = np.random.default_rng([conf.seed, epoch]).permutation(len(corpus_train))

        rewards, auxes = [], []
        bar = tqdm(visit, desc=f"epoch {epoch} ({source})", disable=not cfg.PROGRESS, leave=False)
        for idx in bar:
            doc = corpus_train.documents[int(idx)]
            record = cache[doc.id]
            view, p_r = _presented(doc, record, epoch_seed, shuffled)
            if shuffled:
                X = featurize(view)
            else:
                X = base_features.get(doc.id)
                if X is None:
                    X = base_features[doc.id] = featurize(doc)
            state, br = policy_gradient_step(
                state, view, record, conf, rng=rng, memo=memo, regime=regime, p_r=p_r, features=X
            )
            rewards.append(br.reward_mean)
            auxes.append(br.aux_loss)

        state.epoch = epoch
        state.sources.append(source)
        dev_score, dev_entropy = dev_metrics(state.params, corpus_dev)
        state.curve.append((epoch, dev_score))
        state.entropy.append(dev_entropy)
        log.info(
            f"[trainer] epoch {epoch}/{conf.epochs_total} source={source} "
            f"dev_avg_rouge={dev_score:.4f} reward={np.mean(rewards) if rewards else 0.0:.4f} "
            f"aux={np.mean(auxes) if auxes else 0.0:.4f} entropy={dev_entropy:.4f} memo={len(memo)}"
        )
    return state


# -------------------------------------------------------------------
# Outputs
# -------------------------------------------------------------------
def emit_curve(state: TrainState, path: str | Path) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epoch", "avg_rouge"])
    for epoch, value in state.curve:
        w.writerow([epoch, fmt_float(value)])
    atomic_write_text(path, buf.getvalue())
    log.info(f"[trainer] Curve written: {path} ({len(state.curve)} rows)")


def save_checkpoint(state: TrainState, path: str | Path) -> None:
    save_params(state.params, path, step=state.step)
    log.info(f"[trainer] Checkpoint written: {path} (step={state.step})")
