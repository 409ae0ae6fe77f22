from __future__ import annotations

import numpy as np

from . import Regime, register
from ..core.policy import model_distribution


def kl_loss(p_r: np.ndarray, p_m: np.ndarray) -> float:
    """D_KL(P_R || P_M) in nats, with 0 * ln(0/x) = 0."""
    p_r = np.asarray(p_r, dtype=np.float64)
    p_m = np.asarray(p_m, dtype=np.float64)
    if p_r.shape != p_m.shape:
        raise ValueError(f"kl_loss: length mismatch ({p_r.size} vs {p_m.size})")
    nz = p_r > 0
    return float(np.sum(p_r[nz] * (np.log(p_r[nz]) - np.log(p_m[nz]))))


def entropy_loss(p_m: np.ndarray) -> float:
    """Negated entropy sum p ln p; minimizing it maximizes entropy."""
    p_m = np.asarray(p_m, dtype=np.float64)
    return float(np.sum(p_m * np.log(p_m)))


# ---------- base (policy loss only) ----------
@register("base")
class Base(Regime):
    pass


# ---------- entropy (undirected exploration bonus) ----------
@register("entropy")
class Entropy(Regime):
    has_aux = True

    def aux_loss(self, p_r, a):
        return entropy_loss(model_distribution(a))

    def aux_grad_affinity(self, p_r, a):
        a = np.asarray(a, dtype=np.float64)
        p = model_distribution(a)
        logp = np.log(p)
        return (logp - np.dot(p, logp)) / a.sum()


# ---------- kl (match the ROUGE distribution) ----------
@register("kl")
class KL(Regime):
    has_aux = True

    def aux_loss(self, p_r, a):
        return kl_loss(p_r, model_distribution(a))

    def aux_grad_affinity(self, p_r, a):
        a = np.asarray(a, dtype=np.float64)
        p_r = np.asarray(p_r, dtype=np.float64)
        return -p_r / a + p_r.sum() / a.sum()


# ---------- multi-stage variants ----------
@register("pretrain")
class Pretrain(Base):
    uses_shuffled_pretrain = True


@register("pretrain_kl")
class PretrainKL(KL):
    uses_shuffled_pretrain = True
