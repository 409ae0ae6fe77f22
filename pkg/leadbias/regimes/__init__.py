from __future__ import annotations
from typing import Callable, Dict, Optional, Type

import numpy as np

# ---- registry ----
_REGISTRY: Dict[str, "Type[Regime]"] = {}


def register(name: str) -> Callable[[Type["Regime"]], Type["Regime"]]:
    key = name.lower().strip()

    def _wrap(cls: Type["Regime"]) -> Type["Regime"]:
        cls.name = key
        _REGISTRY[key] = cls
        return cls
    return _wrap


def get_regime_cls(name: str) -> Optional["Type[Regime]"]:
    _load_builtins()
    return _REGISTRY.get((name or "").lower().strip())


def get_regime(name: str) -> "Regime":
    cls = get_regime_cls(name)
    if cls is None:
        raise KeyError(name)
    return cls()


def list_registered() -> Dict[str, "Type[Regime]"]:
    _load_builtins()
    return dict(_REGISTRY)


def _load_builtins() -> None:
    from . import builtin  # noqa: F401  (registers on import)


# ---- exported base ----
class Regime:
    """
    A training regime = which auxiliary loss joins the policy loss, and
    whether the first epochs train on sentence-shuffled articles.
    Subclasses override what they need; the base class has no aux term.
    """
    name: str = "base"
    uses_shuffled_pretrain: bool = False
    has_aux: bool = False

    def aux_loss(self, p_r: np.ndarray, a: np.ndarray) -> float:
        return 0.0

    def aux_grad_affinity(self, p_r: np.ndarray, a: np.ndarray) -> np.ndarray:
        """d aux_loss / d affinities."""
        return np.zeros_like(np.asarray(a, dtype=np.float64))
