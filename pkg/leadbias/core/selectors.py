# leadbias/core/selectors.py
"""Named summary selectors: Document -> selected sentence indices."""
from __future__ import annotations

from typing import Callable, Dict, Mapping, Optional, Tuple

from .. import config as cfg
from .corpus import Document
from .oracle import OracleRecord, best_triplet, triplet_reward
from .policy import ScorerParams, featurize, greedy_decode, score

Selector = Callable[[Document], Tuple[int, ...]]

# ---- registry of parameterless built-ins ----
_BUILTINS: Dict[str, Callable[..., Selector]] = {}


def register(name: str):
    key = name.lower().strip()

    def _wrap(factory: Callable[..., Selector]) -> Callable[..., Selector]:
        _BUILTINS[key] = factory
        return factory
    return _wrap


def list_builtins() -> Tuple[str, ...]:
    return tuple(sorted(_BUILTINS))


def get_builtin(name: str, *, cache: Optional[Mapping[str, OracleRecord]] = None) -> Selector:
    factory = _BUILTINS.get((name or "").lower().strip())
    if factory is None:
        raise KeyError(f"unknown selector '{name}' (known: {', '.join(list_builtins())})")
    return factory(cache=cache)


@register("lead3")
def lead3_selector(*, cache=None) -> Selector:
    def select(doc: Document) -> Tuple[int, ...]:
        return tuple(range(min(cfg.LEAD_SIZE, doc.n)))
    return select


@register("oracle")
def oracle_selector(*, cache: Optional[Mapping[str, OracleRecord]] = None) -> Selector:
    """Best triplet; read from the cache when the document has a record there."""
    def select(doc: Document) -> Tuple[int, ...]:
        rec = cache.get(doc.id) if cache else None
        # a record computed on another sentence order no longer reproduces its score
        if (rec is None or len(rec.sentence_scores) != doc.n
                or triplet_reward(doc, rec.best_triplet) != rec.best_score):
            rec = best_triplet(doc)
        return tuple(rec.best_triplet)
    return select


def policy_selector(params: ScorerParams) -> Selector:
    def select(doc: Document) -> Tuple[int, ...]:
        return greedy_decode(score(params, featurize(doc)))
    return select
