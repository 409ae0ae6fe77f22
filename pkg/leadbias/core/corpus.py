# leadbias/core/corpus.py
from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .. import config as cfg
from .storage import write_lines

log = logging.getLogger(__name__)

U64_MASK = (1 << 64) - 1


class CorpusFormatError(ValueError):
    pass


# -------------------------------------------------------------------
# Data model
# -------------------------------------------------------------------
@dataclass(frozen=True)
class Document:
    id: str
    sentences: tuple
    reference: tuple

    @property
    def n(self) -> int:
        return len(self.sentences)

    def to_dict(self) -> dict:
        return {"id": self.id, "sentences": list(self.sentences), "reference": list(self.reference)}


@dataclass
class Corpus:
    documents: List[Document] = field(default_factory=list)
    split_name: str = "test"
    _positions: Dict[str, int] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def ids(self) -> List[str]:
        return [d.id for d in self.documents]

    def position(self, doc_id: str) -> Optional[int]:
        if len(self._positions) != len(self.documents):
            self._positions = {d.id: i for i, d in enumerate(self.documents)}
        return self._positions.get(doc_id)

    def subset(self, ids: List[str]) -> "Corpus":
        by_id = {d.id: d for d in self.documents}
        return Corpus([by_id[i] for i in ids], self.split_name)


class Kind(str, Enum):
    ORIGINAL = "original"
    RANDOM = "random"
    REVERSE = "reverse"
    INSERT_LEAD = "insert_lead"
    INSERT_LEAD3 = "insert_lead3"


KINDS: tuple = tuple(k.value for k in Kind)


@dataclass(frozen=True)
class Perturbation:
    kind: Kind
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "seed", int(self.seed) & U64_MASK)


# -------------------------------------------------------------------
# Ingestion / persistence
# -------------------------------------------------------------------
def make_document(doc_id: str, sentences, reference) -> Document:
    """Build a Document, capping sentences at MAX_SENTENCES."""
    return Document(str(doc_id), tuple(sentences)[: cfg.MAX_SENTENCES], tuple(reference))


def _str_list(obj: dict, key: str, where: str) -> list:
    val = obj.get(key)
    if not isinstance(val, list) or not all(isinstance(s, str) for s in val):
        raise CorpusFormatError(f"{where}: '{key}' must be an array of strings")
    return val


def split_from_path(path: str | Path) -> str:
    head = Path(path).name.split(".", 1)[0].lower()
    return head if head in cfg.SPLITS else "test"


def load_jsonl(path: str | Path, split_name: Optional[str] = None) -> Corpus:
    docs: List[Document] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusFormatError(f"line {lineno}: malformed JSON ({e.msg})") from None
            if not isinstance(obj, dict):
                raise CorpusFormatError(f"line {lineno}: expected a JSON object")
            doc_id = obj.get("id")
            if not isinstance(doc_id, str) or not doc_id:
                raise CorpusFormatError(f"line {lineno}: 'id' must be a non-empty string")
            where = f"document '{doc_id}' (line {lineno})"
            sentences = _str_list(obj, "sentences", where)
            reference = _str_list(obj, "reference", where)
            if not sentences:
                raise CorpusFormatError(f"{where}: empty 'sentences'")
            if doc_id in seen:
                raise CorpusFormatError(f"duplicate document id '{doc_id}' (line {lineno})")
            seen.add(doc_id)
            docs.append(make_document(doc_id, sentences, reference))

    corpus = Corpus(docs, split_name or split_from_path(path))
    log.info(f"[corpus] Loaded {len(docs)} documents from {path} (split={corpus.split_name})")
    return corpus


def save_jsonl(corpus: Corpus, path: str | Path) -> None:
    write_lines(path, (json.dumps(d.to_dict(), ensure_ascii=False) for d in corpus.documents))
    log.info(f"[corpus] Wrote {len(corpus)} documents to {path}")


def perturbed_filename(split: str, kind: str | Kind, seed: int) -> str:
    return f"{split}.{Kind(kind).value}.{int(seed)}.jsonl"


# -------------------------------------------------------------------
# Perturbations
# -------------------------------------------------------------------
def stable_doc_hash(doc_id: str) -> int:
    return int.from_bytes(hashlib.sha256(doc_id.encode("utf-8")).digest()[:8], "big")


def doc_rng(seed: int, doc_id: str) -> np.random.Generator:
    """Per-document stream: independent of corpus iteration order."""
    return np.random.default_rng((int(seed) ^ stable_doc_hash(doc_id)) & U64_MASK)


def _foreign_sentence(doc: Document, pool: Corpus, rng: np.random.Generator) -> str:
    own = pool.position(doc.id)
    candidates = len(pool) - (own is not None)
    if candidates < 1:
        raise ValueError(f"insert perturbation of '{doc.id}' needs a pool with at least 2 documents")
    k = int(rng.integers(candidates))
    if own is not None and k >= own:
        k += 1
    donor = pool.documents[k]
    return donor.sentences[int(rng.integers(len(donor.sentences)))]


def perturb(doc: Document, p: Perturbation, pool: Corpus) -> Document:
    kind = p.kind
    sents = list(doc.sentences)

    if kind is Kind.ORIGINAL:
        return doc
    if kind is Kind.REVERSE:
        sents.reverse()
    elif kind is Kind.RANDOM:
        sents = [sents[i] for i in shuffle_order(doc, p.seed)]
    else:
        rng = doc_rng(p.seed, doc.id)
        foreign = _foreign_sentence(doc, pool, rng)
        if kind is Kind.INSERT_LEAD:
            idx = 0
        else:
            idx = min(int(rng.integers(cfg.LEAD_SIZE)), len(sents))
        sents.insert(idx, foreign)

    return replace(doc, sentences=tuple(sents[: cfg.MAX_SENTENCES]))


def shuffle_order(doc: Document, seed: int) -> np.ndarray:
    """The permutation kind=random applies to `doc` (new position -> old index)."""
    return doc_rng(seed, doc.id).permutation(doc.n)


def perturb_corpus(c: Corpus, p: Perturbation, *, workers: int | None = None) -> Corpus:
    if p.kind in (Kind.INSERT_LEAD, Kind.INSERT_LEAD3) and len(c) < 2:
        raise ValueError(f"{p.kind.value} needs a corpus with at least 2 documents")
    workers = workers or cfg.WORKERS
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            docs = list(ex.map(lambda d: perturb(d, p, c), c.documents))
    else:
        docs = [perturb(d, p, c) for d in c.documents]
    log.debug(f"[corpus] Perturbed {len(docs)} documents ({p.kind.value}, seed={p.seed})")
    return Corpus(docs, c.split_name)
