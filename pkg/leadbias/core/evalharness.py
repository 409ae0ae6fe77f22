# leadbias/core/evalharness.py
"""
Evaluation artifacts: ROUGE table rows with lead overlap, the
train-kind x test-kind perturbation matrix, position partitions of a
test set, paired bootstrap significance and the JSON report.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .. import config as cfg
from .corpus import KINDS, Corpus, Document, Perturbation, perturb_corpus
from .oracle import OracleRecord
from .selectors import Selector
from .storage import write_json
from .text_metrics import rouge_scores

log = logging.getLogger(__name__)

PARTITIONS = ("early", "med", "late")


class CorpusTooSmallError(ValueError):
    pass


# -------------------------------------------------------------------
# ROUGE table rows
# -------------------------------------------------------------------
@dataclass
class EvalReport:
    rouge1_f1: float = 0.0
    rouge2_f1: float = 0.0
    rougeL_f1: float = 0.0
    avg_rouge: float = 0.0
    lead_overlap_pct: float = 0.0
    n_docs: int = 0
    doc_ids: List[str] = field(default_factory=list)
    per_doc_avg: List[float] = field(default_factory=list)

    def to_row(self) -> dict:
        return {
            "rouge1": self.rouge1_f1,
            "rouge2": self.rouge2_f1,
            "rougeL": self.rougeL_f1,
            "avg_rouge": self.avg_rouge,
            "overlap_pct": self.lead_overlap_pct,
            "n_docs": self.n_docs,
        }


def _score_doc(selector: Selector, doc: Document) -> Tuple[float, float, float, int, int]:
    picked = sorted(set(selector(doc)))
    r1, r2, rl = rouge_scores([doc.sentences[i] for i in picked], doc.reference)
    lead = sum(1 for i in picked if i < cfg.LEAD_SIZE)
    return r1.f1, r2.f1, rl.f1, lead, len(picked)


def evaluate(selector: Selector, corpus: Corpus, *, workers: int | None = None) -> EvalReport:
    workers = workers or cfg.WORKERS
    docs = corpus.documents
    if not docs:
        return EvalReport()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(lambda d: _score_doc(selector, d), docs))
    else:
        rows = [_score_doc(selector, d) for d in docs]

    arr = np.array([r[:3] for r in rows], dtype=np.float64)
    per_doc = arr.mean(axis=1)
    lead = sum(r[3] for r in rows)
    total = sum(r[4] for r in rows)
    return EvalReport(
        rouge1_f1=float(arr[:, 0].mean()),
        rouge2_f1=float(arr[:, 1].mean()),
        rougeL_f1=float(arr[:, 2].mean()),
        avg_rouge=float(per_doc.mean()),
        lead_overlap_pct=100.0 * lead / total if total else 0.0,
        n_docs=len(docs),
        doc_ids=[d.id for d in docs],
        per_doc_avg=[float(x) for x in per_doc],
    )


# -------------------------------------------------------------------
# Perturbation matrix
# -------------------------------------------------------------------
@dataclass
class PerturbationMatrix:
    kinds: Tuple[str, ...] = KINDS
    cells: Dict[str, Dict[str, float]] = field(default_factory=dict)
    row_mean: Dict[str, float] = field(default_factory=dict)
    row_std: Dict[str, float] = field(default_factory=dict)
    baselines: Dict[str, Dict[str, float]] = field(default_factory=dict)
    baseline_mean: Dict[str, float] = field(default_factory=dict)
    baseline_std: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kinds": list(self.kinds),
            "cells": self.cells,
            "row_mean": self.row_mean,
            "row_std": self.row_std,
            "baselines": {
                name: {"cells": row, "mean": self.baseline_mean[name], "std": self.baseline_std[name]}
                for name, row in self.baselines.items()
            },
        }


def _row_stats(row: Mapping[str, float]) -> Tuple[float, float]:
    vals = np.array(list(row.values()), dtype=np.float64)
    return float(vals.mean()), float(vals.std())  # population std


def perturbation_matrix(
    train_fn: Callable[[str], Selector],
    corpus_dev: Corpus,
    seed: int,
    *,
    baselines: Optional[Mapping[str, Selector]] = None,
) -> PerturbationMatrix:
    tests = {kind: perturb_corpus(corpus_dev, Perturbation(kind, seed)) for kind in KINDS}
    m = PerturbationMatrix()

    for train_kind in KINDS:
        selector = train_fn(train_kind)
        row = {test_kind: evaluate(selector, tests[test_kind]).avg_rouge for test_kind in KINDS}
        m.cells[train_kind] = row
        m.row_mean[train_kind], m.row_std[train_kind] = _row_stats(row)
        log.info(f"[eval] matrix row {train_kind}: mean={m.row_mean[train_kind]:.4f} std={m.row_std[train_kind]:.4f}")

    for name, selector in (baselines or {}).items():
        row = {test_kind: evaluate(selector, tests[test_kind]).avg_rouge for test_kind in KINDS}
        m.baselines[name] = row
        m.baseline_mean[name], m.baseline_std[name] = _row_stats(row)
    return m


# -------------------------------------------------------------------
# Position partitions
# -------------------------------------------------------------------
@dataclass
class PositionPartition:
    early_ids: List[str] = field(default_factory=list)
    med_ids: List[str] = field(default_factory=list)
    late_ids: List[str] = field(default_factory=list)

    def as_dict(self) -> Dict[str, List[str]]:
        return {"early": self.early_ids, "med": self.med_ids, "late": self.late_ids}


def partition_by_position(
    corpus_test: Corpus, cache: Mapping[str, OracleRecord], k: int = cfg.PARTITION_K
) -> PositionPartition:
    n = len(corpus_test)
    if k < 1:
        raise ValueError(f"partition size must be >= 1 (got {k})")
    if n < 3 * k:
        raise CorpusTooSmallError(f"corpus too small: {n} documents, need at least {3 * k} for k={k}")

    keys: List[float] = []
    for doc in corpus_test:
        rec = cache.get(doc.id)
        if rec is None:
            raise ValueError(f"no oracle cache record for document '{doc.id}'")
        keys.append(rec.mean_index)
    ids = corpus_test.ids()
    pos = range(n)

    early = sorted(pos, key=lambda i: (keys[i], i))[:k]
    taken = set(early)
    late = [i for i in sorted(pos, key=lambda i: (-keys[i], i)) if i not in taken][:k]
    taken.update(late)
    median = float(np.median(keys))
    med = [i for i in sorted(pos, key=lambda i: (abs(keys[i] - median), i)) if i not in taken][:k]

    return PositionPartition([ids[i] for i in early], [ids[i] for i in med], [ids[i] for i in late])


def partition_scores(
    selectors: Mapping[str, Selector], corpus: Corpus, partition: PositionPartition
) -> Dict[str, Dict[str, float]]:
    out: Dict[str, Dict[str, float]] = {}
    for part, ids in partition.as_dict().items():
        sub = corpus.subset(ids)
        out[part] = {name: evaluate(sel, sub).avg_rouge for name, sel in selectors.items()}
    return out


# -------------------------------------------------------------------
# Significance
# -------------------------------------------------------------------
def bootstrap_significance(
    per_doc_scores_a: Sequence[float],
    per_doc_scores_b: Sequence[float],
    iterations: int = cfg.BOOTSTRAP_ITERATIONS,
    seed: int = 0,
) -> float:
    """
    One-sided paired bootstrap, H1: system a beats system b.
    p = share of resamples where mean(a) <= mean(b); exact ties count one half.
    """
    a = np.asarray(per_doc_scores_a, dtype=np.float64)
    b = np.asarray(per_doc_scores_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"bootstrap: length mismatch ({a.size} vs {b.size})")
    if a.size < 2:
        raise ValueError("bootstrap needs at least 2 paired scores")
    if iterations < 1:
        raise ValueError("bootstrap needs at least 1 iteration")

    diffs = a - b
    n = diffs.size
    rng = np.random.default_rng(seed)
    worse = 0.0
    chunk = max(1, min(iterations, 2_000_000 // n))
    done = 0
    while done < iterations:
        m = min(chunk, iterations - done)
        means = diffs[rng.integers(0, n, size=(m, n))].mean(axis=1)
        worse += np.count_nonzero(means < 0) + 0.5 * np.count_nonzero(means == 0)
        done += m
    return float(worse / iterations)


def significance_table(
    reports: Mapping[str, EvalReport],
    baseline: str,
    iterations: int = cfg.BOOTSTRAP_ITERATIONS,
    seed: int = 0,
) -> Dict[str, float]:
    if baseline not in reports:
        raise KeyError(f"significance baseline '{baseline}' is not among the evaluated systems")
    base = reports[baseline]
    out: Dict[str, float] = {}
    for name, rep in reports.items():
        if name == baseline:
            continue
        if rep.doc_ids != base.doc_ids:
            raise ValueError(f"'{name}' and '{baseline}' were not evaluated on the same documents")
        out[name] = bootstrap_significance(rep.per_doc_avg, base.per_doc_avg, iterations, seed)
    return out


# -------------------------------------------------------------------
# Report
# -------------------------------------------------------------------
def _rounded(obj: Any, decimals: int = cfg.REPORT_DECIMALS) -> Any:
    if isinstance(obj, float):
        return round(obj, decimals)
    if isinstance(obj, dict):
        return {str(k): _rounded(v, decimals) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v, decimals) for v in obj]
    return obj


def build_report(
    reports: Optional[Mapping[str, EvalReport]] = None,
    matrix: Optional[PerturbationMatrix] = None,
    partitions: Optional[Mapping[str, Mapping[str, float]]] = None,
    significance: Optional[Mapping[str, Any]] = None,
) -> dict:
    parts = partitions or {}
    return _rounded({
        "tables": {"rouge": {name: rep.to_row() for name, rep in (reports or {}).items()}},
        "matrix": matrix.to_dict() if matrix is not None else {},
        "partitions": {p: dict(parts.get(p, {})) for p in PARTITIONS},
        "significance": dict(significance or {}),
    })


def report(
    path: str | Path,
    reports: Optional[Mapping[str, EvalReport]] = None,
    matrix: Optional[PerturbationMatrix] = None,
    partitions: Optional[Mapping[str, Mapping[str, float]]] = None,
    significance: Optional[Mapping[str, Any]] = None,
) -> dict:
    doc = build_report(reports, matrix, partitions, significance)
    write_json(path, doc)
    log.info(f"[eval] Report written: {path}")
    return doc
