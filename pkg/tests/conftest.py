import os

# progress bars off before leadbias.config is imported
os.environ.setdefault("LEADBIAS_PROGRESS", "0")
os.environ.setdefault("LEADBIAS_WORKERS", "1")

import pytest

from leadbias.core.corpus import Corpus, make_document
from leadbias.core.oracle import compute_records
from leadbias.core.synth import generate_corpus
from leadbias.core.trainer import TrainerConfig


@pytest.fixture
def toy_corpus():
    docs = [
        make_document(
            f"d{k}",
            [f"doc{k} sentence{i} alpha{i} beta{k}" for i in range(8)],
            [f"doc{k} sentence0 alpha0", f"alpha4 beta{k}"],
        )
        for k in range(4)
    ]
    return Corpus(docs, "test")


@pytest.fixture(scope="session")
def small_train():
    return generate_corpus(12, n_sentences=8, lead_prob=0.7, seed=1, split="train")


@pytest.fixture(scope="session")
def small_dev():
    return generate_corpus(6, n_sentences=8, lead_prob=0.7, seed=2, split="dev")


@pytest.fixture(scope="session")
def small_cache(small_train):
    return {r.doc_id: r for r in compute_records(small_train)}


@pytest.fixture
def quick_conf():
    def _make(**overrides):
        base = dict(alpha=0.5, beta=0.5, epochs_total=2, pretrain_epochs=0, samples_per_doc=4, regime="base", seed=3)
        base.update(overrides)
        return TrainerConfig(**base)
    return _make
