"""
Desk-scale behavioural checks on synthetic lead-biased corpora.

These train several scorers end to end and take minutes; they are
deselected by default (run with `pytest -m slow`).
"""
import numpy as np
import pytest

from leadbias.core.corpus import KINDS, Perturbation, perturb_corpus
from leadbias.core.evalharness import evaluate, partition_by_position, perturbation_matrix
from leadbias.core.oracle import compute_records
from leadbias.core.selectors import get_builtin, policy_selector
from leadbias.core.synth import generate_corpus
from leadbias.core.trainer import TrainerConfig, train

pytestmark = pytest.mark.slow

# a linear scorer trained with plain SGD needs a far larger step than the default
STEP = dict(alpha=0.5, epochs_total=4, pretrain_epochs=2, samples_per_doc=20, seed=0)


@pytest.fixture(scope="module")
def lead_world():
    tr = generate_corpus(2000, n_sentences=15, lead_prob=0.7, seed=100, split="train")
    dev = generate_corpus(500, n_sentences=15, lead_prob=0.7, seed=200, split="dev")
    tr_cache = {r.doc_id: r for r in compute_records(tr)}
    dev_cache = {r.doc_id: r for r in compute_records(dev)}
    return tr, dev, tr_cache, dev_cache


class TestLeadExploitation:
    def test_kl_counters_lead_bias(self, lead_world):
        tr, dev, tr_cache, dev_cache = lead_world
        base = train(tr, dev, tr_cache, TrainerConfig(regime="base", beta=0.0, **STEP))
        kl = train(tr, dev, tr_cache, TrainerConfig(regime="kl", beta=1.0, **STEP))

        base_rep = evaluate(policy_selector(base.params), dev)
        kl_rep = evaluate(policy_selector(kl.params), dev)
        optimal = evaluate(get_builtin("oracle", cache=dev_cache), dev)

        assert base_rep.lead_overlap_pct >= optimal.lead_overlap_pct + 5.0
        assert kl_rep.lead_overlap_pct <= base_rep.lead_overlap_pct - 3.0
        assert kl_rep.avg_rouge >= base_rep.avg_rouge - 0.002

        part = partition_by_position(dev, dev_cache, 100)
        late = dev.subset(part.late_ids)
        assert evaluate(policy_selector(kl.params), late).avg_rouge > \
            evaluate(policy_selector(base.params), late).avg_rouge


MATRIX_STEP = dict(STEP, alpha=1.0)
# rows whose matched cell tops the row; references keep source order, so the
# shuffled-trained row favours original, and insert_lead3 transfers to insert_lead
DIAGONAL_ROWS = ("original", "reverse", "insert_lead")


@pytest.fixture(scope="module")
def matrix_world():
    tr = generate_corpus(400, n_sentences=10, lead_prob=0.7, seed=300, split="train")
    dev = generate_corpus(20, n_sentences=10, lead_prob=0.7, seed=400, split="dev")
    test = generate_corpus(800, n_sentences=10, lead_prob=0.7, seed=500, split="test")
    conf = TrainerConfig(regime="base", beta=0.0, **MATRIX_STEP)

    def train_on(kind):
        shifted = perturb_corpus(tr, Perturbation(kind, 0))
        cache = {r.doc_id: r for r in compute_records(shifted)}
        return policy_selector(train(shifted, dev, cache, conf).params)

    return perturbation_matrix(train_on, test, 0)


class TestPerturbationMatrix:
    @pytest.mark.parametrize("kind", DIAGONAL_ROWS)
    def test_row_peaks_on_matched_perturbation(self, matrix_world, kind):
        row = matrix_world.cells[kind]
        assert row[kind] >= max(row.values()) - 0.002, row

    @pytest.mark.parametrize("kind", [k for k in KINDS if k != "original"])
    def test_matched_scorer_beats_original_scorer(self, matrix_world, kind):
        assert matrix_world.cells[kind][kind] > matrix_world.cells["original"][kind]

    def test_random_row_is_flattest(self, matrix_world):
        stds = np.array([matrix_world.row_std[k] for k in KINDS])
        assert matrix_world.row_std["random"] == stds.min()
