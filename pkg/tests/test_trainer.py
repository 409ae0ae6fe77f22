import math

import numpy as np
import pytest

from leadbias.core.oracle import sentence_scores, target_distribution
from leadbias.core.policy import ScorerParams, log_prob_and_grad, sample_summary, score
from leadbias.core.trainer import (
    ConfigError,
    TrainerConfig,
    TrainState,
    _presented,
    emit_curve,
    load_config,
    loss_and_grad,
    policy_gradient_step,
    train,
)
from leadbias import config as cfg
from leadbias.regimes import get_regime, list_registered
from leadbias.regimes.builtin import entropy_loss, kl_loss


class TestAuxLosses:
    def test_kl_values(self):
        assert kl_loss([0.5, 0.5], [0.75, 0.25]) == pytest.approx(0.14384, abs=1e-5)
        assert kl_loss([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2))

    def test_kl_self_is_zero(self):
        p = np.array([0.1, 0.2, 0.7])
        assert abs(kl_loss(p, p)) < 1e-12

    def test_kl_nonnegative(self):
        rng = np.random.default_rng(0)
        P = rng.dirichlet(np.ones(5), size=10000)
        Q = rng.dirichlet(np.ones(5), size=10000)
        assert all(kl_loss(p, q) >= -1e-15 for p, q in zip(P, Q))

    def test_kl_length_mismatch(self):
        with pytest.raises(ValueError):
            kl_loss([0.5, 0.5], [1.0])

    def test_entropy_values(self):
        assert entropy_loss(np.full(4, 0.25)) == pytest.approx(-math.log(4), abs=1e-12)
        assert entropy_loss([0.5, 0.25, 0.25]) == pytest.approx(-1.0397, abs=1e-4)
        for n in (1, 3, 17):
            assert abs(entropy_loss(np.full(n, 1 / n)) + math.log(n)) < 1e-12


class TestRegimes:
    def test_registered(self):
        assert set(list_registered()) == {"base", "entropy", "kl", "pretrain", "pretrain_kl"}

    def test_flags(self):
        assert not get_regime("base").has_aux
        assert get_regime("kl").has_aux and not get_regime("kl").uses_shuffled_pretrain
        assert get_regime("pretrain_kl").has_aux and get_regime("pretrain_kl").uses_shuffled_pretrain
        assert get_regime("pretrain").uses_shuffled_pretrain and not get_regime("pretrain").has_aux

    def test_unknown(self):
        with pytest.raises(KeyError):
            get_regime("dropout")


class TestGradient:
    @pytest.mark.parametrize("regime", ["base", "entropy", "kl"])
    def test_matches_finite_differences(self, regime):
        rng = np.random.default_rng(["base", "entropy", "kl"].index(regime))
        reg = get_regime(regime)
        h = 1e-5
        for _ in range(20):
            X = rng.uniform(size=(4, cfg.FEATURE_DIM))
            X[:, -1] = 1.0
            theta = rng.normal(scale=0.5, size=cfg.FEATURE_DIM + 1)
            p_r = target_distribution(rng.uniform(size=4))
            samples = [tuple(int(i) for i in rng.permutation(4)[:3]) for _ in range(5)]
            rewards = rng.uniform(size=5)

            _, g, _ = loss_and_grad(theta, X, p_r, samples, rewards, reg, 0.7)
            num = np.zeros_like(theta)
            for k in range(theta.size):
                e = np.zeros_like(theta)
                e[k] = h
                up = loss_and_grad(theta + e, X, p_r, samples, rewards, reg, 0.7)[0]
                down = loss_and_grad(theta - e, X, p_r, samples, rewards, reg, 0.7)[0]
                num[k] = (up - down) / (2 * h)
            rel = np.abs(g - num) / np.maximum(np.abs(g) + np.abs(num), 1e-12)
            assert rel.max() < 1e-4

    def test_zero_beta_drops_aux_term(self):
        rng = np.random.default_rng(5)
        X = rng.uniform(size=(5, cfg.FEATURE_DIM))
        theta = rng.normal(size=cfg.FEATURE_DIM + 1)
        p_r = target_distribution(rng.uniform(size=5))
        samples, rewards = [(0, 1, 2), (4, 3, 1)], [0.3, 0.1]
        base = loss_and_grad(theta, X, p_r, samples, rewards, get_regime("base"), 0.0)
        kl = loss_and_grad(theta, X, p_r, samples, rewards, get_regime("kl"), 0.0)
        assert base[0] == kl[0]
        np.testing.assert_array_equal(base[1], kl[1])


    @pytest.mark.parametrize("regime", ["base", "kl"])
    def test_single_sample_has_no_policy_update(self, regime):
        rng = np.random.default_rng(8)
        X = rng.uniform(size=(6, cfg.FEATURE_DIM))
        theta = rng.normal(size=cfg.FEATURE_DIM + 1)
        p_r = target_distribution(rng.uniform(size=6))
        reg = get_regime(regime)
        total, g, br = loss_and_grad(theta, X, p_r, [(2, 0, 5)], [0.8], reg, 0.4)
        _, aux_only, _ = loss_and_grad(theta, X, p_r, [(2, 0, 5), (1, 3, 4)], [0.5, 0.5], reg, 0.4)
        assert br.policy_loss == 0.0
        np.testing.assert_array_equal(g, aux_only)
        if regime == "base":
            assert total == 0.0 and not g.any()

    def test_single_sample_step_leaves_params(self, small_train, small_cache, quick_conf):
        doc = small_train.documents[1]
        start = TrainState(params=ScorerParams.from_vector(np.linspace(-0.4, 0.4, cfg.FEATURE_DIM + 1)))
        before = start.params.as_vector().copy()
        state, _ = policy_gradient_step(
            start, doc, small_cache[doc.id], quick_conf(samples_per_doc=1), rng=np.random.default_rng(1)
        )
        np.testing.assert_array_equal(state.params.as_vector(), before)

    def test_score_function_has_zero_mean(self):
        # E[grad log P(sample)] = 0, so subtracting any sample-independent baseline leaves the update unbiased
        rng = np.random.default_rng(12)
        a = np.array([0.9, 0.2, 0.6, 0.4, 0.7])
        draws = np.array([log_prob_and_grad(a, sample_summary(a, rng))[1] for _ in range(10000)])
        mean = draws.mean(axis=0)
        sem = draws.std(axis=0, ddof=1) / np.sqrt(len(draws))
        assert np.all(np.abs(mean) <= 3 * sem)

    def test_constant_reward_has_no_expected_update(self):
        rng = np.random.default_rng(13)
        X = rng.uniform(size=(5, cfg.FEATURE_DIM))
        theta = rng.normal(scale=0.5, size=cfg.FEATURE_DIM + 1)
        a = score(ScorerParams.from_vector(theta), X)
        for _ in range(50):
            samples = [sample_summary(a, rng) for _ in range(4)]
            _, g, _ = loss_and_grad(theta, X, np.full(5, 0.2), samples, [0.35] * 4, get_regime("base"), 0.0)
            assert not g.any()


class TestConfig:
    def test_default_file(self):
        conf = load_config(cfg.DEFAULT_TRAINER_CONFIG)
        assert conf.regime == "base"
        assert conf.alpha == pytest.approx(1e-4)
        assert conf.beta == pytest.approx(0.0095)
        assert (conf.epochs_total, conf.pretrain_epochs, conf.samples_per_doc) == (4, 2, 20)

    def test_unknown_key(self, tmp_path):
        p = tmp_path / "t.cfg"
        p.write_text("alpha=0.1\nlearning_rate=3\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="learning_rate"):
            load_config(p)

    def test_unparsable(self, tmp_path):
        p = tmp_path / "t.cfg"
        p.write_text("epochs_total=four\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(p)

    def test_short_run_clamps_default_warmup(self):
        assert TrainerConfig.from_mapping({"epochs_total": "0"}).pretrain_epochs == 0
        assert TrainerConfig.from_mapping({"epochs_total": "1"}).pretrain_epochs == 1
        assert TrainerConfig.from_mapping({"epochs_total": "6"}).pretrain_epochs == cfg.DEFAULT_PRETRAIN_EPOCHS
        with pytest.raises(ConfigError, match="pretrain_epochs"):
            TrainerConfig.from_mapping({"epochs_total": "1", "pretrain_epochs": "2"})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "nope.cfg")

    @pytest.mark.parametrize("bad", [
        dict(alpha=0.0),
        dict(beta=-1.0),
        dict(epochs_total=2, pretrain_epochs=3),
        dict(samples_per_doc=0),
        dict(regime="dropout"),
    ])
    def test_validation(self, bad):
        with pytest.raises(ConfigError):
            TrainerConfig(**bad)


class TestTraining:
    def test_step_updates_params(self, small_train, small_cache, quick_conf):
        doc = small_train.documents[0]
        state = TrainState()
        state, br = policy_gradient_step(
            state, doc, small_cache[doc.id], quick_conf(), rng=np.random.default_rng(0)
        )
        assert state.step == 1
        assert state.params.is_finite()
        assert 0.0 <= br.reward_mean <= 1.0

    def test_missing_cache_record(self, small_train, small_dev, small_cache, quick_conf):
        partial = dict(list(small_cache.items())[1:])
        with pytest.raises(ValueError, match="no oracle cache record"):
            train(small_train, small_dev, partial, quick_conf())

    def test_deterministic(self, small_train, small_dev, small_cache, quick_conf):
        a = train(small_train, small_dev, small_cache, quick_conf(regime="kl"))
        b = train(small_train, small_dev, small_cache, quick_conf(regime="kl"))
        np.testing.assert_array_equal(a.params.weights, b.params.weights)
        assert a.params.bias == b.params.bias
        assert a.curve == b.curve

    def test_learns_something(self, small_train, small_dev, small_cache, quick_conf):
        state = train(small_train, small_dev, small_cache, quick_conf())
        assert state.step == 2 * len(small_train)
        assert [e for e, _ in state.curve] == [1, 2]
        assert not np.array_equal(state.params.as_vector(), ScorerParams.zeros().as_vector())

    def test_zero_beta_reduces_to_base(self, small_train, small_dev, small_cache, quick_conf):
        base = train(small_train, small_dev, small_cache, quick_conf(regime="base", beta=0.0))
        kl = train(small_train, small_dev, small_cache, quick_conf(regime="kl", beta=0.0))
        np.testing.assert_array_equal(base.params.as_vector(), kl.params.as_vector())

    def test_kl_changes_training(self, small_train, small_dev, small_cache, quick_conf):
        base = train(small_train, small_dev, small_cache, quick_conf(regime="base"))
        kl = train(small_train, small_dev, small_cache, quick_conf(regime="kl", beta=5.0))
        assert not np.array_equal(base.params.as_vector(), kl.params.as_vector())

    def test_schedule_tags(self, small_train, small_dev, small_cache, quick_conf):
        staged = train(small_train, small_dev, small_cache,
                       quick_conf(regime="pretrain_kl", epochs_total=4, pretrain_epochs=2))
        plain = train(small_train, small_dev, small_cache,
                      quick_conf(regime="kl", epochs_total=4, pretrain_epochs=2))
        assert staged.sources == ["shuffled", "shuffled", "original", "original"]
        assert plain.sources == ["original"] * 4
        assert len(staged.entropy) == 4

    def test_shuffled_view_remaps_target(self, small_train, small_cache):
        doc = small_train.documents[3]
        view, p_r = _presented(doc, small_cache[doc.id], 99, True)
        assert sorted(view.sentences) == sorted(doc.sentences)
        np.testing.assert_allclose(p_r, target_distribution(sentence_scores(view)))

    def test_empty_curve_is_header_only(self, tmp_path):
        path = tmp_path / "m.curve.csv"
        emit_curve(TrainState(), path)
        assert path.read_text(encoding="utf-8") == "epoch,avg_rouge\n"

    def test_zero_epochs(self, small_train, small_dev, small_cache, quick_conf):
        state = train(small_train, small_dev, small_cache, quick_conf(epochs_total=0))
        assert state.step == 0 and state.curve == []
