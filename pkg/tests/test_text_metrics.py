from collections import Counter
from functools import lru_cache

import numpy as np
import pytest

from leadbias.core.text_metrics import (
    avg_rouge,
    lcs_length,
    ngram_matches,
    raw_tokens,
    rouge_l,
    rouge_n,
    rouge_scores,
    tokenize,
)

CAND = "the cat sat on the mat"
REF = "the cat on the mat"


def _brute_matches(a, b, n):
    ca = Counter(tuple(a[i:i + n]) for i in range(len(a) - n + 1))
    cb = Counter(tuple(b[i:i + n]) for i in range(len(b) - n + 1))
    return sum((ca & cb).values())


def _brute_lcs(a, b):
    @lru_cache(maxsize=None)
    def rec(i, j):
        if i == len(a) or j == len(b):
            return 0
        if a[i] == b[j]:
            return 1 + rec(i + 1, j + 1)
        return max(rec(i + 1, j), rec(i, j + 1))
    return rec(0, 0)


class TestTokenize:
    def test_lowercases_and_splits_on_punctuation(self):
        assert tokenize("The Cat, sat-on_the MAT!") == ("the", "cat", "sat", "on", "the", "mat")

    def test_empty(self):
        assert tokenize("") == ()
        assert tokenize(" ,. ") == ()

    def test_raw_tokens_keep_case(self):
        assert raw_tokens("Hello, World") == ("Hello", "World")


class TestHandComputed:
    def test_rouge1(self):
        s = rouge_n(tokenize(CAND), tokenize(REF), 1)
        assert s.precision == pytest.approx(5 / 6, abs=1e-12)
        assert s.recall == pytest.approx(1.0, abs=1e-12)
        assert s.f1 == pytest.approx(10 / 11, abs=1e-12)

    def test_rouge2(self):
        s = rouge_n(tokenize(CAND), tokenize(REF), 2)
        assert s.precision == pytest.approx(3 / 5, abs=1e-12)
        assert s.recall == pytest.approx(3 / 4, abs=1e-12)
        assert s.f1 == pytest.approx(2 / 3, abs=1e-12)

    def test_rouge_l(self):
        assert rouge_l(tokenize(CAND), tokenize(REF)).f1 == pytest.approx(10 / 11, abs=1e-12)

    def test_avg(self):
        assert avg_rouge([CAND], [REF]) == pytest.approx((10 / 11 + 2 / 3 + 10 / 11) / 3, abs=1e-12)
        assert avg_rouge([CAND], [REF]) == pytest.approx(0.8283, abs=1e-4)

    def test_lcs_order_matters(self):
        assert lcs_length(("a", "b"), ("b", "a")) == 1

    def test_sentence_lists_are_joined(self):
        r1, r2, rl = rouge_scores(["the cat sat", "on the mat"], [REF])
        assert r1.f1 == pytest.approx(10 / 11)
        assert r2.f1 == pytest.approx(2 / 3)
        assert rl.f1 == pytest.approx(10 / 11)


class TestEdgeCases:
    def test_empty_sides_score_zero(self):
        assert rouge_n((), ("a",), 1).f1 == 0.0
        assert rouge_n(("a",), (), 1).f1 == 0.0
        assert rouge_l((), ("a",)).f1 == 0.0
        assert avg_rouge([], [REF]) == 0.0

    def test_shorter_than_n(self):
        assert rouge_n(("a",), ("a", "b"), 2).f1 == 0.0

    def test_invalid_n(self):
        with pytest.raises(ValueError):
            rouge_n(("a",), ("a",), 0)

    def test_identical_is_one(self):
        t = tokenize("a quick brown fox")
        assert rouge_n(t, t, 1).f1 == 1.0
        assert rouge_n(t, t, 2).f1 == 1.0
        assert rouge_l(t, t).f1 == 1.0

    def test_clipping(self):
        assert ngram_matches(("a", "a", "a"), ("a",), 1) == 1


class TestAgainstBruteForce:
    def test_random_pairs(self):
        rng = np.random.default_rng(0)
        vocab = ["a", "b", "c", "d", "e"]
        for _ in range(200):
            a = tuple(vocab[i] for i in rng.integers(5, size=int(rng.integers(0, 21))))
            b = tuple(vocab[i] for i in rng.integers(5, size=int(rng.integers(0, 21))))
            for n in (1, 2):
                assert ngram_matches(a, b, n) == _brute_matches(a, b, n)
            assert lcs_length(a, b) == _brute_lcs(a, b)
