import math
import random

import pytest

from acceptkit import ngram_lm as lm_mod
from acceptkit.ngram_lm import BOS, EOS, LM_UNK


def test_empty_corpus_rejected():
    with pytest.raises(lm_mod.LmError):
        lm_mod.lm_train([])


def test_single_sentence_normalization():
    lm = lm_mod.lm_train([["a", "a"]])
    p = lm.prob_bigram("a", BOS)
    assert 0.0 < p < 1.0
    total = sum(lm.prob_bigram(w, BOS) for w in lm.vocab)
    assert abs(total - 1.0) < 1e-9


def test_seen_bigram_beats_unk():
    lm = lm_mod.lm_train([["a", "b"], ["a", "b"]])
    # hand evaluation with D=0.75: P(b|a) = (2-.75)/2 + .75*(1/2)*P1(b)
    # unigrams a:2 b:2 </s>:2, V=4 -> P1(b)=3/10; P(b|a)=0.7375
    assert lm.prob_bigram("b", "a") == pytest.approx(0.7375)
    assert lm.prob_bigram("b", "a") > lm.prob_bigram(LM_UNK, "a")


def test_unseen_context_backs_off():
    lm = lm_mod.lm_train([["a", "b"]])
    p = lm.prob_trigram("a", "z", "z")
    assert p == pytest.approx(lm.prob_unigram("a"))
    assert 0.0 < p < 1.0


def test_logprob_hand_computed():
    # corpus ["a"]: both trigram factors evaluate to 0.25 + 0.75*0.55
    lm = lm_mod.lm_train([["a"]])
    expected = 2 * math.log(0.25 + 0.75 * (0.25 + 0.75 * 0.4))
    assert lm_mod.lm_logprob(lm, ["a"]) == pytest.approx(expected)


def test_logprob_empty_sentence():
    lm = lm_mod.lm_train([["a"]])
    assert lm_mod.lm_logprob(lm, []) == pytest.approx(
        math.log(lm.prob_trigram(EOS, BOS, BOS))
    )


def test_logprob_nonpositive_and_finite():
    lm = lm_mod.lm_train([["a", "b", "c"], ["b", "c"]])
    for sent in (["a"], ["z", "q"], ["a", "b", "c", "d"], []):
        lp = lm_mod.lm_logprob(lm, sent)
        assert lp <= 0.0
        assert math.isfinite(lp)


def test_conditional_distributions_sum_to_one():
    rng = random.Random(23)
    corpus = [
        [rng.choice("abcde") for _ in range(rng.randint(1, 8))] for _ in range(200)
    ]
    lm = lm_mod.lm_train(corpus)
    contexts = [
        (rng.choice(["a", "b", "c", "z", BOS]), rng.choice(["a", "d", "e", "q", BOS]))
        for _ in range(100)
    ]
    for u, v in contexts:
        total = sum(lm.prob_trigram(w, u, v) for w in lm.vocab)
        assert abs(total - 1.0) < 1e-6


def test_save_load_roundtrip(tmp_path):
    lm = lm_mod.lm_train([["a", "b"], ["a", "c", "b"]])
    path = tmp_path / "lm.txt"
    lm_mod.save_lm(lm, path)
    loaded = lm_mod.load_lm(path)
    for sent in (["a", "b"], ["c"], []):
        assert lm_mod.lm_logprob(loaded, sent) == pytest.approx(
            lm_mod.lm_logprob(lm, sent)
        )
