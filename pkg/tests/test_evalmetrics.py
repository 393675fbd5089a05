import numpy as np
import pytest

from acceptkit import evalmetrics as em
from acceptkit.annotate import LabeledInstance
from acceptkit.downstream import Lexicon, make_task

# Published confusion matrices for the accept-everything baseline on three
# downstream tasks, with the accuracies reported alongside them.
REPORTED_BASELINES = [
    ("subjectivity", em.ConfusionMatrix(tp=5676, fp=1504, tn=1917, fn=903), 0.7593),
    ("sentiment", em.ConfusionMatrix(tp=6764, fp=1005, tn=1565, fn=666), 0.8329),
    ("ner", em.ConfusionMatrix(tp=6345, fp=469, tn=2841, fn=345), 0.9186),
]


def test_confusion_counts():
    cm = em.confusion([1, 1, 0, 0, 1], [1, 0, 0, 1, 1])
    assert (cm.tp, cm.fp, cm.tn, cm.fn) == (2, 1, 1, 1)
    assert cm.total == 5


def test_confusion_input_checks():
    with pytest.raises(em.EvalError):
        em.confusion([1], [1, 0])
    with pytest.raises(em.EvalError):
        em.confusion([], [])


def test_accuracy_simple():
    assert em.accuracy(em.ConfusionMatrix(tp=3, fp=1, tn=4, fn=2)) == pytest.approx(0.7)


def test_f_score_simple():
    cm = em.ConfusionMatrix(tp=2, fp=1, tn=0, fn=1)
    assert em.f_score(cm) == pytest.approx(2 * 2 / (2 * 2 + 1 + 1))
    assert em.f_score(em.ConfusionMatrix(tn=5)) == 0.0


def test_baseline_accept_all():
    cm = em.baseline_accept_all([1, 0, 1, 1])
    assert (cm.tp, cm.fp, cm.tn, cm.fn) == (3, 1, 0, 0)


@pytest.mark.parametrize("name,cm,reported", REPORTED_BASELINES)
def test_reported_baseline_accuracies(name, cm, reported):
    assert em.accuracy(cm) == pytest.approx(reported, abs=5e-5)


def test_cross_lingual_accuracy_trivial_points():
    assert em.cross_lingual_accuracy(1.0, 1.0) == 1.0
    assert em.cross_lingual_accuracy(1.0, 0.0) == 0.0
    assert em.cross_lingual_accuracy(0.0, 0.0) == 1.0
    assert em.cross_lingual_accuracy(0.5, 0.3) == pytest.approx(0.5)
    assert em.cross_lingual_accuracy(0.9, 0.8) == pytest.approx(0.74)


def test_cross_lingual_accuracy_symmetry():
    rng = np.random.default_rng(0)
    for p_t, p_d in rng.random((50, 2)):
        assert em.cross_lingual_accuracy(p_t, p_d) == pytest.approx(
            em.cross_lingual_accuracy(p_d, p_t)
        )


def test_cross_lingual_accuracy_range_check():
    with pytest.raises(em.EvalError):
        em.cross_lingual_accuracy(1.2, 0.5)
    with pytest.raises(em.EvalError):
        em.cross_lingual_accuracy(0.5, -0.1)


def test_accuracy_gain_is_slope():
    # finite differences of the pipeline accuracy reproduce the gain formula
    for p_t in (0.0, 0.3, 0.5, 0.9, 1.0):
        for p_d, dd in ((0.4, 0.05), (0.7, -0.1)):
            direct = em.cross_lingual_accuracy(p_t, p_d + dd) - em.cross_lingual_accuracy(p_t, p_d)
            assert em.accuracy_gain(p_t, dd) == pytest.approx(direct)
    assert em.accuracy_gain(0.5, 0.3) == 0.0
    assert em.accuracy_gain(1.0, 0.2) == pytest.approx(0.2)
    assert em.accuracy_gain(0.0, 0.2) == pytest.approx(-0.2)


def test_gain_monotone_in_detector_when_task_above_half():
    grid = np.linspace(0.0, 1.0, 11)
    for p_t in grid:
        vals = [em.cross_lingual_accuracy(p_t, p_d) for p_d in grid]
        diffs = np.diff(vals)
        if p_t > 0.5:
            assert np.all(diffs > 0)
        elif p_t < 0.5:
            assert np.all(diffs < 0)
        else:
            assert np.allclose(diffs, 0.0)


SUBJ = Lexicon(entries={"great": 1.0, "awful": -1.0}, kind="subjectivity")


def _inst(mt, ref):
    return LabeledInstance(ref, mt, [], [], 0, reference_text=ref)


def _fixture():
    task = make_task("subjectivity", lexicon=SUBJ)
    instances = [
        _inst(["great", "movie"], ["great", "movie"]),   # preserved subjective
        _inst(["a", "movie"], ["awful", "movie"]),       # lost the cue word
        _inst(["plain", "text"], ["plain", "text"]),     # preserved objective
        _inst(["great", "text"], ["plain", "text"]),     # spurious cue word
    ]
    gold_accept = [1, 0, 1, 0]
    return task, instances, gold_accept


def test_simulate_perfect_detector():
    task, instances, gold = _fixture()
    report, review = em.simulate_pipeline(gold, instances, task)
    assert report["baseline_accuracy"] == pytest.approx(0.5)
    assert report["flip_accuracy"] == 1.0
    assert report["detector_accuracy"] == 1.0
    assert report["downstream_accuracy"] == 1.0
    assert report["predicted_final_accuracy"] == 1.0
    assert len(review) == 2


def test_simulate_accept_all_matches_baseline():
    task, instances, _ = _fixture()
    report, review = em.simulate_pipeline([1, 1, 1, 1], instances, task)
    assert report["flip_accuracy"] == report["baseline_accuracy"]
    assert review == []
    assert report["baseline_confusion"] == report["detector_confusion"]


def test_simulate_flip_beats_baseline_when_tn_exceeds_fn():
    task, instances, gold = _fixture()
    # reject one genuinely bad instance, keep everything else
    det = [1, 0, 1, 1]
    report, _ = em.simulate_pipeline(det, instances, task)
    assert report["detector_confusion"]["tn"] > report["detector_confusion"]["fn"]
    assert report["flip_accuracy"] > report["baseline_accuracy"]


def test_simulate_prediction_formula_exact_when_gold_is_reference():
    task, instances, _ = _fixture()
    det = [1, 0, 0, 1]
    report, _ = em.simulate_pipeline(det, instances, task)
    # with reference outputs as gold, flipping tracks the formula exactly
    assert report["flip_accuracy"] == pytest.approx(report["predicted_final_accuracy"])


def test_simulate_with_external_gold_labels():
    task, instances, _ = _fixture()
    gold_labels = ["subjective", "subjective", "objective", "objective"]
    report, _ = em.simulate_pipeline([1, 1, 1, 1], instances, task, gold_labels=gold_labels)
    assert report["downstream_accuracy"] == 1.0
    assert report["baseline_accuracy"] == pytest.approx(0.5)


def test_simulate_rejects_nonbinary_task():
    sent = Lexicon(entries={"good": 1.0, "bad": -1.0}, kind="sentiment")
    task = make_task("sentiment", lexicon=sent)
    instances = [
        _inst(["good"], ["good"]),
        _inst(["bad"], ["bad"]),
        _inst(["so"], ["so"]),
    ]
    with pytest.raises(em.EvalError):
        em.simulate_pipeline([1, 1, 1], instances, task)


def test_simulate_length_mismatch():
    task, instances, _ = _fixture()
    with pytest.raises(em.EvalError):
        em.simulate_pipeline([1], instances, task)
