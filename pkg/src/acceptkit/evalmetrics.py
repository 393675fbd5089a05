"""Detection metrics, the accept-all baseline, the cross-lingual accuracy
calculus for binary downstream tasks, and the flip-handler simulation."""

from dataclasses import dataclass, asdict

from .downstream import compare_outputs


class EvalError(ValueError):
    pass


@dataclass
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


def confusion(predictions, golds):
    """Counts with the acceptable class (1) as positive."""
    if len(predictions) != len(golds):
        raise EvalError("prediction/gold length mismatch")
    if len(golds) == 0:
        raise EvalError("empty inputs")
    cm = ConfusionMatrix()
    for p, g in zip(predictions, golds):
        if g == 1:
            if p == 1:
                cm.tp += 1
            else:
                cm.fn += 1
        else:
            if p == 1:
                cm.fp += 1
            else:
                cm.tn += 1
    return cm


def accuracy(cm):
    if cm.total < 1:
        raise EvalError("confusion matrix is empty")
    return (cm.tp + cm.tn) / cm.total


def f_score(cm):
    """Reported for information only; accuracy is the headline metric."""
    denom = 2 * cm.tp + cm.fp + cm.fn
    return 2 * cm.tp / denom if denom else 0.0


def baseline_accept_all(golds):
    """Confusion matrix of the predictor that accepts every translation."""
    return confusion([1] * len(golds), golds)


def cross_lingual_accuracy(p_t, p_d):
    """Expected end-to-end accuracy of the flip pipeline for a binary task."""
    if not (0.0 <= p_t <= 1.0 and 0.0 <= p_d <= 1.0):
        raise EvalError("probabilities must lie in [0, 1]")
    return p_t * p_d + (1.0 - p_t) * (1.0 - p_d)


def accuracy_gain(p_t, delta_p_d):
    """Marginal pipeline gain from a detector accuracy gain."""
    if not 0.0 <= p_t <= 1.0:
        raise EvalError("p_t must lie in [0, 1]")
    return (2.0 * p_t - 1.0) * delta_p_d


def simulate_pipeline(detector_labels, instances, task, gold_labels=None):
    """Compare the untouched pipeline against the flip-handler strategy.

    `detector_labels[i]` is the detector's acceptability call for
    `instances[i]` (which must carry mt and reference text). `task` must
    produce at most two distinct labels across the data. The final label is
    the task output on the MT sentence, flipped to the opposite label when
    the detector rejects. Correctness is judged against `gold_labels` (task
    label names) when given, otherwise against the task output on the
    reference (in which case the downstream system is correct by
    construction). Returns (report, review) where review lists the
    detected-unacceptable instances.
    """
    if len(detector_labels) != len(instances):
        raise EvalError("detector label count mismatch")
    label_values = set()
    base_correct = 0
    flip_correct = 0
    task_correct_on_ref = 0
    gold_accept = []
    review = []
    for i, (det, inst) in enumerate(zip(detector_labels, instances)):
        out_mt = task(inst.mt_text)
        out_ref = task(inst.reference_text)
        label_values.add(out_mt.name)
        label_values.add(out_ref.name)
        if len(label_values) > 2:
            raise EvalError("flip simulation requires a binary downstream task")
        gold = gold_labels[i] if gold_labels is not None else out_ref.name
        accept = compare_outputs(out_mt, out_ref)
        gold_accept.append(1 if accept else 0)
        if out_ref.name == gold:
            task_correct_on_ref += 1
        mt_correct = out_mt.name == gold
        if mt_correct:
            base_correct += 1
        if det == 1:
            flip_correct += 1 if mt_correct else 0
        else:
            # flipping the binary label: correct iff the MT label was wrong
            flip_correct += 0 if mt_correct else 1
            review.append(inst)
    n = len(instances)
    cm = confusion(detector_labels, gold_accept)
    p_t = task_correct_on_ref / n
    p_d = accuracy(cm)
    report = {
        "n": n,
        "baseline_accuracy": base_correct / n,
        "flip_accuracy": flip_correct / n,
        "detector_accuracy": p_d,
        "downstream_accuracy": p_t,
        "detector_confusion": asdict(cm),
        "predicted_final_accuracy": cross_lingual_accuracy(p_t, p_d),
        "baseline_confusion": asdict(baseline_accept_all(gold_accept)),
    }
    return report, review
