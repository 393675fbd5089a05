"""The 17 sentence-pair quality features: lengths, language model scores,
type/token ratio, translation-table counts, n-gram frequency quartiles,
corpus coverage, and punctuation counts. Features are raw here;
standardization belongs to the classifier pipeline."""

import string
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .ngram_lm import lm_logprob

# ASCII punctuation plus common CJK full-width marks
PUNCTUATION = set(string.punctuation) | set("。，、；：？！「」『』（）《》【】…—·")

NUM_FEATURES = 17

FEATURE_NAMES = [
    "f1_src_len",
    "f2_tgt_len",
    "f3_src_mean_token_chars",
    "f4_src_lm_logprob",
    "f5_tgt_lm_logprob",
    "f6_tgt_type_token_ratio",
    "f7_mean_translations_gt_0.2",
    "f8_weighted_translations_gt_0.01",
    "f9_src_unigram_q1",
    "f10_src_unigram_q4",
    "f11_src_bigram_q1",
    "f12_src_bigram_q4",
    "f13_src_trigram_q1",
    "f14_src_trigram_q4",
    "f15_src_unigram_coverage",
    "f16_src_punct",
    "f17_tgt_punct",
]


class FeatureError(ValueError):
    pass


def ngrams(tokens, n):
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


@dataclass
class QuartileEntry:
    q25: float
    q50: float
    q75: float
    known: set  # n-gram types observed in the corpus

    def quartile(self, freq):
        # ties go to the lower quartile
        if freq <= self.q25:
            return 1
        if freq <= self.q50:
            return 2
        if freq <= self.q75:
            return 3
        return 4


@dataclass
class QuartileTable:
    entries: dict  # n -> QuartileEntry
    freqs: dict  # n -> {ngram: count}


def quartile_table(corpus, orders=(1, 2, 3)):
    """Quartile thresholds over the type-frequency distribution per order."""
    entries = {}
    freqs = {}
    for n in orders:
        counts = Counter()
        for sent in corpus:
            counts.update(ngrams(sent, n))
        if not counts:
            raise FeatureError("corpus has no %d-grams" % n)
        values = np.array(sorted(counts.values()), dtype=float)
        q25, q50, q75 = np.percentile(values, [25, 50, 75])
        entries[n] = QuartileEntry(q25=q25, q50=q50, q75=q75, known=set(counts))
        freqs[n] = dict(counts)
    return QuartileTable(entries=entries, freqs=freqs)


@dataclass
class FeatureResources:
    src_lm: object
    tgt_lm: object
    quartiles: QuartileTable
    lex_table: object
    src_unigram_counts: Counter  # source-corpus token frequencies


def _quartile_fractions(tokens, table, n):
    entry = table.entries[n]
    freqs = table.freqs[n]
    grams = [g for g in ngrams(tokens, n) if g in entry.known]
    if not grams:
        return 0.0, 0.0
    q = [entry.quartile(freqs[g]) for g in grams]
    return q.count(1) / len(q), q.count(4) / len(q)


def _translation_counts(tokens, lex_table, threshold):
    return [
        sum(1 for p in lex_table.t.get(w, {}).values() if p > threshold) for w in tokens
    ]


def extract_features17(record, resources):
    """Compute the 17-dimensional feature vector for one translation record."""
    src = record.source
    tgt = record.mt
    f = np.zeros(NUM_FEATURES)
    f[0] = len(src)
    f[1] = len(tgt)
    f[2] = sum(len(t) for t in src) / len(src) if src else 0.0
    f[3] = lm_logprob(resources.src_lm, src)
    f[4] = lm_logprob(resources.tgt_lm, tgt)
    f[5] = len(set(tgt)) / len(tgt) if tgt else 0.0

    counts_02 = _translation_counts(src, resources.lex_table, 0.2)
    f[6] = sum(counts_02) / len(src) if src else 0.0
    counts_001 = _translation_counts(src, resources.lex_table, 0.01)
    # inverse-frequency weighted mean; words unseen in the corpus weigh as freq 1
    weights = [1.0 / max(resources.src_unigram_counts.get(w, 0), 1) for w in src]
    wsum = sum(weights)
    f[7] = sum(w * c for w, c in zip(weights, counts_001)) / wsum if wsum else 0.0

    f[8], f[9] = _quartile_fractions(src, resources.quartiles, 1)
    f[10], f[11] = _quartile_fractions(src, resources.quartiles, 2)
    f[12], f[13] = _quartile_fractions(src, resources.quartiles, 3)

    f[14] = (
        sum(1 for w in src if w in resources.src_unigram_counts) / len(src)
        if src
        else 0.0
    )
    f[15] = sum(1 for t in src if t in PUNCTUATION)
    f[16] = sum(1 for t in tgt if t in PUNCTUATION)
    return f


def extract_batch(records, resources):
    return np.array([extract_features17(r, resources) for r in records])


def save_features(X, labels, path):
    """TSV with a header row naming f1..f17 plus the label column."""
    with open(path, "w", encoding="utf-8") as f:
        f.write("\t".join(FEATURE_NAMES + ["label"]) + "\n")
        for row, y in zip(X, labels):
            f.write("\t".join(repr(float(v)) for v in row) + "\t%d\n" % y)


def load_features(path):
    X = []
    labels = []
    with open(path, encoding="utf-8") as f:
        header = f.readline().rstrip("\n").split("\t")
        if header[:NUM_FEATURES] != FEATURE_NAMES:
            raise FeatureError("unexpected feature file header in %s" % path)
        for line in f:
            parts = line.rstrip("\n").split("\t")
            if len(parts) != NUM_FEATURES + 1:
                continue
            X.append([float(v) for v in parts[:NUM_FEATURES]])
            labels.append(int(parts[NUM_FEATURES]))
    return np.array(X), np.array(labels)
