"""Order-3 language model with interpolated Kneser-Ney smoothing.

Fixed discount D = 0.75 at orders 2 and 3; unigrams are add-one smoothed over
the observed vocabulary plus <unk>. Sentences are padded with <s> / </s>;
out-of-vocabulary tokens are scored as <unk>.
"""

import math
from collections import Counter
from dataclasses import dataclass, field

BOS = "<s>"
EOS = "</s>"
LM_UNK = "<unk>"

DISCOUNT = 0.75


class LmError(ValueError):
    pass


@dataclass
class NgramLm:
    order: int
    unigrams: Counter  # token -> count (includes </s>)
    bigrams: dict  # context token -> Counter(next token)
    trigrams: dict  # (u, v) -> Counter(next token)
    vocab: set  # predicted types: observed tokens + </s> + <unk>
    total_unigrams: int = 0
    discount: float = DISCOUNT
    _bi_totals: dict = field(default_factory=dict, repr=False)
    _tri_totals: dict = field(default_factory=dict, repr=False)

    def _map(self, token):
        return token if token in self.vocab or token == BOS else LM_UNK

    def prob_unigram(self, w):
        w = self._map(w)
        return (self.unigrams.get(w, 0) + 1) / (self.total_unigrams + len(self.vocab))

    def prob_bigram(self, w, u):
        w, u = self._map(w), self._map(u)
        ctx = self.bigrams.get(u)
        if not ctx:
            return self.prob_unigram(w)
        total, distinct = self._bi_totals[u]
        lam = self.discount * distinct / total
        return max(ctx.get(w, 0) - self.discount, 0.0) / total + lam * self.prob_unigram(w)

    def prob_trigram(self, w, u, v):
        w, u, v = self._map(w), self._map(u), self._map(v)
        ctx = self.trigrams.get((u, v))
        if not ctx:
            return self.prob_bigram(w, v)
        total, distinct = self._tri_totals[(u, v)]
        lam = self.discount * distinct / total
        return max(ctx.get(w, 0) - self.discount, 0.0) / total + lam * self.prob_bigram(w, v)

    def prob(self, w, context):
        """P(w | context), using as much of the last two context tokens as exist."""
        if len(context) >= 2:
            return self.prob_trigram(w, context[-2], context[-1])
        if len(context) == 1:
            return self.prob_bigram(w, context[-1])
        return self.prob_unigram(w)


def lm_train(corpus, order=3):
    """Train the smoothed model on tokenized sentences."""
    if order != 3:
        raise LmError("only order 3 is supported")
    sents = [list(s) for s in corpus if s]
    if not sents:
        raise LmError("empty corpus for language model")
    unigrams = Counter()
    bigrams = {}
    trigrams = {}
    for sent in sents:
        padded = [BOS, BOS] + sent + [EOS]
        for tok in sent:
            unigrams[tok] += 1
        unigrams[EOS] += 1
        for i in range(2, len(padded)):
            u, v, w = padded[i - 2], padded[i - 1], padded[i]
            bigrams.setdefault(v, Counter())[w] += 1
            trigrams.setdefault((u, v), Counter())[w] += 1
    vocab = set(unigrams) | {EOS, LM_UNK}
    lm = NgramLm(
        order=3,
        unigrams=unigrams,
        bigrams=bigrams,
        trigrams=trigrams,
        vocab=vocab,
        total_unigrams=sum(unigrams.values()),
    )
    lm._bi_totals = {u: (sum(c.values()), len(c)) for u, c in bigrams.items()}
    lm._tri_totals = {k: (sum(c.values()), len(c)) for k, c in trigrams.items()}
    return lm


def lm_logprob(lm, tokens):
    """Natural-log probability of a sentence including the </s> transition."""
    seq = [BOS, BOS] + list(tokens) + [EOS]
    logp = 0.0
    for i in range(2, len(seq)):
        logp += math.log(lm.prob_trigram(seq[i], seq[i - 2], seq[i - 1]))
    return logp


def save_lm(lm, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write("#ngramlm v1 order=3 discount=%r\n" % lm.discount)
        f.write("#unigrams %d\n" % len(lm.unigrams))
        for tok, c in sorted(lm.unigrams.items()):
            f.write("%s\t%d\n" % (tok, c))
        f.write("#bigrams\n")
        for u, ctx in sorted(lm.bigrams.items()):
            for w, c in sorted(ctx.items()):
                f.write("%s\t%s\t%d\n" % (u, w, c))
        f.write("#trigrams\n")
        for (u, v), ctx in sorted(lm.trigrams.items()):
            for w, c in sorted(ctx.items()):
                f.write("%s\t%s\t%s\t%d\n" % (u, v, w, c))


def load_lm(path):
    with open(path, encoding="utf-8") as f:
        header = f.readline().split()
        if not header or header[0] != "#ngramlm" or header[1] != "v1":
            raise LmError("bad LM header in %s" % path)
        discount = float(header[3].split("=")[1])
        section = None
        unigrams = Counter()
        bigrams = {}
        trigrams = {}
        for line in f:
            line = line.rstrip("\n")
            if line.startswith("#unigrams"):
                section = "uni"
            elif line.startswith("#bigrams"):
                section = "bi"
            elif line.startswith("#trigrams"):
                section = "tri"
            elif line:
                parts = line.split("\t")
                if section == "uni":
                    unigrams[parts[0]] = int(parts[1])
                elif section == "bi":
                    bigrams.setdefault(parts[0], Counter())[parts[1]] = int(parts[2])
                elif section == "tri":
                    trigrams.setdefault((parts[0], parts[1]), Counter())[parts[2]] = int(
                        parts[3]
                    )
    vocab = set(unigrams) | {EOS, LM_UNK}
    lm = NgramLm(
        order=3,
        unigrams=unigrams,
        bigrams=bigrams,
        trigrams=trigrams,
        vocab=vocab,
        total_unigrams=sum(unigrams.values()),
        discount=discount,
    )
    lm._bi_totals = {u: (sum(c.values()), len(c)) for u, c in bigrams.items()}
    lm._tri_totals = {k: (sum(c.values()), len(c)) for k, c in trigrams.items()}
    return lm
