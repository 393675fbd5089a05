"""IBM Model 1 lexical translation probabilities, estimated with EM.

A NULL source token is prepended to every source sentence; initialization is
uniform over co-occurring word pairs. The per-iteration corpus log-likelihood
(up to the constant length normalization) is recorded and checked to be
non-decreasing, which plain EM guarantees.
"""

import math
from collections import defaultdict
from dataclasses import dataclass, field

NULL = "<null>"


class Ibm1Error(ValueError):
    pass


@dataclass
class LexTable:
    t: dict  # source word -> {target word: probability}
    log_likelihoods: list = field(default_factory=list)

    def prob(self, target_word, source_word):
        return self.t.get(source_word, {}).get(target_word, 0.0)


def _log_likelihood(t, pairs):
    ll = 0.0
    for src, tgt in pairs:
        for tw in tgt:
            s = sum(t[sw].get(tw, 0.0) for sw in src) / len(src)
            ll += math.log(s) if s > 0 else float("-inf")
    return ll


def ibm1_train(pairs, iterations):
    """EM estimation of t(target | source) from tokenized sentence pairs."""
    if iterations < 1:
        raise Ibm1Error("iterations must be >= 1")
    bitext = [([NULL] + list(p.source), list(p.reference)) for p in pairs]
    if not bitext:
        raise Ibm1Error("empty corpus for IBM Model 1")

    cooc = defaultdict(set)
    for src, tgt in bitext:
        for sw in src:
            cooc[sw].update(tgt)
    t = {sw: {tw: 1.0 / len(tws) for tw in tws} for sw, tws in cooc.items()}

    lls = [_log_likelihood(t, bitext)]
    for _ in range(iterations):
        count = defaultdict(lambda: defaultdict(float))
        total = defaultdict(float)
        for src, tgt in bitext:
            for tw in tgt:
                denom = sum(t[sw].get(tw, 0.0) for sw in src)
                if denom <= 0:
                    continue
                for sw in src:
                    delta = t[sw].get(tw, 0.0) / denom
                    if delta > 0:
                        count[sw][tw] += delta
                        total[sw] += delta
        for sw, row in count.items():
            z = total[sw]
            t[sw] = {tw: c / z for tw, c in row.items()}
        ll = _log_likelihood(t, bitext)
        if ll < lls[-1] - 1e-9:
            raise Ibm1Error("EM log-likelihood decreased: %r -> %r" % (lls[-1], ll))
        lls.append(ll)
    return LexTable(t=t, log_likelihoods=lls)


def save_lex_table(table, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write("#lextable v1\n")
        for sw in sorted(table.t):
            for tw, p in sorted(table.t[sw].items()):
                f.write("%s\t%s\t%r\n" % (sw, tw, p))


def load_lex_table(path):
    t = {}
    with open(path, encoding="utf-8") as f:
        header = f.readline().strip()
        if header != "#lextable v1":
            raise Ibm1Error("bad lexical table header in %s" % path)
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            sw, tw, p = line.split("\t")
            t.setdefault(sw, {})[tw] = float(p)
    return LexTable(t=t)
