"""Corpus ingestion, tokenization, BPE subword segmentation, and vocabularies."""

import re
from collections import Counter
from dataclasses import dataclass, field

EOW = "</w>"  # end-of-word marker appended to the final character of a token
PAD = "<pad>"
UNK = "<unk>"
PAD_ID = 0
UNK_ID = 1

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


class CorpusError(ValueError):
    pass


@dataclass
class SentencePair:
    source: list
    reference: list


def tokenize(text):
    """Whitespace tokenization with punctuation split off as separate tokens."""
    return _TOKEN_RE.findall(text)


def load_parallel(path):
    """Load a TSV parallel corpus, one "source<TAB>reference" pair per line.

    The target side is lowercased. Raises CorpusError with a line number on
    malformed lines and on an empty corpus.
    """
    pairs = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if line.count("\t") != 1:
                raise CorpusError(
                    "line %d: expected exactly one tab separator" % lineno
                )
            src, ref = line.split("\t")
            src_toks = tokenize(src)
            ref_toks = tokenize(ref.lower())
            if not src_toks or not ref_toks:
                raise CorpusError("line %d: empty side after tokenization" % lineno)
            pairs.append(SentencePair(src_toks, ref_toks))
    if not pairs:
        raise CorpusError("empty corpus: %s" % path)
    return pairs


def _word_symbols(token):
    chars = list(token)
    chars[-1] = chars[-1] + EOW
    return tuple(chars)


@dataclass
class BpeModel:
    merges: list  # ordered (left, right) pairs
    num_merges: int
    _cache: dict = field(default_factory=dict, repr=False)

    def rank(self):
        return {pair: i for i, pair in enumerate(self.merges)}


def bpe_learn(corpus, num_merges):
    """Learn a BPE merge list from token sequences.

    Greedy: at each step merge the most frequent adjacent symbol pair within
    words (ties broken lexicographically); stops early once no pair occurs at
    least twice.
    """
    if num_merges < 0:
        raise ValueError("num_merges must be >= 0")
    word_freq = Counter()
    for sent in corpus:
        for tok in sent:
            word_freq[_word_symbols(tok)] += 1
    if not word_freq:
        raise CorpusError("empty corpus for BPE learning")

    merges = []
    words = dict(word_freq)
    for _ in range(num_merges):
        pair_freq = Counter()
        for word, freq in words.items():
            for a, b in zip(word, word[1:]):
                pair_freq[(a, b)] += freq
        if not pair_freq:
            break
        best = min(pair_freq.items(), key=lambda kv: (-kv[1], kv[0]))
        if best[1] < 2:
            break
        pair = best[0]
        merges.append(pair)
        merged = pair[0] + pair[1]
        new_words = {}
        for word, freq in words.items():
            out = []
            i = 0
            while i < len(word):
                if i + 1 < len(word) and (word[i], word[i + 1]) == pair:
                    out.append(merged)
                    i += 2
                else:
                    out.append(word[i])
                    i += 1
            new_words[tuple(out)] = new_words.get(tuple(out), 0) + freq
        words = new_words
    return BpeModel(merges=merges, num_merges=num_merges)


def _apply_to_token(model, ranks, token):
    cached = model._cache.get(token)
    if cached is not None:
        return cached
    word = list(_word_symbols(token))
    while len(word) > 1:
        best_rank = None
        best_i = -1
        for i in range(len(word) - 1):
            r = ranks.get((word[i], word[i + 1]))
            if r is not None and (best_rank is None or r < best_rank):
                best_rank = r
                best_i = i
        if best_rank is None:
            break
        word[best_i : best_i + 2] = [word[best_i] + word[best_i + 1]]
    result = list(word)
    model._cache[token] = result
    return result


def bpe_apply(model, tokens):
    """Segment tokens into subwords by replaying merges in learned order."""
    ranks = model.rank()
    out = []
    for tok in tokens:
        out.extend(_apply_to_token(model, ranks, tok))
    return out


def bpe_desegment(subwords):
    """Invert bpe_apply: join subwords back into whitespace tokens."""
    tokens = []
    current = []
    for sw in subwords:
        if sw.endswith(EOW):
            current.append(sw[: -len(EOW)])
            tokens.append("".join(current))
            current = []
        else:
            current.append(sw)
    if current:
        tokens.append("".join(current))
    return tokens


def save_bpe(model, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write("#bpe v1 %d\n" % model.num_merges)
        for a, b in model.merges:
            f.write("%s %s\n" % (a, b))


def load_bpe(path):
    with open(path, encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 3 or header[0] != "#bpe" or header[1] != "v1":
            raise CorpusError("bad BPE model header in %s" % path)
        num_merges = int(header[2])
        merges = []
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            a, b = line.split(" ", 1)
            merges.append((a, b))
    return BpeModel(merges=merges, num_merges=num_merges)


@dataclass
class Vocab:
    id_of: dict
    token_of: dict

    def __len__(self):
        return len(self.id_of)

    def encode(self, subwords):
        return [self.id_of.get(sw, UNK_ID) for sw in subwords]

    def decode(self, ids):
        return [self.token_of[i] for i in ids]


def build_vocab(corpus, max_size):
    """Top max_size subwords by frequency (ties lexicographic) after PAD, UNK."""
    if max_size < 1:
        raise ValueError("max_size must be >= 1")
    freq = Counter()
    for sent in corpus:
        freq.update(sent)
    if not freq:
        raise CorpusError("empty corpus for vocabulary")
    ordered = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))[:max_size]
    id_of = {PAD: PAD_ID, UNK: UNK_ID}
    for sw, _ in ordered:
        id_of[sw] = len(id_of)
    token_of = {i: sw for sw, i in id_of.items()}
    return Vocab(id_of=id_of, token_of=token_of)


def save_vocab(vocab, path):
    with open(path, "w", encoding="utf-8") as f:
        for i in range(2, len(vocab.id_of)):
            f.write(vocab.token_of[i] + "\n")


def load_vocab(path):
    id_of = {PAD: PAD_ID, UNK: UNK_ID}
    with open(path, encoding="utf-8") as f:
        for line in f:
            sw = line.rstrip("\n")
            if sw:
                id_of[sw] = len(id_of)
    token_of = {i: sw for sw, i in id_of.items()}
    return Vocab(id_of=id_of, token_of=token_of)
