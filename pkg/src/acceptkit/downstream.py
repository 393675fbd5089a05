"""Executable downstream task systems and the output comparison that defines
acceptability: a translation is acceptable iff the downstream system produces
the same output on it as on the reference."""

import subprocess
from collections import Counter
from dataclasses import dataclass

ENTITY_TYPES = ("PER", "LOC", "ORG")


class TaskError(ValueError):
    pass


@dataclass(frozen=True)
class CategoricalLabel:
    name: str


@dataclass(frozen=True)
class EntityMultiset:
    entries: tuple  # sorted ((entity_type, surface), ...) with repeats

    @staticmethod
    def from_pairs(pairs):
        return EntityMultiset(entries=tuple(sorted(pairs)))

    def counter(self):
        return Counter(self.entries)


@dataclass
class Lexicon:
    entries: dict  # token -> polarity weight
    kind: str  # "subjectivity" | "sentiment"


@dataclass
class Gazetteer:
    entries: dict  # lowercase phrase -> entity type

    def max_phrase_len(self):
        return max((len(p.split()) for p in self.entries), default=0)


def load_lexicon(path, kind):
    entries = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                tok, w = line.split("\t")
                entries[tok] = float(w)
            except ValueError:
                raise TaskError("lexicon %s line %d malformed" % (path, lineno))
    return Lexicon(entries=entries, kind=kind)


def load_gazetteer(path):
    entries = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                phrase, etype = line.split("\t")
            except ValueError:
                raise TaskError("gazetteer %s line %d malformed" % (path, lineno))
            if etype not in ENTITY_TYPES:
                raise TaskError(
                    "gazetteer %s line %d: unknown entity type %r" % (path, lineno, etype)
                )
            entries[phrase.lower()] = etype
    return Gazetteer(entries=entries)


def classify_sentiment(lexicon, tokens, threshold=0.0):
    """Three-way polarity from summed token weights."""
    if lexicon.kind != "sentiment":
        raise TaskError("lexicon kind must be sentiment")
    score = sum(lexicon.entries.get(t, 0.0) for t in tokens)
    if score > threshold:
        return CategoricalLabel("positive")
    if score < -threshold:
        return CategoricalLabel("negative")
    return CategoricalLabel("neutral")


def classify_subjectivity(lexicon, tokens):
    """Binary: subjective iff any token carries a nonzero weight."""
    if lexicon.kind != "subjectivity":
        raise TaskError("lexicon kind must be subjectivity")
    for t in tokens:
        if lexicon.entries.get(t, 0.0) != 0.0:
            return CategoricalLabel("subjective")
    return CategoricalLabel("objective")


def extract_entities(gazetteer, tokens):
    """Greedy left-to-right longest-match entity tagging over lowercase tokens."""
    low = [t.lower() for t in tokens]
    max_len = gazetteer.max_phrase_len()
    found = []
    i = 0
    n = len(low)
    while i < n:
        matched = False
        for span in range(min(max_len, n - i), 0, -1):
            phrase = " ".join(low[i : i + span])
            etype = gazetteer.entries.get(phrase)
            if etype is not None:
                found.append((etype, phrase))
                i += span
                matched = True
                break
        if not matched:
            i += 1
    return EntityMultiset.from_pairs(found)


def compare_outputs(a, b):
    """Equality of task outputs: label names, or multisets with multiplicity."""
    if isinstance(a, CategoricalLabel) and isinstance(b, CategoricalLabel):
        return a.name == b.name
    if isinstance(a, EntityMultiset) and isinstance(b, EntityMultiset):
        return a.counter() == b.counter()
    raise TaskError("cannot compare outputs of different variants")


class ExternalTask:
    """Plug-in downstream system: a command taking sentences on stdin, one per
    line, and emitting per line either "LABEL <name>" or
    "ENTITIES <type>:<surface>;..." (empty entity list allowed)."""

    def __init__(self, command):
        self.command = command

    def __call__(self, tokens):
        return self.run_batch([tokens])[0]

    def run_batch(self, token_seqs):
        text = "\n".join(" ".join(toks) for toks in token_seqs) + "\n"
        proc = subprocess.run(
            self.command,
            shell=True,
            input=text.encode("utf-8"),
            capture_output=True,
        )
        if proc.returncode != 0:
            raise TaskError(
                "external task failed (exit %d): %s"
                % (proc.returncode, proc.stderr.decode("utf-8", "replace").strip())
            )
        lines = proc.stdout.decode("utf-8").splitlines()
        if len(lines) != len(token_seqs):
            raise TaskError(
                "external task emitted %d lines for %d inputs" % (len(lines), len(token_seqs))
            )
        return [parse_task_output(line) for line in lines]


def parse_task_output(line):
    line = line.strip()
    if line.startswith("LABEL "):
        return CategoricalLabel(line[len("LABEL "):].strip())
    if line.startswith("ENTITIES"):
        rest = line[len("ENTITIES"):].strip()
        pairs = []
        if rest:
            for item in rest.split(";"):
                item = item.strip()
                if not item:
                    continue
                etype, _, surface = item.partition(":")
                if etype not in ENTITY_TYPES or not surface:
                    raise TaskError("bad entity item %r" % item)
                pairs.append((etype, surface.lower()))
        return EntityMultiset.from_pairs(pairs)
    raise TaskError("unparseable task output line %r" % line)


def format_task_output(out):
    if isinstance(out, CategoricalLabel):
        return "LABEL %s" % out.name
    return "ENTITIES " + ";".join("%s:%s" % (t, s) for t, s in out.entries)


def make_task(name, lexicon=None, gazetteer=None, command=None, threshold=0.0):
    """Build a callable f(tokens) -> TaskOutput for a named task."""
    if name == "sentiment":
        if lexicon is None:
            raise TaskError("sentiment task requires a lexicon")
        return lambda toks: classify_sentiment(lexicon, toks, threshold)
    if name == "subjectivity":
        if lexicon is None:
            raise TaskError("subjectivity task requires a lexicon")
        return lambda toks: classify_subjectivity(lexicon, toks)
    if name == "ner":
        if gazetteer is None:
            raise TaskError("ner task requires a gazetteer")
        return lambda toks: extract_entities(gazetteer, toks)
    if name == "external":
        if command is None:
            raise TaskError("external task requires a command")
        return ExternalTask(command)
    raise TaskError("unknown task %r" % name)
