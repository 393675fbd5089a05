"""MT adapters producing translation records, including a noisy-channel
simulator so the pipeline runs without a real translation system.

The simulator's randomness uses numpy PCG64 seeded with SeedSequence
([seed, sentence_index]), so per-sentence streams are independent and the
result is the same whether sentences are processed sequentially or in
parallel. Per token the draw order is: one uniform for substitution, one for
drop; then one uniform per adjacent position for swapping.
"""

from dataclasses import dataclass, field

import numpy as np

from .corpus import tokenize


class TranslateError(ValueError):
    pass


@dataclass
class TranslationRecord:
    source: list
    mt: list
    reference: list


@dataclass
class NoiseConfig:
    drop_prob: float = 0.0
    swap_prob: float = 0.0
    substitute_prob: float = 0.0
    substitution_lexicon: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        for p in (self.drop_prob, self.swap_prob, self.substitute_prob):
            if not 0.0 <= p <= 1.0:
                raise TranslateError("noise probabilities must lie in [0, 1]")


def noise_channel(reference, config, rng):
    """Corrupt a reference: per-token substitute then drop, then adjacent swaps."""
    out = []
    for tok in reference:
        if config.substitute_prob > 0 and rng.random() < config.substitute_prob:
            tok = config.substitution_lexicon.get(tok, tok)
        if config.drop_prob > 0 and rng.random() < config.drop_prob:
            continue
        out.append(tok)
    for i in range(len(out) - 1):
        if config.swap_prob > 0 and rng.random() < config.swap_prob:
            out[i], out[i + 1] = out[i + 1], out[i]
    return out


def sentence_rng(seed, index):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))


class NoiseSimulatorAdapter:
    def __init__(self, config):
        self.config = config

    def translate(self, pairs):
        records = []
        for i, pair in enumerate(pairs):
            rng = sentence_rng(self.config.seed, i)
            mt = noise_channel(pair.reference, self.config, rng)
            records.append(TranslationRecord(pair.source, mt, pair.reference))
        return records


class FileBackedAdapter:
    """Reads MT output from a plain-text file aligned line-for-line with the corpus."""

    def __init__(self, path, lowercase=True):
        self.path = path
        self.lowercase = lowercase

    def translate(self, pairs):
        with open(self.path, encoding="utf-8") as f:
            lines = [line.rstrip("\n") for line in f]
        while lines and not lines[-1].strip():
            lines.pop()
        if len(lines) != len(pairs):
            raise TranslateError(
                "translations file has %d lines but corpus has %d pairs"
                % (len(lines), len(pairs))
            )
        records = []
        for pair, line in zip(pairs, lines):
            if self.lowercase:
                line = line.lower()
            records.append(TranslationRecord(pair.source, tokenize(line), pair.reference))
        return records


class ExternalCommandAdapter:
    """Pipes source sentences through a shell command, line-aligned."""

    def __init__(self, command, lowercase=True):
        self.command = command
        self.lowercase = lowercase

    def translate(self, pairs):
        import subprocess

        text = "\n".join(" ".join(p.source) for p in pairs) + "\n"
        proc = subprocess.run(
            self.command, shell=True, input=text.encode("utf-8"), capture_output=True
        )
        if proc.returncode != 0:
            raise TranslateError(
                "MT command failed (exit %d): %s"
                % (proc.returncode, proc.stderr.decode("utf-8", "replace").strip())
            )
        lines = proc.stdout.decode("utf-8").splitlines()
        if len(lines) != len(pairs):
            raise TranslateError(
                "MT command emitted %d lines for %d inputs" % (len(lines), len(pairs))
            )
        records = []
        for pair, line in zip(pairs, lines):
            if self.lowercase:
                line = line.lower()
            records.append(TranslationRecord(pair.source, tokenize(line), pair.reference))
        return records


def translate_batch(adapter, pairs):
    """Run an adapter over sentence pairs, order preserved."""
    return adapter.translate(pairs)
