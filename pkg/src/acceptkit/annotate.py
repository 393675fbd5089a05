"""Automatic acceptability annotation: run the downstream task on the MT
output and the reference, compare, and emit binary-labeled instances."""

import hashlib
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from . import corpus as corpus_mod
from .downstream import compare_outputs

log = logging.getLogger(__name__)


class AnnotateError(ValueError):
    pass


@dataclass
class LabeledInstance:
    source_text: list
    mt_text: list
    source_ids: list
    mt_ids: list
    label: int
    reference_text: list = field(default_factory=list)


@dataclass
class DatasetSplit:
    train: list
    dev: list
    test: list
    seed: int


def filter_by_length(pairs, bpe, max_subwords=50):
    """Keep pairs whose source BPE segmentation has at most max_subwords units."""
    kept = []
    for pair in pairs:
        if len(corpus_mod.bpe_apply(bpe, pair.source)) <= max_subwords:
            kept.append(pair)
    return kept


def annotate(records, task, src_bpe, src_vocab, tgt_bpe, tgt_vocab):
    """Label each translation record: 1 iff the task output on the MT sentence
    equals the task output on the reference. Records where the task raises are
    skipped with a warning; returns (instances, skipped_count)."""
    instances = []
    skipped = 0
    for rec in records:
        try:
            out_mt = task(rec.mt)
            out_ref = task(rec.reference)
            y = 1 if compare_outputs(out_mt, out_ref) else 0
        except Exception as exc:
            skipped += 1
            log.warning("skipping record (%s): %s", type(exc).__name__, exc)
            continue
        src_ids = src_vocab.encode(corpus_mod.bpe_apply(src_bpe, rec.source))
        mt_ids = tgt_vocab.encode(corpus_mod.bpe_apply(tgt_bpe, rec.mt))
        instances.append(
            LabeledInstance(
                source_text=list(rec.source),
                mt_text=list(rec.mt),
                source_ids=src_ids,
                mt_ids=mt_ids,
                label=y,
                reference_text=list(rec.reference),
            )
        )
    return instances, skipped


def split_dataset(instances, dev_size, test_size, seed):
    """Seeded uniform shuffle then partition into train/dev/test."""
    n = len(instances)
    if dev_size + test_size > n:
        raise AnnotateError(
            "dev+test (%d) exceeds corpus size (%d)" % (dev_size + test_size, n)
        )
    rng = np.random.Generator(np.random.PCG64(seed))
    order = rng.permutation(n)
    shuffled = [instances[i] for i in order]
    dev = shuffled[:dev_size]
    test = shuffled[dev_size : dev_size + test_size]
    train = shuffled[dev_size + test_size :]
    return DatasetSplit(train=train, dev=dev, test=test, seed=seed)


def downsample_majority(instances, seed):
    """Optional class balancing: subsample the majority class to parity."""
    pos = [x for x in instances if x.label == 1]
    neg = [x for x in instances if x.label == 0]
    major, minor = (pos, neg) if len(pos) > len(neg) else (neg, pos)
    rng = np.random.Generator(np.random.PCG64(seed))
    keep = rng.permutation(len(major))[: len(minor)]
    kept = [major[i] for i in sorted(keep)]
    merged = kept + minor
    # preserve original relative order
    index = {id(x): i for i, x in enumerate(instances)}
    merged.sort(key=lambda x: index[id(x)])
    return merged


DATASET_FORMAT_VERSION = 1


def _digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        h.update(f.read())
    return h.hexdigest()


def save_dataset(instances, path, task_name="", resource_paths=(), meta=None):
    """Write instances as JSON lines with a leading header record."""
    header = {
        "format_version": DATASET_FORMAT_VERSION,
        "task": task_name,
        "resource_digests": {p: _digest(p) for p in resource_paths},
    }
    if meta:
        header.update(meta)
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(header, sort_keys=True) + "\n")
        for inst in instances:
            f.write(
                json.dumps(
                    {
                        "src": inst.source_text,
                        "mt": inst.mt_text,
                        "ref": inst.reference_text,
                        "label": inst.label,
                        "src_ids": inst.source_ids,
                        "mt_ids": inst.mt_ids,
                    },
                    sort_keys=True,
                    ensure_ascii=False,
                )
                + "\n"
            )


def load_dataset(path):
    """Read a labeled JSONL dataset; returns (instances, header)."""
    instances = []
    with open(path, encoding="utf-8") as f:
        header_line = f.readline()
        if not header_line:
            raise AnnotateError("empty dataset file %s" % path)
        header = json.loads(header_line)
        if header.get("format_version") != DATASET_FORMAT_VERSION:
            raise AnnotateError("unsupported dataset format in %s" % path)
        for line in f:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            instances.append(
                LabeledInstance(
                    source_text=obj["src"],
                    mt_text=obj["mt"],
                    source_ids=obj["src_ids"],
                    mt_ids=obj["mt_ids"],
                    label=int(obj["label"]),
                    reference_text=obj.get("ref", []),
                )
            )
    return instances, header
