"""Command-line entry point wiring the pipeline stages together.

Exit codes: 0 success, 1 usage error, 2 data error. Output files are written
atomically (temp file in the target directory, then rename).
"""

import argparse
import json
import logging
import os
import sys
import tempfile

import numpy as np

from . import annotate as annotate_mod
from . import birnn, corpus, downstream, evalmetrics, features, ibm1, ngram_lm, svm, translate


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("error: %s\n" % message)
        sys.exit(1)


def atomic_write_text(path, text):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_via_temp(path, writer):
    """Run writer(tmp_path) then rename tmp_path over path."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _corpus_side(pairs, side):
    if side == "source":
        return [p.source for p in pairs]
    if side == "target":
        return [p.reference for p in pairs]
    return [p.source for p in pairs] + [p.reference for p in pairs]


def cmd_bpe_learn(args):
    pairs = corpus.load_parallel(args.pairs)
    model = corpus.bpe_learn(_corpus_side(pairs, args.side), args.merges)
    atomic_via_temp(args.out, lambda p: corpus.save_bpe(model, p))
    print("learned %d merges (%s side)" % (len(model.merges), args.side))


def cmd_bpe_apply(args):
    model = corpus.load_bpe(args.model)
    lines = []
    with open(args.input, encoding="utf-8") as f:
        for line in f:
            toks = corpus.tokenize(line.rstrip("\n"))
            lines.append(" ".join(corpus.bpe_apply(model, toks)))
    atomic_write_text(args.out, "\n".join(lines) + "\n")


def cmd_vocab(args):
    pairs = corpus.load_parallel(args.pairs)
    model = corpus.load_bpe(args.bpe)
    seqs = [corpus.bpe_apply(model, s) for s in _corpus_side(pairs, args.side)]
    vocab = corpus.build_vocab(seqs, args.max_size)
    atomic_via_temp(args.out, lambda p: corpus.save_vocab(vocab, p))
    print("vocabulary size %d (including pad/unk)" % len(vocab))


def _make_adapter(args):
    if args.adapter == "noise":
        sub_lex = {}
        if args.sub_lexicon:
            with open(args.sub_lexicon, encoding="utf-8") as f:
                for line in f:
                    line = line.rstrip("\n")
                    if line:
                        a, b = line.split("\t")
                        sub_lex[a] = b
        cfg = translate.NoiseConfig(
            drop_prob=args.noise_drop,
            swap_prob=args.noise_swap,
            substitute_prob=args.noise_sub,
            substitution_lexicon=sub_lex,
            seed=args.seed,
        )
        return translate.NoiseSimulatorAdapter(cfg)
    if args.adapter.startswith("file:"):
        return translate.FileBackedAdapter(args.adapter[len("file:"):])
    if args.adapter.startswith("cmd:"):
        return translate.ExternalCommandAdapter(args.adapter[len("cmd:"):])
    raise translate.TranslateError("unknown adapter %r" % args.adapter)


def cmd_translate(args):
    pairs = corpus.load_parallel(args.pairs)
    records = translate.translate_batch(_make_adapter(args), pairs)
    atomic_write_text(args.out, "\n".join(" ".join(r.mt) for r in records) + "\n")
    print("translated %d sentences" % len(records))


def _make_task(args):
    lexicon = None
    gazetteer = None
    if args.task in ("sentiment", "subjectivity"):
        if not args.lexicon:
            raise downstream.TaskError("--lexicon is required for task %s" % args.task)
        lexicon = downstream.load_lexicon(args.lexicon, args.task)
    elif args.task == "ner":
        if not args.gazetteer:
            raise downstream.TaskError("--gazetteer is required for task ner")
        gazetteer = downstream.load_gazetteer(args.gazetteer)
    return downstream.make_task(
        args.task,
        lexicon=lexicon,
        gazetteer=gazetteer,
        command=getattr(args, "task_cmd", None),
        threshold=getattr(args, "threshold", 0.0),
    )


def _prepare_resources(args, pairs):
    """Load or learn the BPE models and vocabularies for both sides."""
    if args.src_bpe:
        src_bpe = corpus.load_bpe(args.src_bpe)
        tgt_bpe = corpus.load_bpe(args.tgt_bpe or args.src_bpe)
    else:
        # default: joint BPE over both sides
        joint = corpus.bpe_learn(_corpus_side(pairs, "both"), args.bpe_merges)
        src_bpe = tgt_bpe = joint
    if args.src_vocab:
        src_vocab = corpus.load_vocab(args.src_vocab)
    else:
        src_vocab = corpus.build_vocab(
            [corpus.bpe_apply(src_bpe, p.source) for p in pairs], args.vocab_size
        )
    if args.tgt_vocab:
        tgt_vocab = corpus.load_vocab(args.tgt_vocab)
    else:
        tgt_vocab = corpus.build_vocab(
            [corpus.bpe_apply(tgt_bpe, p.reference) for p in pairs], args.vocab_size
        )
    return src_bpe, tgt_bpe, src_vocab, tgt_vocab


def cmd_annotate(args):
    pairs = corpus.load_parallel(args.pairs)
    src_bpe, tgt_bpe, src_vocab, tgt_vocab = _prepare_resources(args, pairs)
    pairs = annotate_mod.filter_by_length(pairs, src_bpe, args.max_subwords)
    adapter = translate.FileBackedAdapter(args.mt)
    records = translate.translate_batch(adapter, pairs)
    task = _make_task(args)
    instances, skipped = annotate_mod.annotate(
        records, task, src_bpe, src_vocab, tgt_bpe, tgt_vocab
    )
    n_pos = sum(x.label for x in instances)
    meta = {
        "seed": args.seed,
        "skipped": skipped,
        "src_vocab_size": len(src_vocab),
        "tgt_vocab_size": len(tgt_vocab),
    }
    atomic_via_temp(
        args.out,
        lambda p: annotate_mod.save_dataset(instances, p, task_name=args.task, meta=meta),
    )
    print(
        "annotated %d instances (%d acceptable, %d unacceptable, %d skipped)"
        % (len(instances), n_pos, len(instances) - n_pos, skipped)
    )


def cmd_split(args):
    instances, header = annotate_mod.load_dataset(args.data)
    split = annotate_mod.split_dataset(instances, args.dev, args.test, args.seed)
    for name, part in (("train", split.train), ("dev", split.dev), ("test", split.test)):
        out = "%s.%s.jsonl" % (args.out_prefix, name)
        meta = {"seed": args.seed, "split": name}
        meta.update({k: header[k] for k in ("src_vocab_size", "tgt_vocab_size") if k in header})
        atomic_via_temp(
            out,
            lambda p, part=part, meta=meta: annotate_mod.save_dataset(
                part, p, task_name=header.get("task", ""), meta=meta
            ),
        )
        print("%s: %d instances" % (out, len(part)))


def cmd_lm_train(args):
    pairs = corpus.load_parallel(args.pairs)
    lm = ngram_lm.lm_train(_corpus_side(pairs, args.side))
    atomic_via_temp(args.out, lambda p: ngram_lm.save_lm(lm, p))
    print("trained order-3 LM on %d sentences" % len(pairs))


def cmd_ibm1_train(args):
    pairs = corpus.load_parallel(args.pairs)
    table = ibm1.ibm1_train(pairs, args.iterations)
    atomic_via_temp(args.out, lambda p: ibm1.save_lex_table(table, p))
    print(
        "EM finished; log-likelihood %0.4f -> %0.4f"
        % (table.log_likelihoods[0], table.log_likelihoods[-1])
    )


def cmd_features(args):
    instances, _ = annotate_mod.load_dataset(args.data)
    pairs = corpus.load_parallel(args.corpus)
    src_sents = [p.source for p in pairs]
    tgt_sents = [p.reference for p in pairs]
    from collections import Counter

    counts = Counter()
    for s in src_sents:
        counts.update(s)
    res = features.FeatureResources(
        src_lm=ngram_lm.load_lm(args.src_lm) if args.src_lm else ngram_lm.lm_train(src_sents),
        tgt_lm=ngram_lm.load_lm(args.tgt_lm) if args.tgt_lm else ngram_lm.lm_train(tgt_sents),
        quartiles=features.quartile_table(src_sents),
        lex_table=ibm1.load_lex_table(args.lex) if args.lex else ibm1.ibm1_train(pairs, 5),
        src_unigram_counts=counts,
    )
    records = [
        translate.TranslationRecord(x.source_text, x.mt_text, x.reference_text)
        for x in instances
    ]
    X = features.extract_batch(records, res)
    labels = [x.label for x in instances]
    atomic_via_temp(args.out, lambda p: features.save_features(X, labels, p))
    print("extracted %d feature rows" % len(X))


def cmd_train_biquest(args):
    X, y = features.load_features(args.features)
    model = svm.train_full(X, y, kernel=args.kernel, C=args.C, gamma=args.gamma, tol=args.tol)
    atomic_via_temp(args.out, lambda p: svm.save_svm(model, p))
    print("trained SVM with %d support vectors" % len(model.dual_coef))


def _birnn_config(args, header):
    return birnn.BirnnConfig(
        max_len=args.max_len,
        embed_dim=args.embed_dim,
        rnn_hidden=args.rnn_hidden,
        proj_dim=args.proj_dim,
        penult_dim=args.penult_dim,
        dropout_p=args.dropout,
        batch_size=args.batch_size,
        lr=args.lr,
        patience=args.patience,
        max_epochs=args.max_epochs,
        seed=args.seed,
    )


def _vocab_sizes(header, train_insts, dev_insts):
    if "src_vocab_size" in header:
        return header["src_vocab_size"], header["tgt_vocab_size"]
    mx_s = mx_t = 1
    for inst in train_insts + dev_insts:
        mx_s = max(mx_s, max(inst.source_ids, default=0))
        mx_t = max(mx_t, max(inst.mt_ids, default=0))
    return mx_s + 1, mx_t + 1


def cmd_train_birnn(args):
    train_insts, header = annotate_mod.load_dataset(args.train)
    dev_insts, _ = annotate_mod.load_dataset(args.dev)
    config = _birnn_config(args, header)
    split = annotate_mod.DatasetSplit(train=train_insts, dev=dev_insts, test=[], seed=args.seed)
    vs, vt = _vocab_sizes(header, train_insts, dev_insts)
    params, log = birnn.train(split, config, vs, vt)
    atomic_via_temp(args.out, lambda p: birnn.save_params(params, config, p))
    if args.log:
        atomic_write_text(
            args.log, "\n".join(json.dumps(rec, sort_keys=True) for rec in log) + "\n"
        )
    print("best dev accuracy %.4f after %d epochs" % (
        max(r["dev_accuracy"] for r in log), len(log)))


def cmd_predict(args):
    instances, _ = annotate_mod.load_dataset(args.data)
    with open(args.model, "rb") as f:
        first = f.readline()
    if first.startswith(b"#svm"):
        model = svm.load_svm(args.model)
        pairs = corpus.load_parallel(args.corpus) if args.corpus else None
        if pairs is None:
            raise svm.SvmError("--corpus is required for SVM prediction (feature resources)")
        from collections import Counter

        counts = Counter()
        for p in pairs:
            counts.update(p.source)
        res = features.FeatureResources(
            src_lm=ngram_lm.lm_train([p.source for p in pairs]),
            tgt_lm=ngram_lm.lm_train([p.reference for p in pairs]),
            quartiles=features.quartile_table([p.source for p in pairs]),
            lex_table=ibm1.ibm1_train(pairs, 5),
            src_unigram_counts=counts,
        )
        records = [
            translate.TranslationRecord(x.source_text, x.mt_text, x.reference_text)
            for x in instances
        ]
        X = features.extract_batch(records, res)
        labels, scores = svm.svm_predict(model, X)
    else:
        params, config = birnn.load_params(args.model)
        labels, scores = birnn.predict_batch(params, config, instances)
    atomic_write_text(
        args.out,
        "\n".join("%d\t%s" % (l, repr(float(s))) for l, s in zip(labels, scores)) + "\n",
    )
    print("wrote %d predictions" % len(labels))


def cmd_eval(args):
    instances, _ = annotate_mod.load_dataset(args.gold)
    golds = [x.label for x in instances]
    preds = []
    with open(args.pred, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                preds.append(int(line.split("\t")[0]))
    cm = evalmetrics.confusion(preds, golds)
    base = evalmetrics.baseline_accept_all(golds)
    report = {
        "n": cm.total,
        "accuracy": evalmetrics.accuracy(cm),
        "f_score": evalmetrics.f_score(cm),
        "baseline_accuracy": evalmetrics.accuracy(base),
        "confusion": {"tp": cm.tp, "fp": cm.fp, "tn": cm.tn, "fn": cm.fn},
    }
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        atomic_write_text(args.out, text)
    print(text, end="")


def cmd_pipeline(args):
    """annotate -> split -> train-birnn -> eval in one seeded run."""
    pairs = corpus.load_parallel(args.pairs)
    src_bpe, tgt_bpe, src_vocab, tgt_vocab = _prepare_resources(args, pairs)
    pairs = annotate_mod.filter_by_length(pairs, src_bpe, args.max_subwords)
    records = translate.translate_batch(_make_adapter(args), pairs)
    task = _make_task(args)
    instances, skipped = annotate_mod.annotate(
        records, task, src_bpe, src_vocab, tgt_bpe, tgt_vocab
    )
    split = annotate_mod.split_dataset(instances, args.dev, args.test, args.seed)
    config = _birnn_config(args, {})
    params, log = birnn.train(split, config, len(src_vocab), len(tgt_vocab))
    preds, _ = birnn.predict_batch(params, config, split.test)
    golds = [x.label for x in split.test]
    cm = evalmetrics.confusion(list(preds), golds)
    report = {
        "seed": args.seed,
        "n_annotated": len(instances),
        "skipped": skipped,
        "test_accuracy": evalmetrics.accuracy(cm),
        "baseline_accuracy": evalmetrics.accuracy(evalmetrics.baseline_accept_all(golds)),
        "confusion": {"tp": cm.tp, "fp": cm.fp, "tn": cm.tn, "fn": cm.fn},
        "epochs": len(log),
    }
    if args.model_out:
        atomic_via_temp(args.model_out, lambda p: birnn.save_params(params, config, p))
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    atomic_write_text(args.out, text)
    print(text, end="")


def _add_birnn_flags(p):
    p.add_argument("--max-len", type=int, default=64)
    p.add_argument("--embed-dim", type=int, default=256)
    p.add_argument("--rnn-hidden", type=int, default=256)
    p.add_argument("--proj-dim", type=int, default=512)
    p.add_argument("--penult-dim", type=int, default=1024)
    p.add_argument("--dropout", type=float, default=0.1)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--lr", type=float, default=5e-4)
    p.add_argument("--patience", type=int, default=5)
    p.add_argument("--max-epochs", type=int, default=50)


def _add_task_flags(p):
    p.add_argument("--task", required=True,
                   choices=["sentiment", "subjectivity", "ner", "external"])
    p.add_argument("--lexicon")
    p.add_argument("--gazetteer")
    p.add_argument("--task-cmd")
    p.add_argument("--threshold", type=float, default=0.0)


def _add_resource_flags(p):
    p.add_argument("--src-bpe")
    p.add_argument("--tgt-bpe")
    p.add_argument("--src-vocab")
    p.add_argument("--tgt-vocab")
    p.add_argument("--bpe-merges", type=int, default=32000)
    p.add_argument("--vocab-size", type=int, default=30000)
    p.add_argument("--max-subwords", type=int, default=50)


def _add_noise_flags(p):
    p.add_argument("--noise-drop", type=float, default=0.0)
    p.add_argument("--noise-swap", type=float, default=0.0)
    p.add_argument("--noise-sub", type=float, default=0.0)
    p.add_argument("--sub-lexicon")


def build_parser():
    parser = _Parser(prog="acceptkit")
    parser.add_argument("--log-level", default=os.environ.get("ACCEPTKIT_LOG", "WARNING"))
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("bpe-learn")
    p.add_argument("--pairs", required=True)
    p.add_argument("--side", choices=["source", "target", "both"], default="both")
    p.add_argument("--merges", type=int, default=32000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bpe_learn)

    p = sub.add_parser("bpe-apply")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bpe_apply)

    p = sub.add_parser("vocab")
    p.add_argument("--pairs", required=True)
    p.add_argument("--bpe", required=True)
    p.add_argument("--side", choices=["source", "target", "both"], default="source")
    p.add_argument("--max-size", type=int, default=30000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_vocab)

    p = sub.add_parser("translate")
    p.add_argument("--pairs", required=True)
    p.add_argument("--adapter", required=True,
                   help="noise | file:PATH | cmd:SHELL_COMMAND")
    _add_noise_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("annotate")
    p.add_argument("--pairs", required=True)
    p.add_argument("--mt", required=True)
    _add_task_flags(p)
    _add_resource_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("split")
    p.add_argument("--data", required=True)
    p.add_argument("--dev", type=int, default=10000)
    p.add_argument("--test", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("lm-train")
    p.add_argument("--pairs", required=True)
    p.add_argument("--side", choices=["source", "target"], required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_lm_train)

    p = sub.add_parser("ibm1-train")
    p.add_argument("--pairs", required=True)
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ibm1_train)

    p = sub.add_parser("features")
    p.add_argument("--data", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--src-lm")
    p.add_argument("--tgt-lm")
    p.add_argument("--lex")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train-biquest")
    p.add_argument("--features", required=True)
    p.add_argument("--kernel", choices=["linear", "rbf"], default="rbf")
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_biquest)

    p = sub.add_parser("train-birnn")
    p.add_argument("--train", required=True)
    p.add_argument("--dev", required=True)
    _add_birnn_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--log")
    p.set_defaults(func=cmd_train_birnn)

    p = sub.add_parser("predict")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--corpus", help="parallel corpus for SVM feature resources")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline")
    p.add_argument("--pairs", required=True)
    p.add_argument("--adapter", default="noise")
    _add_noise_flags(p)
    _add_task_flags(p)
    _add_resource_flags(p)
    _add_birnn_flags(p)
    p.add_argument("--dev", type=int, default=10000)
    p.add_argument("--test", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--model-out")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level.upper(), logging.WARNING))
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
