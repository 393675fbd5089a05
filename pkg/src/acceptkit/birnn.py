"""Recurrent acceptability detector: per-language embeddings and bidirectional
GRUs, a shared word-attention pooling over the joint sequence, and a sigmoid
output, trained with cross-entropy, Adam, and dev-accuracy early stopping.
All gradients are computed analytically (no autodiff framework)."""

import copy
import hashlib
import json
from dataclasses import dataclass, field, asdict

import numpy as np

from . import _accel
from .corpus import PAD_ID


class BirnnError(ValueError):
    pass


@dataclass
class BirnnConfig:
    max_len: int = 64
    embed_dim: int = 256
    rnn_hidden: int = 256  # per direction
    proj_dim: int = 512
    penult_dim: int = 1024
    dropout_p: float = 0.1  # embeddings only
    batch_size: int = 128
    lr: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    patience: int = 5
    max_epochs: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.max_len < 1 or min(
            self.embed_dim, self.rnn_hidden, self.proj_dim, self.penult_dim
        ) < 1:
            raise BirnnError("all dimensions must be >= 1")
        if not 0.0 <= self.dropout_p < 1.0:
            raise BirnnError("dropout_p must lie in [0, 1)")


_GRU_WEIGHTS = ("Wxz", "Wxr", "Wxc", "Whz", "Whr", "Whc", "bz", "br", "bc")


def _glorot(rng, shape):
    bound = np.sqrt(6.0 / (shape[0] + shape[1]))
    return rng.uniform(-bound, bound, size=shape)


def init_params(config, src_vocab_size, tgt_vocab_size, seed=None):
    """Glorot-uniform matrices, zero biases, seeded."""
    rng = np.random.Generator(
        np.random.PCG64(config.seed if seed is None else seed)
    )
    E, H, P, U = (
        config.embed_dim,
        config.rnn_hidden,
        config.proj_dim,
        config.penult_dim,
    )
    params = {}
    params["emb_src"] = _glorot(rng, (src_vocab_size, E))
    params["emb_tgt"] = _glorot(rng, (tgt_vocab_size, E))
    for side in ("src", "tgt"):
        for d in ("fwd", "bwd"):
            pre = "gru_%s_%s_" % (side, d)
            for g in ("z", "r", "c"):
                params[pre + "Wx" + g] = _glorot(rng, (E, H))
                params[pre + "Wh" + g] = _glorot(rng, (H, H))
                params[pre + "b" + g] = np.zeros(H)
        params["proj_%s_W" % side] = _glorot(rng, (2 * H, P))
        params["proj_%s_b" % side] = np.zeros(P)
    params["attn_w"] = _glorot(rng, (P, 1))[:, 0]
    params["pen_W"] = _glorot(rng, (P, U))
    params["pen_b"] = np.zeros(U)
    params["out_W"] = _glorot(rng, (U, 1))[:, 0]
    params["out_b"] = np.zeros(1)
    return params


def _gru_args(params, side, direction):
    pre = "gru_%s_%s_" % (side, direction)
    return tuple(params[pre + n] for n in _GRU_WEIGHTS)


def _bigru_forward(params, side, X, mask):
    """Run forward and reversed GRU passes; returns g (L,B,2H) and caches."""
    fwd = _accel.gru_forward(X, mask, *_gru_args(params, side, "fwd"))
    Xr = np.ascontiguousarray(X[::-1])
    mr = np.ascontiguousarray(mask[::-1])
    bwd = _accel.gru_forward(Xr, mr, *_gru_args(params, side, "bwd"))
    h_fwd = fwd[0][1:]
    h_bwd = bwd[0][1:][::-1]
    g = np.concatenate([h_fwd, h_bwd], axis=2)
    return g, fwd, bwd, Xr, mr


@dataclass
class ForwardTrace:
    S: np.ndarray
    T: np.ndarray
    mask_s: np.ndarray  # (L, B)
    mask_t: np.ndarray
    Xs: np.ndarray  # (L, B, E) post-dropout embeddings
    Xt: np.ndarray
    drop_s: np.ndarray
    drop_t: np.ndarray
    gru: dict  # side -> (fwd_cache, bwd_cache, Xr, mr)
    g: dict  # side -> (L, B, 2H)
    pre: dict  # side -> pre-ReLU projection
    h_all: np.ndarray  # (2L, B, P)
    mask_all: np.ndarray  # (2L, B)
    alpha: np.ndarray  # (2L, B)
    u: np.ndarray  # (B, P)
    pen_pre: np.ndarray
    v: np.ndarray
    p: np.ndarray  # (B,)


def _validate_ids(ids, vocab_size, name):
    if ids.min() < 0 or ids.max() >= vocab_size:
        raise BirnnError("%s id out of vocabulary range [0, %d)" % (name, vocab_size))


def forward_batch(params, config, S, T, train_mode=False, rng=None):
    """Forward pass over a batch of (source ids, target ids), both (B, L)."""
    S = np.asarray(S, dtype=np.int64)
    T = np.asarray(T, dtype=np.int64)
    B, L = S.shape
    _validate_ids(S, params["emb_src"].shape[0], "source")
    _validate_ids(T, params["emb_tgt"].shape[0], "target")
    mask_s = np.ascontiguousarray((S != PAD_ID).T.astype(np.float64))
    mask_t = np.ascontiguousarray((T != PAD_ID).T.astype(np.float64))
    if np.any((mask_s.sum(axis=0) + mask_t.sum(axis=0)) == 0):
        raise BirnnError("instance with both sequences empty")

    Xs = np.ascontiguousarray(params["emb_src"][S].transpose(1, 0, 2))
    Xt = np.ascontiguousarray(params["emb_tgt"][T].transpose(1, 0, 2))
    if train_mode and config.dropout_p > 0.0:
        if rng is None:
            raise BirnnError("train_mode dropout requires an rng")
        keep = 1.0 - config.dropout_p
        drop_s = (rng.random(Xs.shape) < keep) / keep
        drop_t = (rng.random(Xt.shape) < keep) / keep
        Xs = np.ascontiguousarray(Xs * drop_s)
        Xt = np.ascontiguousarray(Xt * drop_t)
    else:
        drop_s = drop_t = None

    gru = {}
    g = {}
    pre = {}
    h = {}
    for side, X, mask in (("src", Xs, mask_s), ("tgt", Xt, mask_t)):
        gs, fwd, bwd, Xr, mr = _bigru_forward(params, side, X, mask)
        gru[side] = (fwd, bwd, Xr, mr)
        g[side] = gs
        pre[side] = gs @ params["proj_%s_W" % side] + params["proj_%s_b" % side]
        h[side] = np.maximum(pre[side], 0.0)

    h_all = np.concatenate([h["src"], h["tgt"]], axis=0)
    mask_all = np.concatenate([mask_s, mask_t], axis=0)
    scores = h_all @ params["attn_w"]  # (2L, B)
    neg = np.where(mask_all > 0, scores, -np.inf)
    mx = neg.max(axis=0)
    ex = np.where(mask_all > 0, np.exp(neg - mx), 0.0)
    denom = ex.sum(axis=0)
    alpha = ex / denom
    sums = alpha.sum(axis=0)
    if np.any(np.abs(sums - 1.0) > 1e-6):
        raise BirnnError("attention weights failed to normalize")

    u = np.einsum("lb,lbp->bp", alpha, h_all)
    pen_pre = u @ params["pen_W"] + params["pen_b"]
    v = np.maximum(pen_pre, 0.0)
    logit = v @ params["out_W"] + params["out_b"][0]
    p = 1.0 / (1.0 + np.exp(-logit))

    trace = ForwardTrace(
        S=S, T=T, mask_s=mask_s, mask_t=mask_t, Xs=Xs, Xt=Xt,
        drop_s=drop_s, drop_t=drop_t, gru=gru, g=g, pre=pre,
        h_all=h_all, mask_all=mask_all, alpha=alpha, u=u,
        pen_pre=pen_pre, v=v, p=p,
    )
    return p, trace


def forward(params, config, s_ids, t_ids, train_mode=False, rng=None):
    """Single-instance forward; pads/truncates to config.max_len."""
    S = pad_ids([s_ids], config.max_len)
    T = pad_ids([t_ids], config.max_len)
    p, trace = forward_batch(params, config, S, T, train_mode, rng)
    return float(p[0]), trace


def loss(p, y):
    """Binary cross-entropy with probability clamping at 1e-12."""
    p = np.clip(np.asarray(p, dtype=float), 1e-12, 1.0 - 1e-12)
    y = np.asarray(y, dtype=float)
    return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))))


def backward(trace, params, config, y):
    """Gradients of the mean batch cross-entropy w.r.t. every parameter."""
    y = np.asarray(y, dtype=float)
    B = trace.p.shape[0]
    grads = {k: np.zeros_like(v) for k, v in params.items()}

    dlogit = (trace.p - y) / B  # (B,)
    grads["out_W"] = trace.v.T @ dlogit
    grads["out_b"] = np.array([dlogit.sum()])
    dv = np.outer(dlogit, params["out_W"])
    dpen = dv * (trace.pen_pre > 0)
    grads["pen_W"] = trace.u.T @ dpen
    grads["pen_b"] = dpen.sum(axis=0)
    du = dpen @ params["pen_W"].T  # (B, P)

    # attention: u = sum_i alpha_i h_i
    alpha = trace.alpha
    h_all = trace.h_all
    dalpha = np.einsum("bp,lbp->lb", du, h_all)
    dh_all = alpha[:, :, None] * du[None, :, :]
    inner = np.einsum("lb,lb->b", alpha, dalpha)
    dscores = alpha * (dalpha - inner[None, :])
    dh_all = dh_all + dscores[:, :, None] * params["attn_w"][None, None, :]
    grads["attn_w"] = np.einsum("lb,lbp->p", dscores, h_all)

    L = trace.mask_s.shape[0]
    H = config.rnn_hidden
    dh = {"src": dh_all[:L], "tgt": dh_all[L:]}
    for side, X, mask, drop, emb_key, ids in (
        ("src", trace.Xs, trace.mask_s, trace.drop_s, "emb_src", trace.S),
        ("tgt", trace.Xt, trace.mask_t, trace.drop_t, "emb_tgt", trace.T),
    ):
        dpre = dh[side] * (trace.pre[side] > 0)
        Lb, Bb, P = dpre.shape
        g2 = trace.g[side].reshape(Lb * Bb, 2 * H)
        grads["proj_%s_W" % side] = g2.T @ dpre.reshape(Lb * Bb, P)
        grads["proj_%s_b" % side] = dpre.sum(axis=(0, 1))
        dg = dpre @ params["proj_%s_W" % side].T  # (L, B, 2H)

        fwd, bwd, Xr, mr = trace.gru[side]
        d_fwd = np.ascontiguousarray(dg[:, :, :H])
        d_bwd = np.ascontiguousarray(dg[:, :, H:][::-1])
        wf = _gru_args(params, side, "fwd")[:6]
        wb = _gru_args(params, side, "bwd")[:6]
        out_f = _accel.gru_backward(d_fwd, X, mask, *fwd, *wf)
        out_b = _accel.gru_backward(d_bwd, Xr, mr, *bwd, *wb)
        dX = out_f[0] + out_b[0][::-1]
        for name, val in zip(_GRU_WEIGHTS, out_f[1:]):
            grads["gru_%s_fwd_%s" % (side, name)] = val
        for name, val in zip(_GRU_WEIGHTS, out_b[1:]):
            grads["gru_%s_bwd_%s" % (side, name)] = val

        if drop is not None:
            dX = dX * drop
        demb = grads[emb_key]
        np.add.at(demb, ids.T.reshape(-1), dX.reshape(-1, dX.shape[2]))
    return grads


def adam_init(params):
    return {
        "t": 0,
        "m": {k: np.zeros_like(v) for k, v in params.items()},
        "v": {k: np.zeros_like(v) for k, v in params.items()},
    }


def adam_step(state, params, grads, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """One in-place Adam update with bias correction."""
    state["t"] += 1
    t = state["t"]
    for k, g in grads.items():
        if g.shape != params[k].shape:
            raise BirnnError("gradient shape mismatch for %s" % k)
        m = state["m"][k] = beta1 * state["m"][k] + (1 - beta1) * g
        v = state["v"][k] = beta2 * state["v"][k] + (1 - beta2) * (g * g)
        mhat = m / (1 - beta1**t)
        vhat = v / (1 - beta2**t)
        params[k] -= lr * mhat / (np.sqrt(vhat) + eps)
    return params, state


def pad_ids(id_seqs, max_len):
    """Pad with PAD (truncating longer sequences) into an (N, max_len) array."""
    out = np.full((len(id_seqs), max_len), PAD_ID, dtype=np.int64)
    for i, seq in enumerate(id_seqs):
        seq = list(seq)[:max_len]
        out[i, : len(seq)] = seq
    return out


def instances_to_arrays(instances, max_len):
    S = pad_ids([inst.source_ids for inst in instances], max_len)
    T = pad_ids([inst.mt_ids for inst in instances], max_len)
    y = np.array([inst.label for inst in instances], dtype=float)
    return S, T, y


def evaluate_accuracy(params, config, S, T, y, batch_size=512):
    correct = 0
    for i in range(0, len(y), batch_size):
        p, _ = forward_batch(params, config, S[i : i + batch_size], T[i : i + batch_size])
        correct += int(np.sum((p >= 0.5).astype(int) == y[i : i + batch_size]))
    return correct / len(y)


def train(split, config, src_vocab_size, tgt_vocab_size):
    """Mini-batch training with dev-accuracy early stopping.

    Returns (best params, log) where log is one record per epoch with the
    epoch index, mean train loss, dev accuracy, and a best-so-far flag.
    """
    if not split.train or not split.dev:
        raise BirnnError("train and dev splits must be non-empty")
    S_tr, T_tr, y_tr = instances_to_arrays(split.train, config.max_len)
    S_dev, T_dev, y_dev = instances_to_arrays(split.dev, config.max_len)

    params = init_params(config, src_vocab_size, tgt_vocab_size)
    state = adam_init(params)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([config.seed, 1])))

    best_params = copy.deepcopy(params)
    best_acc = -1.0
    bad_epochs = 0
    log = []
    n = len(y_tr)
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            p, trace = forward_batch(
                params, config, S_tr[idx], T_tr[idx], train_mode=True, rng=rng
            )
            losses.append(loss(p, y_tr[idx]))
            grads = backward(trace, params, config, y_tr[idx])
            adam_step(state, params, grads, config.lr, config.beta1, config.beta2, config.eps)
        dev_acc = evaluate_accuracy(params, config, S_dev, T_dev, y_dev)
        improved = dev_acc > best_acc
        if improved:
            best_acc = dev_acc
            best_params = copy.deepcopy(params)
            bad_epochs = 0
        else:
            bad_epochs += 1
        log.append(
            {
                "epoch": epoch,
                "train_loss": float(np.mean(losses)),
                "dev_accuracy": dev_acc,
                "best": bool(improved),
            }
        )
        if bad_epochs >= config.patience:
            break
    return best_params, log


def predict(params, config, instance):
    """(label, probability) for one labeled instance; p = 0.5 counts acceptable."""
    p, _ = forward(params, config, instance.source_ids, instance.mt_ids)
    return (1 if p >= 0.5 else 0), p


def predict_batch(params, config, instances, batch_size=512):
    S, T, _ = instances_to_arrays(instances, config.max_len)
    probs = []
    for i in range(0, len(instances), batch_size):
        p, _ = forward_batch(params, config, S[i : i + batch_size], T[i : i + batch_size])
        probs.append(p)
    probs = np.concatenate(probs) if probs else np.zeros(0)
    return (probs >= 0.5).astype(int), probs


MODEL_FORMAT_VERSION = 1


def save_params(params, config, path):
    """Versioned binary serialization: one JSON header line (config, tensor
    shapes, payload checksum) followed by raw little-endian float64 data."""
    names = sorted(params)
    payload = b"".join(
        np.ascontiguousarray(params[k], dtype="<f8").tobytes() for k in names
    )
    header = {
        "format": "acceptkit-birnn",
        "version": MODEL_FORMAT_VERSION,
        "config": asdict(config),
        "tensors": [{"name": k, "shape": list(params[k].shape)} for k in names],
        "checksum": hashlib.sha256(payload).hexdigest(),
    }
    with open(path, "wb") as f:
        f.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        f.write(payload)


def load_params(path):
    with open(path, "rb") as f:
        header = json.loads(f.readline().decode("utf-8"))
        payload = f.read()
    if header.get("format") != "acceptkit-birnn" or header.get("version") != MODEL_FORMAT_VERSION:
        raise BirnnError("unsupported model file %s" % path)
    if hashlib.sha256(payload).hexdigest() != header["checksum"]:
        raise BirnnError("model file checksum mismatch: %s" % path)
    params = {}
    offset = 0
    for spec in header["tensors"]:
        size = int(np.prod(spec["shape"])) if spec["shape"] else 1
        arr = np.frombuffer(
            payload, dtype="<f8", count=size, offset=offset
        ).reshape(spec["shape"]).copy()
        params[spec["name"]] = arr
        offset += size * 8
    config = BirnnConfig(**header["config"])
    return params, config
