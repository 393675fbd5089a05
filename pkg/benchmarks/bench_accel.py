"""Benchmark the GRU forward/backward kernels: numba JIT vs pure numpy.

Usage: python benchmarks/bench_accel.py [--repeats N]

The numpy fallback is the same code path selected at import time by setting
ACCEPTKIT_NUMBA=0; here both variants are built explicitly so one process can
time them side by side on identical inputs.
"""

import argparse
import time

import numpy as np

from acceptkit._accel import build_kernels

SHAPES = [
    # (seq_len, batch, embed, hidden)
    (16, 64, 16, 16),
    (32, 128, 64, 64),
    (64, 128, 256, 256),
]


def make_inputs(L, B, E, H, rng):
    X = rng.normal(size=(L, B, E))
    mask = np.ones((L, B))
    mask[L // 2:, : B // 4] = 0.0  # a quarter of the batch is half padding
    weights = [rng.normal(scale=0.1, size=s)
               for s in [(E, H)] * 3 + [(H, H)] * 3 + [(H,)] * 3]
    dH = rng.normal(size=(L, B, H))
    return X, mask, weights, dH


def time_backend(fwd, bwd, X, mask, weights, dH, repeats):
    # warm-up pass (triggers JIT compilation for the numba build)
    cache = fwd(X, mask, *weights)
    bwd(dH, X, mask, *cache, *weights[:6])
    t_f = []
    t_b = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        cache = fwd(X, mask, *weights)
        t_f.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        bwd(dH, X, mask, *cache, *weights[:6])
        t_b.append(time.perf_counter() - t0)
    return min(t_f), min(t_b), cache


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    try:
        numba_kernels = build_kernels(True)
    except ImportError:
        numba_kernels = None
        print("numba is not installed; timing the numpy path only\n")
    numpy_kernels = build_kernels(False)

    rng = np.random.default_rng(0)
    header = "%-22s %12s %12s %12s %12s %8s" % (
        "shape (L,B,E,H)", "np fwd", "np bwd", "nb fwd", "nb bwd", "speedup")
    print(header)
    print("-" * len(header))
    for shape in SHAPES:
        X, mask, weights, dH = make_inputs(*shape, rng)
        np_f, np_b, np_cache = time_backend(*numpy_kernels, X, mask, weights, dH,
                                            args.repeats)
        if numba_kernels is None:
            print("%-22s %10.2fms %10.2fms %12s %12s %8s"
                  % (shape, np_f * 1e3, np_b * 1e3, "-", "-", "-"))
            continue
        nb_f, nb_b, nb_cache = time_backend(*numba_kernels, X, mask, weights, dH,
                                            args.repeats)
        for a, b in zip(np_cache, nb_cache):
            assert np.allclose(a, b, atol=1e-10), "backends disagree"
        speedup = (np_f + np_b) / (nb_f + nb_b)
        print("%-22s %10.2fms %10.2fms %10.2fms %10.2fms %7.1fx"
              % (shape, np_f * 1e3, np_b * 1e3, nb_f * 1e3, nb_b * 1e3, speedup))


if __name__ == "__main__":
    main()
