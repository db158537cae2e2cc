"""Benchmark the numba kernels against the pure-numpy fallback.

Runs each hot kernel on identical inputs through both backends, checks the
outputs agree, and reports wall-clock medians plus the speedup ratio.

    python3 benchmarks/bench_kernels.py --n 2000 --p 45 --trees 20
"""

import argparse
import time

import numpy as np

from voicemarkers.kernels import get_backend


def _median_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def _workload(n, p, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    logit = X[:, 0] - 0.7 * X[:, 1] + 0.4 * X[:, 2] * X[:, 3]
    y = (logit + 0.5 * rng.standard_normal(n) > 0).astype(np.float64)
    margin = np.zeros(n)
    prob = 1.0 / (1.0 + np.exp(-margin))
    g = prob - y
    h = prob * (1.0 - prob)
    boot = rng.integers(0, n, n)
    return X, y, g, h, boot


def bench_gini(backend, X, y, boot, trees):
    imp = np.zeros(X.shape[1])
    for t in range(trees):
        backend.gini_tree_importances(X, y, boot, 7, 64, 1, 1234 + t, imp)
    return imp


def bench_gbt(backend, X, g, h, trees):
    rows = np.arange(X.shape[0], dtype=np.int64)
    cols = np.arange(X.shape[1], dtype=np.int64)
    out = []
    for t in range(trees):
        out.append(backend.gbt_build_tree(X, g, h, rows, cols, 1.0, 0.0, 0.0,
                                          1.0, 1, 6, 0))
    return out


def bench_margin(backend, forest, X, repeats):
    feat, thr, left, right, value, roots = forest
    out = np.zeros(X.shape[0])
    for _ in range(repeats):
        backend.ensemble_margin(feat, thr, left, right, value, roots, X, out)
    return out


def _flatten(trees):
    feat = np.concatenate([t[0] for t in trees])
    thr = np.concatenate([t[1] for t in trees])
    left = []
    right = []
    roots = []
    base = 0
    for t in trees:
        l, r = t[2].copy(), t[3].copy()
        l[l >= 0] += base
        r[r >= 0] += base
        left.append(l)
        right.append(r)
        roots.append(base)
        base += t[0].shape[0]
    value = np.concatenate([t[4] for t in trees])
    return (feat, thr, np.concatenate(left), np.concatenate(right), value,
            np.asarray(roots, np.int64))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--p", type=int, default=45)
    ap.add_argument("--trees", type=int, default=20)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    X, y, g, h, boot = _workload(args.n, args.p, args.seed)
    backends = {}
    for name in ("numpy", "numba"):
        try:
            backends[name] = get_backend(name)
        except (ImportError, ValueError):
            print("backend %s unavailable, skipping" % name)
    if "numba" in backends:
        # compile outside the timed region
        bench_gini(backends["numba"], X[:64], y[:64], boot[:64] % 64, 2)
        bench_gbt(backends["numba"], X[:64], g[:64], h[:64], 2)
        tiny = _flatten(bench_gbt(backends["numpy"], X[:64], g[:64],
                                  h[:64], 2))
        bench_margin(backends["numba"], tiny, X[:64], 1)

    results = {}
    checks = {}
    for name, backend in backends.items():
        t_gini = _median_time(
            lambda b=backend: bench_gini(b, X, y, boot, args.trees),
            args.repeats)
        trees = bench_gbt(backend, X, g, h, args.trees)
        t_gbt = _median_time(
            lambda b=backend: bench_gbt(b, X, g, h, args.trees),
            args.repeats)
        forest = _flatten(trees)
        t_margin = _median_time(
            lambda b=backend, f=forest: bench_margin(b, f, X, 50),
            args.repeats)
        results[name] = {"gini_forest": t_gini, "gbt_build": t_gbt,
                         "ensemble_margin": t_margin}
        checks[name] = (bench_gini(backend, X, y, boot, 3),
                        bench_margin(backend, forest, X, 1))

    if len(backends) == 2:
        gi_a, ma_a = checks["numpy"]
        gi_b, ma_b = checks["numba"]
        assert np.allclose(gi_a, gi_b, atol=1e-10), "gini mismatch"
        assert np.allclose(ma_a, ma_b, atol=1e-10), "margin mismatch"
        print("cross-backend agreement: OK")

    header = "%-16s" % "kernel"
    for name in results:
        header += "%12s" % name
    if len(results) == 2:
        header += "%10s" % "speedup"
    print(header)
    for kernel in ("gini_forest", "gbt_build", "ensemble_margin"):
        row = "%-16s" % kernel
        for name in results:
            row += "%12.4f" % results[name][kernel]
        if len(results) == 2:
            row += "%9.1fx" % (results["numpy"][kernel] /
                               results["numba"][kernel])
        print(row)


if __name__ == "__main__":
    main()
