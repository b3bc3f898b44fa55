#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Times the three projection hot-loop kernels and a full projection run on
synthetic pools, and reports the cross-backend agreement of each kernel's
output. Run after `pip install -e . --no-build-isolation`:

    python3 benchmarks/bench_kernels.py [--sizes 100 300 600] [--repeats 5]
"""

import argparse
import time

import numpy as np

from coldselect import _kernels


def time_call(fn, *args, repeats=5):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_size(n, dim, repeats):
    rng = np.random.default_rng(0)
    x = rng.standard_normal((n, dim))
    backends = {name: _kernels.get_backend(name)
                for name in _kernels.available_backends()}
    if "ext" not in backends:
        print("compiled backend unavailable; nothing to compare")
        return

    rows = []
    y = rng.standard_normal((n, 2))
    target = float(np.log2(min(30.0, (n - 1) / 3.0)))
    for name, mod in backends.items():
        t_dist, d = time_call(mod.pairwise_sq_dists, x, repeats=repeats)
        t_aff, (p_cond, fail) = time_call(
            mod.conditional_affinities, d, target, 1e-5, 200, repeats=repeats)
        assert fail == -1
        p = (p_cond + p_cond.T) / (2.0 * n)
        t_grad, (grad, kl) = time_call(mod.tsne_grad_kl, p, y, 1.0,
                                       repeats=repeats)
        rows.append((name, t_dist, t_aff, t_grad, d, p, grad, kl))

    print(f"\nN={n}, D={dim} (best of {repeats})")
    print(f"{'backend':<8} {'sq_dists':>10} {'affinities':>11} {'grad+kl':>10}")
    for name, t_dist, t_aff, t_grad, *_ in rows:
        print(f"{name:<8} {t_dist * 1e3:>8.2f}ms {t_aff * 1e3:>9.2f}ms "
              f"{t_grad * 1e3:>8.2f}ms")
    if len(rows) == 2:
        _, _, _, _, d0, p0, g0, kl0 = rows[0]
        _, _, _, _, d1, p1, g1, kl1 = rows[1]
        print(f"agreement: dists {np.abs(d0 - d1).max():.2e}  "
              f"affinities {np.abs(p0 - p1).max():.2e}  "
              f"grad {np.abs(g0 - g1).max():.2e}  "
              f"kl {abs(kl0 - kl1):.2e}")


def bench_full_run(n, dim):
    from coldselect.projection import TsneConfig, run_tsne
    from coldselect.types import EmbeddingSet

    rng = np.random.default_rng(1)
    emb = EmbeddingSet(ids=tuple(f"i{i:04d}" for i in range(n)),
                       features=rng.standard_normal((n, dim)))
    cfg = TsneConfig(seed=43)
    for name in _kernels.available_backends():
        mod = _kernels.get_backend(name)
        saved = (_kernels.pairwise_sq_dists, _kernels.conditional_affinities,
                 _kernels.tsne_grad_kl)
        _kernels.pairwise_sq_dists = mod.pairwise_sq_dists
        _kernels.conditional_affinities = mod.conditional_affinities
        _kernels.tsne_grad_kl = mod.tsne_grad_kl
        try:
            t0 = time.perf_counter()
            run_tsne(emb, cfg)
            print(f"full projection (N={n}, 1000 iters) [{name}]: "
                  f"{time.perf_counter() - t0:.2f}s")
        finally:
            (_kernels.pairwise_sq_dists, _kernels.conditional_affinities,
             _kernels.tsne_grad_kl) = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 300, 600])
    ap.add_argument("--dim", type=int, default=64)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    print(f"active backend: {_kernels.BACKEND}  "
          f"available: {_kernels.available_backends()}")
    for n in args.sizes:
        bench_size(n, args.dim, args.repeats)
    bench_full_run(max(args.sizes), args.dim)


if __name__ == "__main__":
    main()
