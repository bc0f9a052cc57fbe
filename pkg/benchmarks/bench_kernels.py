#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the NumPy fallback.

Runs the full feature extraction plus the individual kernels on synthetic
images and prints a timing table.  Usage::

    python benchmarks/bench_kernels.py [--size 512] [--repeat 5]
"""

import argparse
import time

import numpy as np

from humancorpus.quality.brisque import gaussian_kernel1d
from humancorpus.quality.kernels import _ref

try:
    from humancorpus.quality.kernels import _core
except ImportError:
    _core = None


def _features_with(backend, img, k1d):
    # Inline the per-scale pipeline so the backend choice is explicit.
    from humancorpus.quality.fits import aggd_fit, ggd_fit

    current = img
    out = []
    for scale in (1, 2):
        mu, sg = backend.local_mean_std(current, k1d)
        m = (current - mu) / (sg + 1.0)
        g = ggd_fit(m.ravel())
        out.extend((g.alpha, g.sigma2))
        for prod in backend.paired_products(m):
            a = aggd_fit(prod.ravel())
            out.extend((a.alpha, a.eta, a.sigma_l2, a.sigma_r2))
        if scale == 1:
            current = backend.box_downsample2(current)
    return np.array(out)


def bench(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--size", type=int, default=512)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    img = rng.normal(128.0, 24.0, (args.size, args.size)).clip(0, 255)
    k1d = gaussian_kernel1d()
    big = rng.normal(0.0, 1.0, 4_000_000)

    backends = [("numpy", _ref)]
    if _core is not None:
        backends.append(("cython", _core))
    else:
        print("note: compiled backend not available, benchmarking NumPy only")

    rows = []
    for name, backend in backends:
        rows.append((
            name,
            bench(lambda: backend.local_mean_std(img, k1d), args.repeat),
            bench(lambda: backend.paired_products(img), args.repeat),
            bench(lambda: backend.signed_moments(big), args.repeat),
            bench(lambda: backend.box_downsample2(img), args.repeat),
            bench(lambda: _features_with(backend, img, k1d), args.repeat),
        ))

    header = (f"{'backend':<8} {'local_mean_std':>15} {'paired_products':>16} "
              f"{'signed_moments':>15} {'box_downsample2':>16} {'features':>10}")
    print(f"image {args.size}x{args.size}, moments over {big.size} samples, "
          f"best of {args.repeat}")
    print(header)
    for name, *times in rows:
        print(f"{name:<8} " + " ".join(f"{t * 1e3:>14.2f}ms" for t in times))
    if len(rows) == 2:
        base = rows[0]
        fast = rows[1]
        speedups = [b / f for b, f in zip(base[1:], fast[1:])]
        print("speedup  " + " ".join(f"{s:>14.2f}x " for s in speedups))

    # Sanity: both paths agree on the full feature vector.
    if _core is not None:
        ref = _features_with(_ref, img, k1d)
        fast = _features_with(_core, img, k1d)
        assert np.allclose(ref, fast, rtol=1e-8, atol=1e-10), "backends disagree"
        print("feature vectors agree (rtol 1e-8)")


if __name__ == "__main__":
    main()
