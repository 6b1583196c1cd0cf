"""Times the compiled kernels against the pure Python fallback.

Runs each hot operation on both backends with identical inputs and
prints best-of-five wall times plus the resulting speedup.  Numbers are
per call on the batch sizes shown, not per trial.

Usage: python3 benchmarks/bench_kernels.py [--repeats K]
"""

import argparse
import time

import numpy as np

from mimocap._kernels import _pykernels

try:
    from mimocap._kernels import _cykernels
except ImportError:
    _cykernels = None


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_pair(label, make_call, repeats):
    py_time = best_of(make_call(_pykernels), repeats)
    if _cykernels is None:
        print("%-34s %10.3f ms %12s %10s" % (label, 1e3 * py_time, "n/a", "n/a"))
        return
    cy_time = best_of(make_call(_cykernels), repeats)
    print(
        "%-34s %10.3f ms %10.3f ms %9.1fx"
        % (label, 1e3 * py_time, 1e3 * cy_time, py_time / cy_time)
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeats", type=int, default=5, help="best-of count per op")
    args = parser.parse_args()

    rng = np.random.default_rng(7)
    flat = (rng.standard_normal((8192, 4, 4)) + 1j * rng.standard_normal((8192, 4, 4))) / np.sqrt(2.0)
    taps = (rng.standard_normal((256, 4, 2, 2)) + 1j * rng.standard_normal((256, 4, 2, 2))) / np.sqrt(8.0)
    g = rng.standard_normal((2048, 8, 8)) + 1j * rng.standard_normal((2048, 8, 8))
    psd = g @ np.conj(np.swapaxes(g, 1, 2))

    cases = (
        ("gaussian sampling 256x512", lambda k: lambda: k.sample_cgauss_batch(1, 0, 256, 512)),
        ("gaussian sampling 8192x16", lambda k: lambda: k.sample_cgauss_batch(1, 0, 8192, 16)),
        ("flat capacity 8192x(4x4)", lambda k: lambda: k.capacity_uniform_batch(flat, 0.25)),
        ("ofdm capacity 256x(L=4,2x2,n=64)", lambda k: lambda: k.ofdm_capacity_batch(taps, 64, 0.5)),
        ("log-det batch 2048x(8x8)", lambda k: lambda: k.logdet2_batch(psd, 0.1)),
    )

    if _cykernels is None:
        print("compiled backend unavailable; timing the fallback only")
    print("%-34s %13s %13s %10s" % ("operation", "python", "cython", "speedup"))
    for label, make_call in cases:
        bench_pair(label, make_call, args.repeats)


if __name__ == "__main__":
    main()
