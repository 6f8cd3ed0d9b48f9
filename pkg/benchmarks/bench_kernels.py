"""Time every hot kernel under both backends and check they agree.

    python3 benchmarks/bench_kernels.py [--size 64] [--batch 8] [--repeat 5]

Both backends are imported directly, so the ``MCPMIX_DISABLE_NUMBA`` switch
does not matter here. The first numba call compiles (or loads the on-disk
cache) and is excluded from the timings.
"""

import argparse
import time

import numpy as np

from mcpmix.kernels import _numba, _numpy


def best_of(fn, repeat):
    fn()  # warm-up / JIT
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def max_diff(a, b):
    if isinstance(a, tuple):
        return max(max_diff(x, y) for x, y in zip(a, b) if x is not None)
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def cases(size, batch, gen):
    x = gen.uniform(size=(batch, size, size, 3))
    w1, b1 = gen.normal(0, 0.3, (3, 3, 3, 8)), gen.normal(0, 0.1, 8)
    w2, b2 = gen.normal(0, 0.3, (3, 3, 8, 1)), gen.normal(0, 0.1, 1)
    e1, f1 = gen.normal(0, 0.3, (3, 3, 3, 16)), gen.normal(0, 0.1, 16)
    e2, f2 = gen.normal(0, 0.1, (3, 3, 16, 64)), gen.normal(0, 0.1, 64)
    gz = gen.normal(size=(batch, size, size)) / x.size
    gf = gen.normal(size=(batch, 64))
    sites = gen.uniform(size=(size, size)) < 0.02
    sites[0, 0] = True

    def seg_bwd(k):
        cache = k.segnet_forward(x, w1, b1, w2, b2)[1]
        return lambda: k.segnet_backward(cache, w1, w2, gz, True)

    def ext_bwd(k):
        cache = k.extractor_forward(x, e1, f1, e2, f2, 2)[1]
        return lambda: k.extractor_backward(cache, e1, e2, gf, 2)

    return {
        "conv2d_forward": lambda k: (lambda: k.conv2d_forward(x, w1, b1)),
        "segnet_forward": lambda k: (lambda: k.segnet_forward(x, w1, b1, w2, b2)[0]),
        "segnet_backward": seg_bwd,
        "extractor_forward": lambda k: (lambda: k.extractor_forward(x, e1, f1, e2, f2, 2)[0]),
        "extractor_backward": ext_bwd,
        "squared_edt": lambda k: (lambda: k.squared_edt(sites)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--batch", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    gen = np.random.default_rng(0)
    print(f"{'kernel':<20} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8} {'max |diff|':>11}")
    for name, make in cases(args.size, args.batch, gen).items():
        fa, fb = make(_numpy), make(_numba)
        ta, tb = best_of(fa, args.repeat), best_of(fb, args.repeat)
        diff = max_diff(fa(), fb())
        print(f"{name:<20} {ta * 1e3:>10.2f} {tb * 1e3:>10.2f} {ta / tb:>7.2f}x {diff:>11.2e}")


if __name__ == "__main__":
    main()
