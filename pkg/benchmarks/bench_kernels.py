"""Compare the compiled and pure-Python kernel backends.

Times each hot-loop kernel on identical seeded inputs, checks that both
backends return the same values, and prints one row per kernel.

    python benchmarks/bench_kernels.py [--repeat 5] [--size 2000]
"""
import argparse
import math
import sys
import timeit

import numpy as np

from catkappa import kernels


def make_inputs(rng, size):
    a = rng.uniform(0.1, 1.4, size)
    b = rng.uniform(0.1, 1.4, size)
    c = rng.uniform(np.abs(a - b) + 1e-3, a + b - 1e-3)
    g = rng.uniform(0.0, math.pi, size)
    hyp = [np.concatenate([[math.cosh(r)], math.sinh(r) * u / np.linalg.norm(u)])
           for r, u in zip(rng.uniform(0, 2, 64), rng.normal(size=(64, 3)))]
    return {"a": a, "b": b, "c": c, "g": g, "hyp": np.array(hyp)}


def cases(data, size):
    """(name, callable) pairs; every callable returns something comparable."""
    a, b, c, g, P = data["a"], data["b"], data["c"], data["g"], data["hyp"]
    k = kernels
    return [
        ("comparison_angle x%d" % size,
         lambda: [k.comparison_angle(-1, a[i], b[i], c[i]) for i in range(size)]),
        ("comparison_angles (vector) %d" % size, lambda: k.comparison_angles(1, a, b, c)),
        ("side_from_angle x%d" % size,
         lambda: [k.side_from_angle(0, a[i], b[i], g[i]) for i in range(size)]),
        ("model_dist H3 x%d" % size,
         lambda: [k.model_dist(-1, P[i % 64], P[(i * 7 + 3) % 64]) for i in range(size)]),
        ("model_geodesic H3 x%d" % size,
         lambda: [k.model_geodesic(-1, P[i % 64], P[(i * 5 + 1) % 64], 0.3) for i in range(size)]),
        ("max_dist H3 64 pts x%d" % (size // 10),
         lambda: [k.max_dist(-1, P, P[i % 64]) for i in range(size // 10)]),
        ("minimax_iterate H3 64 pts", lambda: k.minimax_iterate(-1, P, P[0], 20000, 1e-12, 50)),
    ]


def flatten(x):
    if isinstance(x, tuple):
        return np.concatenate([flatten(v) for v in x])
    if isinstance(x, list):
        return np.concatenate([flatten(v) for v in x]) if x else np.zeros(0)
    return np.atleast_1d(np.asarray(x, dtype=float)).ravel()


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernels are not built; timing the Python backend only", file=sys.stderr)
    data = make_inputs(np.random.default_rng(args.seed), args.size)
    prev = kernels.backend()
    timings, values = {}, {}
    try:
        for bk in backends:
            kernels.use_backend(bk)
            for name, fn in cases(data, args.size):
                values[bk, name] = flatten(fn())
                timings[bk, name] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
    finally:
        kernels.use_backend(prev)
    names = [name for name, _ in cases(data, args.size)]
    print("%-34s %12s %12s %9s %11s" % ("kernel", "cython [ms]", "python [ms]", "speedup", "max |diff|"))
    worst = 0.0
    for name in names:
        py = timings["python", name] * 1e3
        if "cython" in backends:
            cy = timings["cython", name] * 1e3
            diff = float(np.max(np.abs(values["cython", name] - values["python", name])))
            worst = max(worst, diff)
            print("%-34s %12.3f %12.3f %8.1fx %11.2e" % (name, cy, py, py / cy, diff))
        else:
            print("%-34s %12s %12.3f %9s %11s" % (name, "-", py, "-", "-"))
    return 0 if worst <= 1e-9 else 1


if __name__ == "__main__":
    sys.exit(main())
