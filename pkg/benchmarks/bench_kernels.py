"""Compare the compiled and numpy stump kernels, alone and inside AdaBoost.

Usage: python3 benchmarks/bench_kernels.py [--n 569] [--d 30] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from labelstop import kernels, learners


def adaboost_with(kernel, X, y, rounds):
    saved = kernels.best_stump
    kernels.best_stump = kernel
    try:
        return learners.fit_adaboost(X, y, rounds)
    finally:
        kernels.best_stump = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=569)
    ap.add_argument("--d", type=int, default=30)
    ap.add_argument("--rounds", type=int, default=100)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    X = rng.normal(size=(args.n, args.d))
    y = (X[:, 0] + 0.5 * rng.normal(size=args.n) > 0).astype(np.int64)
    ypm = np.where(y > 0, 1.0, -1.0)
    w = np.full(args.n, 1.0 / args.n)
    order = np.argsort(X, axis=0, kind="stable")

    backends = {"python": kernels.python_best_stump}
    if kernels.compiled_best_stump is not None:
        backends["cython"] = kernels.compiled_best_stump
    else:
        print("compiled extension not built; timing the numpy backend only")

    results = {}
    for name, fn in backends.items():
        stump = min(timeit.repeat(lambda: fn(X, order, ypm, w), number=20, repeat=args.repeat)) / 20
        boost = min(timeit.repeat(lambda: adaboost_with(fn, X, y, args.rounds), number=1, repeat=args.repeat))
        results[name] = (stump, boost)
        print(f"{name:>7}: best_stump {stump * 1e3:8.3f} ms   adaboost-{args.rounds} {boost * 1e3:8.1f} ms")

    if len(results) == 2:
        a = adaboost_with(kernels.python_best_stump, X, y, args.rounds)
        b = adaboost_with(kernels.compiled_best_stump, X, y, args.rounds)
        same = all(np.array_equal(getattr(a, f), getattr(b, f)) for f in ("features", "thresholds", "polarities", "alphas"))
        print(f"speedup: best_stump {results['python'][0] / results['cython'][0]:.1f}x, "
              f"adaboost {results['python'][1] / results['cython'][1]:.1f}x; ensembles identical: {same}")


if __name__ == "__main__":
    main()
