"""Compiled vs numpy-fallback timings for the tree kernels.

    python benchmarks/bench_kernels.py [--n 5000] [--repeat 5]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from xaistab import _kernels
from xaistab.sab import ImageSpec, SSIN, generate_dataset
from xaistab.sab.dataset import stack
from xaistab.tree import TreeParams, fit


def cases(n: int, seed: int):
    data = stack(generate_dataset(n, ImageSpec(), SSIN, seed))
    X, y = data.features(), data.targets.astype(np.float64)
    tree = fit(X, y, TreeParams(), seed)
    samples = np.arange(n, dtype=np.intp)
    features = np.arange(X.shape[1], dtype=np.intp)
    t = tree
    return {
        "find_best_split[poisson]": lambda: _kernels.find_best_split(X, y, samples, features, _kernels.POISSON, 0.0),
        "find_best_split[absolute]": lambda: _kernels.find_best_split(X[:1000], y[:1000], samples[:1000], features, _kernels.ABSOLUTE, 0.0),
        "apply": lambda: _kernels.apply(t.feature, t.threshold, t.left, t.right, X),
        "explain": lambda: _kernels.explain(t.feature, t.threshold, t.left, t.right, t.impurity, X),
        "fit[default]": lambda: fit(X, y, TreeParams(), seed),
    }


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=5000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    backends = _kernels.available()
    timings = {}
    for name in backends:
        _kernels.set_backend(name)
        for label, fn in cases(args.n, args.seed).items():
            timings.setdefault(label, {})[name] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
    print(f"{'kernel':28s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for label, row in timings.items():
        line = f"{label:28s}" + "".join(f"{row[b] * 1e3:10.2f}ms" for b in backends)
        if len(backends) > 1:
            line += f"{row['python'] / row['compiled']:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
