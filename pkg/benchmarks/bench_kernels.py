"""Time the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--n 200] [--repeat 5]

Prints one line per kernel: best-of-repeat seconds for each backend and the
speedup. Without the compiled extension only the fallback column is filled.
"""
import argparse
import timeit

import numpy as np

from amsplace import kernels


def _inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    x, y = rng.uniform(0, 100, n), rng.uniform(0, 100, n)
    w, h = rng.uniform(1, 10, n), rng.uniform(1, 10, n)
    d = np.triu(rng.choice([-0.5, 1.0], size=(n, n)), 1)
    d = np.ascontiguousarray(d + d.T)
    sizes = rng.integers(2, 7, size=n)
    idx = np.concatenate([rng.choice(n, size=s, replace=False) for s in sizes]).astype(np.int64)
    ptr = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    cost = rng.uniform(0.5, 2, n)
    pos = np.column_stack([x, y])
    half = np.column_stack([w, h]) / 2
    off = np.zeros((len(idx), 2))
    return dict(x=x, y=y, w=w, h=h, d=d, idx=idx, ptr=ptr, cost=cost, pos=pos, half=half, off=off)


def _cases(mod, a, fdgd_iters):
    return {
        "hpwl": lambda: mod.hpwl(a["x"], a["y"], a["ptr"], a["idx"], a["cost"]),
        "separation_deficit": lambda: mod.separation_deficit(a["x"], a["y"], a["w"], a["h"], a["d"], 1e-6),
        "least_violated": lambda: mod.least_violated(a["x"], a["y"], a["w"], a["h"], a["d"]),
        "proximity": lambda: mod.proximity(50.0, 50.0, a["x"], a["y"], a["w"], a["h"]),
        "fdgd_run": lambda: mod.fdgd_run(a["pos"], a["half"], a["d"], a["ptr"], a["idx"], a["off"],
                                         a["cost"], fdgd_iters, 5.0, 0.99, 0.05),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--fdgd-iters", type=int, default=50)
    args = ap.parse_args(argv)

    a = _inputs(args.n)
    backends = [("python", kernels.fallback)]
    if kernels.native is not None:
        backends.append(("cython", kernels.native))
    timings = {}
    for label, mod in backends:
        for name, fn in _cases(mod, a, args.fdgd_iters).items():
            timings[(label, name)] = min(timeit.repeat(fn, number=1, repeat=args.repeat))

    print(f"n={args.n} active backend={kernels.BACKEND}")
    print(f"{'kernel':<20}{'python s':>12}{'cython s':>12}{'speedup':>10}")
    for name in _cases(kernels.fallback, a, 1):
        py = timings[("python", name)]
        cy = timings.get(("cython", name))
        cy_s = f"{cy:12.5f}" if cy is not None else f"{'-':>12}"
        speed = f"{py / cy:10.1f}" if cy else f"{'-':>10}"
        print(f"{name:<20}{py:12.5f}{cy_s}{speed}")


if __name__ == "__main__":
    main()
