"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Both backends are first checked to agree, then timed on cycles and
hypercubes of growing size.  The last column is the speed-up of the
compiled path.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from curvlab import kernels, zoo
from curvlab.means import get_mean


def _inputs(c, seed=0):
    rng = np.random.default_rng(seed)
    u = rng.normal(scale=2.0, size=c.n)
    rho = np.exp(u)
    f = rng.normal(size=c.n)
    mean = get_mean("log")
    t = u[c.dst] - u[c.src]
    h = 1e-5
    p1m, p10, p1p = (np.ascontiguousarray(mean.d1_t(t + s)) for s in (-h, 0.0, h))
    rh = np.ascontiguousarray(mean.theta(rho[c.src], rho[c.dst]))
    return rho, f, p1m, p10, p1p, rh, h


def bench(c, repeat):
    rho, f, p1m, p10, p1p, rh, h = _inputs(c)
    calls = {
        "forms": lambda b: kernels.assemble_forms(c, rho, p10, rh, backend=b),
        "ratio_fd": lambda b: kernels.ratio_fd(c, rho, f, p1m, p10, p1p, h, 0.0, backend=b),
    }
    rows = []
    for name, call in calls.items():
        a, b = call("python"), call("compiled")
        err = max(float(np.max(np.abs(np.asarray(x) - np.asarray(y)) / (1 + np.abs(np.asarray(x)))))
                  for x, y in zip(a, b))
        tp = min(timeit.repeat(lambda: call("python"), number=1, repeat=repeat))
        tc = min(timeit.repeat(lambda: call("compiled"), number=1, repeat=repeat))
        rows.append((name, tp, tc, err))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    if not kernels.COMPILED_AVAILABLE:
        raise SystemExit("compiled extension not built; run pip install -e . --no-build-isolation")
    chains = [(f"cycle n={n}", zoo.cycle(n, 0.5)) for n in (16, 64, 256)]
    chains += [(f"hypercube d={d}", zoo.hypercube(d)) for d in (4, 6, 8)]
    print(f"{'chain':<16}{'kernel':<10}{'numpy s':>12}{'compiled s':>12}{'max rel err':>13}{'speed-up':>10}")
    for label, c in chains:
        for name, tp, tc, err in bench(c, args.repeat):
            print(f"{label:<16}{name:<10}{tp:12.2e}{tc:12.2e}{err:13.1e}{tp / tc:10.1f}")


if __name__ == "__main__":
    main()
