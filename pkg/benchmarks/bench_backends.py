"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_backends.py [--repeat N]

Prints the best-of-N wall time of each kernel under both backends and the
speed-up. Results from both backends are also compared so a benchmark run
doubles as an equivalence smoke test.
"""

import argparse
import math
import timeit

import numpy as np

from passive_qkd import _backend
from passive_qkd.quadrature import GaussLegendre


def _cases(mod):
    th, wt = GaussLegendre(48).nodes(0.0, math.pi / 2)
    ps, wp = GaussLegendre(32).nodes(0.0, math.pi / 4 - 0.4)
    ct, cp = np.cos(th), np.cos(ps)
    z = np.linspace(0.0, 20.0, 2001)
    counts = lambda: np.zeros(2 + 2 * (4 + 16), dtype=np.int64)

    def mc():
        c = counts()
        mod.mc_events(12345, 0, 200_000, 17.5, 0.01, 17.325, 0.4, 0.00045, 3.2e-7, True, 16, c)
        return c

    return {
        "bessel_i_array(0, 2001 pts)": lambda: mod.bessel_i_array(0, z),
        "struve_l_array(0, 2001 pts)": lambda: mod.struve_l_array(0, z),
        "interval_moments(48x32)": lambda: mod.interval_moments(ct, wt, cp, wp, 0.35, 0.00045, 3.2e-7, 2),
        "mc_events(2e5 samples)": mc,
    }


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), rtol=1e-12, atol=0)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    name_c, compiled = _backend.load("auto")
    _, python = _backend.load("python")
    if name_c != "compiled":
        print("compiled extension not built; only the fallback is available")
        return 1
    cc, pc = _cases(compiled), _cases(python)
    print(f"{'kernel':32s} {'compiled [ms]':>14s} {'python [ms]':>12s} {'speed-up':>9s}  equal")
    for key in cc:
        tc = min(timeit.repeat(cc[key], number=1, repeat=args.repeat)) * 1e3
        tp = min(timeit.repeat(pc[key], number=1, repeat=args.repeat)) * 1e3
        eq = _same(cc[key](), pc[key]())
        print(f"{key:32s} {tc:14.3f} {tp:12.3f} {tp / tc:9.1f}  {eq}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
