"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--particles N] [--repeat R]

Prints one line per kernel with the best-of-R time for each backend and the
speed-up. Both backends are also checked to agree before timing.
"""

from __future__ import annotations

import argparse
import math
import timeit

import numpy as np

from gcvlasov._kernels import get_backend


def cases(n: int, rng):
    L = 2.0 * math.pi
    x = rng.random((n, 3)) * L
    v = rng.standard_normal((n, 3))
    e = rng.standard_normal((n, 3))
    b = 1.0 + 0.1 * rng.random(n)
    w = rng.random(n)
    f2 = rng.standard_normal((2, 128, 64))
    f3 = rng.standard_normal((3, 32, 32, 32))
    rows = rng.standard_normal((128, 128))
    feet = np.arange(128)[None, :] - 0.5 + 3.0 * rng.standard_normal((128, 128))
    jump = rng.standard_normal(128)
    h2 = (L / 128, L / 64)
    h3 = (L / 32,) * 3
    return {
        "boris_push": lambda k: k.boris_push(x.copy(), v.copy(), e, b, 20.0, 0.01, (L, L, L)),
        "deposit_cic 2d": lambda k: k.deposit_cic(x, w, (128, 64), h2),
        "deposit_cic 3d": lambda k: k.deposit_cic(x, w, (32, 32, 32), h3),
        "gather_cic 2d": lambda k: k.gather_cic(f2, np.ascontiguousarray(x[:, :2]), h2),
        "gather_cic 3d": lambda k: k.gather_cic(f3, x, h3),
        "lagrange3_rows": lambda k: k.lagrange3_rows(rows, feet, jump),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--particles", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    py = get_backend("python")
    try:
        cy = get_backend("cython")
    except ImportError:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation`")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16} {'numpy [ms]':>11} {'cython [ms]':>12} {'speed-up':>9}")
    for name, fn in cases(args.particles, rng).items():
        a, c = fn(py), fn(cy)
        if a is not None and not np.allclose(a, c, rtol=1e-12, atol=1e-12):
            raise SystemExit(f"{name}: backends disagree")
        tp = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat))
        tc = min(timeit.repeat(lambda: fn(cy), number=1, repeat=args.repeat))
        print(f"{name:<16} {1e3 * tp:11.2f} {1e3 * tc:12.2f} {tp / tc:9.1f}")


if __name__ == "__main__":
    main()
