"""Time the compiled kernels against the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--n 256] [--repeat 20]
"""
import argparse
import timeit

import numpy as np

from openqbm import _fallback

try:
    from openqbm import _core
except ImportError:
    _core = None


def cases(n, rng):
    phi = np.linspace(-6.0, 6.0, n)
    h = phi[1] - phi[0]
    rho = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    v = 0.25 * phi**4 - 0.5 * phi**2
    n_pi = 2 * n + 1
    dpi = np.pi / (n_pi * h)
    pi = dpi * (np.arange(n_pi) - n)
    w = rng.normal(size=(n, n_pi))
    m = 8
    x = np.linspace(-2.0, 2.0, m)
    seg = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    r0 = rng.normal(size=(m, m)) + 0j
    mats = [rng.normal(size=(3, 3)) for _ in range(3)]
    return {
        "cl_rhs": ("cl_rhs", (rho, v, phi, h, 0.1, 1.0)),
        "transport_rhs": ("transport_rhs", (w, pi, h, dpi, phi**3 - phi, 6 * phi, 0.2, 1.0)),
        "oracle_sum (8 pts, 2 slices)": ("oracle_sum", (seg, r0, x, *mats, 2)),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=256, help="grid points (default 256)")
    parser.add_argument("--repeat", type=int, default=20, help="calls per timing")
    args = parser.parse_args(argv)
    if _core is None:
        print("compiled core not built; nothing to compare")
        return 1
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'numpy ms':>10s} {'cython ms':>10s} {'speedup':>8s} {'max rel diff':>13s}")
    for label, (name, call) in cases(args.n, rng).items():
        fast_fn, slow_fn = getattr(_core, name), getattr(_fallback, name)
        slow = min(timeit.repeat(lambda: slow_fn(*call), number=args.repeat, repeat=3))
        fast = min(timeit.repeat(lambda: fast_fn(*call), number=args.repeat, repeat=3))
        a, b = fast_fn(*call), slow_fn(*call)
        diff = np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)
        print(f"{label:32s} {1e3 * slow / args.repeat:10.3f} {1e3 * fast / args.repeat:10.3f} "
              f"{slow / fast:8.1f} {diff:13.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
